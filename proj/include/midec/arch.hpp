#pragma once

#include "midec/layers.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace midec::model {

enum class ModelKind { BfrCnn, ShallowConvNet };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// round(fs/4), bumped up to the nearest odd integer (symmetric receptive
// field covering roughly a quarter second).
std::size_t default_temporal_kernel(double fs);

struct ArchitectureConfig {
    std::size_t n_channels = 24;
    std::size_t epoch_len = 750; // 3 s at 250 Hz
    double fs = 250.0;
    std::size_t n_classes = 4;
    std::size_t f1_temporal_filters = 16;
    std::size_t temporal_kernel = 63; // = default_temporal_kernel(fs)
    std::size_t f2_refine_filters = 16;
    std::size_t refine_kernel = 11;
    std::size_t pool1_kernel = 25, pool1_stride = 5;
    std::size_t pool2_kernel = 8, pool2_stride = 8;

    void validate() const;
};

// Convenience: defaults re-derived for a dataset's rate and epoch length.
ArchitectureConfig arch_for(double fs, std::size_t epoch_len, std::size_t n_channels = 24,
                            std::size_t n_classes = 4);

// Layer sequences ending in softmax_xent. Both builders validate the full
// shape plan and throw if any intermediate dimension collapses.
std::vector<nn::LayerSpec> build_bfr_cnn(const ArchitectureConfig& cfg);
std::vector<nn::LayerSpec> build_shallow_convnet(const ArchitectureConfig& cfg);
std::vector<nn::LayerSpec> build_model(ModelKind kind, const ArchitectureConfig& cfg);

// Intermediate shapes for input {1, 1, n_channels, epoch_len}, one entry per
// layer output (the planning used at build time).
std::vector<std::vector<std::size_t>> plan_shapes(const std::vector<nn::LayerSpec>& specs,
                                                  const ArchitectureConfig& cfg);

} // namespace midec::model
