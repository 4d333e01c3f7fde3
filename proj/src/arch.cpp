#include "midec/arch.hpp"

#include <cmath>
#include <stdexcept>

namespace midec::model {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::BfrCnn: return "bfr_cnn";
        case ModelKind::ShallowConvNet: return "shallow_convnet";
    }
    throw std::logic_error("to_string: unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "bfr_cnn") return ModelKind::BfrCnn;
    if (name == "shallow_convnet") return ModelKind::ShallowConvNet;
    throw std::invalid_argument("unknown model kind '" + name +
                                "' (expected bfr_cnn or shallow_convnet)");
}

std::size_t default_temporal_kernel(double fs) {
    if (fs <= 0.0) throw std::invalid_argument("default_temporal_kernel: fs must be positive");
    auto k = static_cast<std::size_t>(std::llround(fs / 4.0));
    if (k < 1) k = 1;
    if (k % 2 == 0) ++k;
    return k;
}

void ArchitectureConfig::validate() const {
    if (fs <= 0.0) throw std::invalid_argument("ArchitectureConfig: fs must be positive");
    if (n_channels < 1 || epoch_len < 1)
        throw std::invalid_argument("ArchitectureConfig: input dimensions must be positive");
    if (n_classes < 2) throw std::invalid_argument("ArchitectureConfig: need at least 2 classes");
    if (f1_temporal_filters < 1 || f2_refine_filters < 1 || refine_kernel < 1 ||
        pool1_kernel < 1 || pool1_stride < 1 || pool2_kernel < 1 || pool2_stride < 1)
        throw std::invalid_argument("ArchitectureConfig: filter/pool sizes must be positive");
    if (temporal_kernel != default_temporal_kernel(fs))
        throw std::invalid_argument(
            "ArchitectureConfig: temporal_kernel must be round(fs/4) adjusted to odd (" +
            std::to_string(default_temporal_kernel(fs)) + " for fs " + std::to_string(fs) + ")");
}

ArchitectureConfig arch_for(double fs, std::size_t epoch_len, std::size_t n_channels,
                            std::size_t n_classes) {
    ArchitectureConfig cfg;
    cfg.fs = fs;
    cfg.epoch_len = epoch_len;
    cfg.n_channels = n_channels;
    cfg.n_classes = n_classes;
    cfg.temporal_kernel = default_temporal_kernel(fs);
    return cfg;
}

std::vector<std::vector<std::size_t>> plan_shapes(const std::vector<nn::LayerSpec>& specs,
                                                  const ArchitectureConfig& cfg) {
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::size_t> shape = {1, 1, cfg.n_channels, cfg.epoch_len};
    for (const auto& spec : specs) {
        shape = nn::layer_output_shape(spec, shape);
        shapes.push_back(shape);
    }
    return shapes;
}

std::vector<nn::LayerSpec> build_bfr_cnn(const ArchitectureConfig& cfg) {
    cfg.validate();
    using nn::LayerSpec;
    std::vector<nn::LayerSpec> out = {
        // Block 1: temporal filtering then a spatial filter that collapses
        // the channel axis to a single "input channel".
        LayerSpec::conv2d(cfg.f1_temporal_filters, 1, 1, cfg.temporal_kernel),
        LayerSpec::conv2d(cfg.f1_temporal_filters, cfg.f1_temporal_filters, cfg.n_channels, 1),
        LayerSpec::elu(),
        LayerSpec::avgpool2d(1, cfg.pool1_kernel, 1, cfg.pool1_stride),
        // Block 2: feature refinement.
        LayerSpec::conv2d(cfg.f2_refine_filters, cfg.f1_temporal_filters, 1, cfg.refine_kernel),
        LayerSpec::elu(),
        LayerSpec::avgpool2d(1, cfg.pool2_kernel, 1, cfg.pool2_stride),
        LayerSpec::flatten(),
    };
    // The dense fan-in falls out of the shape plan of everything before it.
    const auto flat = plan_shapes(out, cfg).back();
    out.push_back(LayerSpec::dense(flat[1], cfg.n_classes));
    out.push_back(LayerSpec::softmax_xent());
    return out;
}

std::vector<nn::LayerSpec> build_shallow_convnet(const ArchitectureConfig& cfg) {
    cfg.validate();
    using nn::LayerSpec;
    std::vector<nn::LayerSpec> out = {
        LayerSpec::conv2d(40, 1, 1, 25),
        LayerSpec::conv2d(40, 40, cfg.n_channels, 1),
        LayerSpec::square(),
        LayerSpec::avgpool2d(1, 75, 1, 15),
        LayerSpec::logact(),
        LayerSpec::flatten(),
    };
    const auto flat = plan_shapes(out, cfg).back();
    out.push_back(LayerSpec::dense(flat[1], cfg.n_classes));
    out.push_back(LayerSpec::softmax_xent());
    return out;
}

std::vector<nn::LayerSpec> build_model(ModelKind kind, const ArchitectureConfig& cfg) {
    return kind == ModelKind::BfrCnn ? build_bfr_cnn(cfg) : build_shallow_convnet(cfg);
}

} // namespace midec::model
