#pragma once

#include "midec/csp.hpp"
#include "midec/dataset.hpp"
#include "midec/lda.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace midec::fbcsp {

// One-vs-rest filter-bank CSP + shrinkage LDA over a bank of bandpass filters.
struct FbcspModel {
    double fs = 0.0;
    std::size_t n_channels = 0;
    std::size_t n_samples = 0;
    std::size_t m_pairs = 0;
    std::vector<std::pair<double, double>> bands;
    std::vector<std::string> class_names;
    std::vector<std::vector<CspModel>> csp; // [class][band]
    std::vector<LdaModel> lda;              // [class]
    int ridge_events = 0;                   // total covariance ridges across all fits

    std::size_t n_classes() const { return class_names.size(); }
    std::size_t n_features() const { return bands.size() * 2 * m_pairs; }
};

// The standard 4 Hz bank: 4-8, 8-12, ..., 36-40 Hz.
std::vector<std::pair<double, double>> default_bands();

// Train on every epoch of `train` (each class needs at least 2 epochs).
// Deterministic: identical inputs give an identical model.
FbcspModel fbcsp_fit(const EpochedDataset& train,
                     const std::vector<std::pair<double, double>>& bands = default_bands(),
                     std::size_t m_pairs = 2);

// Per-class one-vs-rest discriminant scores for one raw epoch
// (n_channels-by-n_samples, row-major float as stored in EpochedDataset).
std::vector<double> fbcsp_scores(const FbcspModel& model, const float* epoch,
                                 std::size_t n_channels, std::size_t n_samples);

// Argmax of fbcsp_scores; ties resolve to the lowest class index.
int fbcsp_predict(const FbcspModel& model, const float* epoch, std::size_t n_channels,
                  std::size_t n_samples);

// JSON round-trip for trained models. Doubles survive exactly (the printer
// emits shortest-round-trip representations), so load(save(m)) scores
// bit-identically to m.
std::string fbcsp_to_json(const FbcspModel& model);
FbcspModel fbcsp_from_json(const std::string& text);

} // namespace midec::fbcsp
