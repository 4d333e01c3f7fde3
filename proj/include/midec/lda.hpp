#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace midec::fbcsp {

// Binary linear discriminant: score(x) = w . x + b, positive for class 1.
struct LdaModel {
    std::vector<double> w;
    double b = 0.0;
    double gamma = 0.0; // shrinkage intensity actually used, in [0,1]
};

// Fisher LDA with the pooled within-class covariance shrunk toward a scaled
// identity, (1-gamma) Sigma + gamma (trace(Sigma)/F) I, using the analytic
// Ledoit-Wolf intensity. Pass force_gamma to pin the intensity (0 recovers
// plain LDA). X is n_samples-by-n_features; y holds labels 0/1 and must
// contain both classes; n_samples >= 4 and n_features >= 1 are required.
LdaModel shrinkage_lda_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           std::optional<double> force_gamma = std::nullopt);

double lda_score(const LdaModel& model, const double* features, std::size_t n_features);

} // namespace midec::fbcsp
