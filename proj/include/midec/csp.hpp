#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace midec::fbcsp {

// Common-spatial-pattern filters for one band and one target-vs-rest split.
// filters holds 2*m_pairs rows of length n_channels: the m_pairs filters
// with the largest generalized eigenvalues followed by the m_pairs with the
// smallest, eigenvalues stored in the same (descending) order.
struct CspModel {
    double band_low = 0.0, band_high = 0.0;
    std::size_t n_channels = 0;
    std::size_t m_pairs = 0;
    std::vector<double> filters;     // [2*m_pairs][n_channels]
    std::vector<double> eigenvalues; // length 2*m_pairs, each in (0,1)
    int ridge_applied = 0;           // how many input covariances needed the ridge

    const double* filter(std::size_t i) const { return filters.data() + i * n_channels; }
    std::size_t n_filters() const { return 2 * m_pairs; }
};

// (X X^T) / trace(X X^T) of a channels-by-time epoch. The caller centers
// each channel beforehand; a zero-energy epoch is an error.
Eigen::MatrixXd trace_normalized_covariance(const Eigen::MatrixXd& epoch);

// Solve cov_target w = lambda (cov_target + cov_rest) w by whitening the
// composite and eigendecomposing the whitened target; keep both spectral
// extremes. Inputs whose smallest eigenvalue falls below 1e-10 get a
// 1e-9 I ridge, counted in ridge_applied.
CspModel csp_fit(const Eigen::MatrixXd& cov_target, const Eigen::MatrixXd& cov_rest,
                 std::size_t m_pairs);

// Log of the normalized variance of each filter projection:
// ln( var_i / sum_j var_j ). Scale-invariant by construction.
std::vector<double> csp_features(const CspModel& model, const Eigen::MatrixXd& epoch);

// Same features from a precomputed centered scatter matrix X X^T (any
// positive scale): var_i is proportional to w_i^T S w_i.
std::vector<double> csp_features_from_scatter(const CspModel& model, const Eigen::MatrixXd& scatter);

} // namespace midec::fbcsp
