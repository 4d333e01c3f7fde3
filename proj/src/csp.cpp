#include "midec/csp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace midec::fbcsp {

namespace {

constexpr double kSpdEigenFloor = 1e-10;
constexpr double kRidge = 1e-9;

// Deterministic sign convention: flip so the entry of largest magnitude is
// positive (first such entry wins on exact ties).
void fix_sign(Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    double best_abs = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (v[best] < 0.0) v = -v;
}

// Returns the (possibly ridged) matrix; bumps `ridged` when the ridge fired.
Eigen::MatrixXd ensure_spd(const Eigen::MatrixXd& m, const char* what, int& ridged) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= kSpdEigenFloor) {
        sym += kRidge * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
        ++ridged;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(sym, Eigen::EigenvaluesOnly);
        if (es2.info() != Eigen::Success || es2.eigenvalues().minCoeff() <= 0.0)
            throw std::runtime_error(std::string(what) +
                                     ": covariance is not positive definite even after a 1e-9 ridge");
    }
    return sym;
}

} // namespace

Eigen::MatrixXd trace_normalized_covariance(const Eigen::MatrixXd& epoch) {
    if (epoch.rows() < 1 || epoch.cols() < 1)
        throw std::invalid_argument("trace_normalized_covariance: empty epoch");
    if (!epoch.allFinite())
        throw std::invalid_argument("trace_normalized_covariance: non-finite samples");
    Eigen::MatrixXd cov = epoch * epoch.transpose();
    const double tr = cov.trace();
    if (!(tr > 0.0))
        throw std::invalid_argument("trace_normalized_covariance: zero-energy epoch (trace is 0)");
    cov /= tr;
    return cov;
}

CspModel csp_fit(const Eigen::MatrixXd& cov_target, const Eigen::MatrixXd& cov_rest,
                 std::size_t m_pairs) {
    if (m_pairs < 1) throw std::invalid_argument("csp_fit: m_pairs must be at least 1");
    if (cov_target.rows() != cov_rest.rows() || cov_target.cols() != cov_rest.cols())
        throw std::invalid_argument("csp_fit: covariance shapes differ");

    const Eigen::Index c = cov_target.rows();
    if (static_cast<std::size_t>(c) < 2 * m_pairs)
        throw std::invalid_argument("csp_fit: need at least 2*m_pairs = " +
                                    std::to_string(2 * m_pairs) + " channels, got " +
                                    std::to_string(c));

    CspModel model;
    model.n_channels = static_cast<std::size_t>(c);
    model.m_pairs = m_pairs;

    const Eigen::MatrixXd ct = ensure_spd(cov_target, "csp_fit(target)", model.ridge_applied);
    const Eigen::MatrixXd cr = ensure_spd(cov_rest, "csp_fit(rest)", model.ridge_applied);

    // Whiten the composite: P Cc P^T = I with P = D^{-1/2} U^T.
    const Eigen::MatrixXd cc = ct + cr;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_c(cc);
    if (es_c.info() != Eigen::Success)
        throw std::runtime_error("csp_fit: composite eigendecomposition failed");
    if (es_c.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("csp_fit: composite covariance is not positive definite");
    const Eigen::MatrixXd p =
        es_c.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es_c.eigenvectors().transpose();

    // Eigenvectors of the whitened target give the full filter set W = P^T V;
    // then W^T Ct W = diag(lambda) and W^T Cc W = I.
    Eigen::MatrixXd s = p * ct * p.transpose();
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(s);
    if (es_s.info() != Eigen::Success)
        throw std::runtime_error("csp_fit: whitened-target eigendecomposition failed");

    const Eigen::MatrixXd w_full = p.transpose() * es_s.eigenvectors();
    const Eigen::VectorXd lambda = es_s.eigenvalues(); // ascending

    // Keep m_pairs from each spectral extreme, listed in descending lambda.
    std::vector<Eigen::Index> order;
    order.reserve(2 * m_pairs);
    for (std::size_t i = 0; i < m_pairs; ++i) order.push_back(c - 1 - static_cast<Eigen::Index>(i));
    for (std::size_t i = m_pairs; i-- > 0;) order.push_back(static_cast<Eigen::Index>(i));

    model.filters.resize(2 * m_pairs * static_cast<std::size_t>(c));
    model.eigenvalues.resize(2 * m_pairs);
    for (std::size_t k = 0; k < order.size(); ++k) {
        Eigen::VectorXd w = w_full.col(order[k]);
        fix_sign(w);
        for (Eigen::Index j = 0; j < c; ++j)
            model.filters[k * static_cast<std::size_t>(c) + static_cast<std::size_t>(j)] = w[j];
        model.eigenvalues[k] = lambda[order[k]];
    }
    return model;
}

std::vector<double> csp_features_from_scatter(const CspModel& model, const Eigen::MatrixXd& scatter) {
    const auto c = static_cast<Eigen::Index>(model.n_channels);
    if (scatter.rows() != c || scatter.cols() != c)
        throw std::invalid_argument("csp_features: scatter shape does not match the model");

    const std::size_t nf = model.n_filters();
    std::vector<double> var(nf);
    double total = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        Eigen::Map<const Eigen::VectorXd> w(model.filter(i), c);
        var[i] = std::max(w.dot(scatter * w), 0.0); // clamp eigensolver roundoff
        total += var[i];
    }
    if (!(total > 0.0))
        throw std::invalid_argument("csp_features: all filter projections have zero variance");

    std::vector<double> feats(nf);
    for (std::size_t i = 0; i < nf; ++i) feats[i] = std::log(var[i] / total);
    return feats;
}

std::vector<double> csp_features(const CspModel& model, const Eigen::MatrixXd& epoch) {
    if (epoch.rows() != static_cast<Eigen::Index>(model.n_channels))
        throw std::invalid_argument("csp_features: epoch channel count does not match the model");
    if (epoch.cols() < 2) throw std::invalid_argument("csp_features: epoch too short");
    Eigen::MatrixXd centered = epoch.colwise() - epoch.rowwise().mean();
    return csp_features_from_scatter(model, centered * centered.transpose());
}

} // namespace midec::fbcsp
