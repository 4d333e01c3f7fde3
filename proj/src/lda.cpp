#include "midec/lda.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace midec::fbcsp {

LdaModel shrinkage_lda_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           std::optional<double> force_gamma) {
    const Eigen::Index n = X.rows();
    const Eigen::Index f = X.cols();
    if (f < 1) throw std::invalid_argument("shrinkage_lda_fit: need at least one feature");
    if (static_cast<std::size_t>(n) != y.size())
        throw std::invalid_argument("shrinkage_lda_fit: X rows and label count differ");
    if (n < 4) throw std::invalid_argument("shrinkage_lda_fit: need at least 4 samples");
    if (!X.allFinite()) throw std::invalid_argument("shrinkage_lda_fit: non-finite features");

    Eigen::Index n0 = 0, n1 = 0;
    for (int label : y) {
        if (label == 0)
            ++n0;
        else if (label == 1)
            ++n1;
        else
            throw std::invalid_argument("shrinkage_lda_fit: labels must be 0 or 1, got " +
                                        std::to_string(label));
    }
    if (n0 == 0 || n1 == 0)
        throw std::invalid_argument("shrinkage_lda_fit: both classes must be present");

    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(f), mu1 = Eigen::VectorXd::Zero(f);
    for (Eigen::Index i = 0; i < n; ++i) (y[static_cast<std::size_t>(i)] == 0 ? mu0 : mu1) += X.row(i);
    mu0 /= static_cast<double>(n0);
    mu1 /= static_cast<double>(n1);

    // Rows centered by their own class mean; Sigma is the pooled MLE covariance.
    Eigen::MatrixXd z(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
        z.row(i) = X.row(i) - (y[static_cast<std::size_t>(i)] == 0 ? mu0 : mu1).transpose();
    const Eigen::MatrixXd sigma = (z.transpose() * z) / static_cast<double>(n);

    const double nu = sigma.trace() / static_cast<double>(f); // scaled-identity target level
    const double sigma_norm2 = sigma.squaredNorm();

    double gamma;
    if (force_gamma) {
        gamma = *force_gamma;
        if (gamma < 0.0 || gamma > 1.0)
            throw std::invalid_argument("shrinkage_lda_fit: gamma must lie in [0, 1]");
    } else {
        // Ledoit-Wolf: gamma* = phi / delta2 with
        //   phi    = (1/n^2) sum_i || z_i z_i^T - Sigma ||_F^2
        //          = (1/n^2) sum_i ||z_i||^4 - ||Sigma||_F^2 / n
        //   delta2 = || Sigma - nu I ||_F^2 = ||Sigma||_F^2 - nu^2 f
        double sum4 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = z.row(i).squaredNorm();
            sum4 += q * q;
        }
        const double phi = sum4 / (static_cast<double>(n) * static_cast<double>(n)) -
                           sigma_norm2 / static_cast<double>(n);
        const double delta2 = sigma_norm2 - nu * nu * static_cast<double>(f);
        gamma = delta2 > 0.0 ? std::clamp(phi / delta2, 0.0, 1.0) : 1.0;
    }

    Eigen::MatrixXd shrunk = (1.0 - gamma) * sigma;
    shrunk.diagonal().array() += gamma * nu;

    const Eigen::VectorXd diff = mu1 - mu0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shrunk);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw std::runtime_error(
            "shrinkage_lda_fit: shrunk covariance is singular; features may be degenerate");
    const Eigen::VectorXd w = ldlt.solve(diff);
    if (!w.allFinite())
        throw std::runtime_error("shrinkage_lda_fit: solve produced non-finite weights");

    LdaModel model;
    model.w.assign(w.data(), w.data() + f);
    model.b = -0.5 * w.dot(mu0 + mu1);
    model.gamma = gamma;
    return model;
}

double lda_score(const LdaModel& model, const double* features, std::size_t n_features) {
    if (n_features != model.w.size())
        throw std::invalid_argument("lda_score: feature count does not match the model");
    Eigen::Map<const Eigen::VectorXd> x(features, static_cast<Eigen::Index>(n_features));
    Eigen::Map<const Eigen::VectorXd> w(model.w.data(), static_cast<Eigen::Index>(model.w.size()));
    return w.dot(x) + model.b;
}

} // namespace midec::fbcsp
