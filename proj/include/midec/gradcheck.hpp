#pragma once

#include "midec/network.hpp"
#include "midec/rng.hpp"
#include "midec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace midec::nn {

struct GradCheckOptions {
    double h = 1e-5;                    // central-difference step
    std::size_t samples_per_tensor = 0; // 0 = check every parameter
    std::uint64_t sample_seed = 0x6a09e667f3bcc908ULL;
};

// Compares analytic parameter gradients of the given network against central
// finite differences in double precision and returns the worst relative
// error seen, |a - n| / max(|a|, |n|, 1e-4). Exact zeros in the input and
// parameters are nudged to 1e-3 first so the check never straddles the ELU
// kink at the origin. The caller's network is not modified.
inline double grad_check(const Network<double>& network, const Tensor<double>& input,
                         const std::vector<int>& labels, GradCheckOptions opts = {}) {
    Network<double> net = network;

    auto nudge = [](Tensor<double>& t) {
        for (auto& v : t.data) {
            if (std::abs(v) < 1e-6) v = 1e-3;
        }
    };
    Tensor<double> x = input;
    nudge(x);
    for (auto& w : net.weights()) {
        if (w.size()) nudge(w);
    }
    for (auto& b : net.biases()) {
        if (b.size()) nudge(b);
    }

    const auto trace = net.forward(x, labels);
    const auto analytic = net.backward(trace, labels);

    auto loss_at = [&]() { return static_cast<double>(net.forward(x, labels).loss); };

    Rng rng(opts.sample_seed);
    double worst = 0.0;
    auto check_tensor = [&](Tensor<double>& param, const Tensor<double>& grad) {
        std::vector<std::size_t> idx;
        const std::size_t n = param.size();
        if (opts.samples_per_tensor == 0 || opts.samples_per_tensor >= n) {
            idx.resize(n);
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        } else {
            while (idx.size() < opts.samples_per_tensor) {
                const std::size_t cand = static_cast<std::size_t>(rng.below(n));
                if (std::find(idx.begin(), idx.end(), cand) == idx.end()) idx.push_back(cand);
            }
        }
        for (std::size_t i : idx) {
            const double saved = param.data[i];
            param.data[i] = saved + opts.h;
            const double lp = loss_at();
            param.data[i] = saved - opts.h;
            const double lm = loss_at();
            param.data[i] = saved;
            const double numeric = (lp - lm) / (2.0 * opts.h);
            const double a = grad.data[i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
            worst = std::max(worst, rel);
        }
    };

    for (std::size_t li = 0; li < net.specs().size(); ++li) {
        if (!net.specs()[li].has_params()) continue;
        check_tensor(net.weights()[li], analytic.weights[li]);
        check_tensor(net.biases()[li], analytic.biases[li]);
    }
    return worst;
}

// Convenience form: plans the network from specs and Glorot-initializes it
// from param_seed before checking.
inline double grad_check(const std::vector<LayerSpec>& specs,
                         const std::vector<std::size_t>& input_shape,
                         const Tensor<double>& input, const std::vector<int>& labels,
                         std::uint64_t param_seed, GradCheckOptions opts = {}) {
    Network<double> net(specs, input_shape);
    net.init_params(param_seed);
    return grad_check(net, input, labels, opts);
}

} // namespace midec::nn
