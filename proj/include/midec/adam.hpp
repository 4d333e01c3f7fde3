#pragma once

#include "midec/network.hpp"
#include "midec/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace midec::nn {

// Adam moment estimates; lazily sized to the parameter list on first step.
template <class S>
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step_count = 0;
    std::vector<std::vector<S>> m, v;
};

// One bias-corrected Adam update over a flat parameter list:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   theta -= lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
template <class S>
void adam_step(const std::vector<Tensor<S>*>& params, const std::vector<const Tensor<S>*>& grads,
               AdamState<S>& st) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam: parameter/gradient count mismatch");
    }
    if (st.m.empty()) {
        st.m.resize(params.size());
        st.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            st.m[i].assign(params[i]->size(), S(0));
            st.v[i].assign(params[i]->size(), S(0));
        }
    }
    if (st.m.size() != params.size()) {
        throw std::invalid_argument("adam: state does not match parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape != grads[i]->shape) {
            throw std::invalid_argument("adam: parameter/gradient shape mismatch");
        }
        if (st.m[i].size() != params[i]->size()) {
            throw std::invalid_argument("adam: state does not match parameter shapes");
        }
        grads[i]->require_finite("gradient passed to adam");
    }
    ++st.step_count;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        S* p = params[i]->data.data();
        const S* g = grads[i]->data.data();
        S* m = st.m[i].data();
        S* v = st.v[i].data();
        const std::size_t n = params[i]->size();
        for (std::size_t j = 0; j < n; ++j) {
            const double gj = static_cast<double>(g[j]);
            const double mj = st.beta1 * static_cast<double>(m[j]) + (1.0 - st.beta1) * gj;
            const double vj = st.beta2 * static_cast<double>(v[j]) + (1.0 - st.beta2) * gj * gj;
            m[j] = static_cast<S>(mj);
            v[j] = static_cast<S>(vj);
            const double update = st.lr * (mj / c1) / (std::sqrt(vj / c2) + st.eps);
            p[j] = static_cast<S>(static_cast<double>(p[j]) - update);
        }
    }
}

// Convenience wrapper applying one step to every parameterized layer of a
// network, weights before biases in layer order.
template <class S>
void adam_step(Network<S>& net, const Grads<S>& grads, AdamState<S>& st) {
    std::vector<Tensor<S>*> params;
    std::vector<const Tensor<S>*> gs;
    for (std::size_t i = 0; i < net.specs().size(); ++i) {
        if (!net.specs()[i].has_params()) continue;
        params.push_back(&net.weights()[i]);
        gs.push_back(&grads.weights[i]);
        params.push_back(&net.biases()[i]);
        gs.push_back(&grads.biases[i]);
    }
    adam_step(params, gs, st);
}

} // namespace midec::nn
