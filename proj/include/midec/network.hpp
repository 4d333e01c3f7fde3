#pragma once

#include "midec/layers.hpp"
#include "midec/rng.hpp"
#include "midec/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace midec::nn {

// Glorot/Xavier uniform draw for a dense [in,out] or conv [out,in,kh,kw]
// weight shape: U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
template <class S>
Tensor<S> glorot_init(const std::vector<std::size_t>& shape, std::uint64_t seed) {
    std::size_t fan_in = 0, fan_out = 0;
    if (shape.size() == 2) {
        fan_in = shape[0];
        fan_out = shape[1];
    } else if (shape.size() == 4) {
        fan_in = shape[1] * shape[2] * shape[3];
        fan_out = shape[0] * shape[2] * shape[3];
    } else {
        throw std::invalid_argument("glorot_init: expected dense or conv kernel shape, got rank " +
                                    std::to_string(shape.size()));
    }
    if (fan_in == 0 || fan_out == 0) throw std::invalid_argument("glorot_init: zero fan");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor<S> t(shape);
    Rng rng(seed);
    for (auto& v : t.data) v = static_cast<S>(rng.uniform(-bound, bound));
    return t;
}

// Activations remembered during a forward pass; acts[i] is the input to
// layer i, probs the final softmax output.
template <class S>
struct ForwardTrace {
    std::vector<Tensor<S>> acts;
    Tensor<S> probs;
    S loss = S(0);
};

template <class S>
struct Grads {
    std::vector<Tensor<S>> weights; // empty tensor where the layer has no params
    std::vector<Tensor<S>> biases;
};

// A sequential network of LayerSpecs ending in softmax_xent. Shapes are
// planned and validated once at construction.
template <class S>
class Network {
public:
    Network(std::vector<LayerSpec> specs, std::vector<std::size_t> input_shape)
        : specs_(std::move(specs)), input_shape_(std::move(input_shape)) {
        if (specs_.empty()) throw std::invalid_argument("network: no layers");
        if (specs_.back().kind != LayerKind::SoftmaxXent) {
            throw std::invalid_argument("network: last layer must be softmax_xent");
        }
        for (std::size_t i = 0; i + 1 < specs_.size(); ++i) {
            if (specs_[i].kind == LayerKind::SoftmaxXent) {
                throw std::invalid_argument("network: softmax_xent only allowed as last layer");
            }
        }
        shapes_.push_back(input_shape_);
        for (const auto& s : specs_) shapes_.push_back(layer_output_shape(s, shapes_.back()));
        weights_.resize(specs_.size());
        biases_.resize(specs_.size());
    }

    void init_params(std::uint64_t seed) {
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            const auto& s = specs_[i];
            if (s.kind == LayerKind::Conv2d) {
                weights_[i] = glorot_init<S>({s.out_channels, s.in_channels, s.kh, s.kw},
                                             derive_seed(seed, i));
                biases_[i] = Tensor<S>({s.out_channels});
            } else if (s.kind == LayerKind::Dense) {
                weights_[i] = glorot_init<S>({s.in_features, s.out_features}, derive_seed(seed, i));
                biases_[i] = Tensor<S>({s.out_features});
            }
        }
    }

    // Allocate parameter tensors at their planned shapes, zero-filled
    // (checkpoint loading overwrites them immediately afterwards).
    void alloc_params() {
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            const auto& s = specs_[i];
            if (s.kind == LayerKind::Conv2d) {
                weights_[i] = Tensor<S>({s.out_channels, s.in_channels, s.kh, s.kw});
                biases_[i] = Tensor<S>({s.out_channels});
            } else if (s.kind == LayerKind::Dense) {
                weights_[i] = Tensor<S>({s.in_features, s.out_features});
                biases_[i] = Tensor<S>({s.out_features});
            }
        }
    }

    // Full forward pass; labels may be empty for inference (loss stays 0).
    ForwardTrace<S> forward(const Tensor<S>& x, const std::vector<int>& labels) const {
        if (x.shape.size() != input_shape_.size()) {
            throw std::invalid_argument("network: input rank mismatch");
        }
        for (std::size_t d = 1; d < input_shape_.size(); ++d) {
            if (x.shape[d] != input_shape_[d]) {
                throw std::invalid_argument("network: input shape mismatch at dim " +
                                            std::to_string(d));
            }
        }
        ForwardTrace<S> tr;
        tr.acts.reserve(specs_.size());
        tr.acts.push_back(x);
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            const auto& s = specs_[i];
            const Tensor<S>& in = tr.acts.back();
            switch (s.kind) {
                case LayerKind::Conv2d:
                    tr.acts.push_back(conv2d_forward(in, weights_[i], biases_[i], s));
                    break;
                case LayerKind::AvgPool2d:
                    tr.acts.push_back(avgpool2d_forward(in, s));
                    break;
                case LayerKind::Elu:
                    tr.acts.push_back(elu_forward(in, s.alpha));
                    break;
                case LayerKind::Square:
                    tr.acts.push_back(square_forward(in));
                    break;
                case LayerKind::LogAct:
                    tr.acts.push_back(logact_forward(in, s.floor));
                    break;
                case LayerKind::Dense:
                    tr.acts.push_back(dense_forward(in, weights_[i], biases_[i], s));
                    break;
                case LayerKind::Flatten:
                    tr.acts.push_back(flatten_forward(in));
                    break;
                case LayerKind::SoftmaxXent: {
                    if (labels.empty()) {
                        tr.probs = softmax(in);
                    } else {
                        auto [loss, probs] = softmax_xent_forward(in, labels);
                        tr.loss = loss;
                        tr.probs = std::move(probs);
                    }
                    break;
                }
            }
        }
        return tr;
    }

    // Parameter gradients for the trace produced by forward() with labels.
    // The input gradient of the very first layer is never materialized.
    Grads<S> backward(const ForwardTrace<S>& tr, const std::vector<int>& labels) const {
        if (labels.empty()) throw std::invalid_argument("network backward: labels required");
        Grads<S> g;
        g.weights.resize(specs_.size());
        g.biases.resize(specs_.size());
        Tensor<S> delta = softmax_xent_backward(tr.probs, labels);
        for (std::size_t ii = specs_.size() - 1; ii-- > 0;) {
            const auto& s = specs_[ii];
            const Tensor<S>& in = tr.acts[ii];
            const bool need_dx = ii > 0;
            switch (s.kind) {
                case LayerKind::Conv2d: {
                    Tensor<S> dx;
                    conv2d_backward(in, weights_[ii], s, delta, need_dx ? &dx : nullptr,
                                    g.weights[ii], g.biases[ii]);
                    delta = std::move(dx);
                    break;
                }
                case LayerKind::AvgPool2d:
                    delta = avgpool2d_backward(in.shape, s, delta);
                    break;
                case LayerKind::Elu:
                    delta = elu_backward(in, s.alpha, delta);
                    break;
                case LayerKind::Square:
                    delta = square_backward(in, delta);
                    break;
                case LayerKind::LogAct:
                    delta = logact_backward(in, s.floor, delta);
                    break;
                case LayerKind::Dense: {
                    Tensor<S> dx;
                    dense_backward(in, weights_[ii], s, delta, need_dx ? &dx : nullptr,
                                   g.weights[ii], g.biases[ii]);
                    delta = std::move(dx);
                    break;
                }
                case LayerKind::Flatten:
                    delta = Tensor<S>(in.shape, std::move(delta.data));
                    break;
                case LayerKind::SoftmaxXent:
                    throw std::logic_error("network backward: unexpected softmax layer");
            }
            if (!need_dx) break;
        }
        return g;
    }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    const std::vector<std::vector<std::size_t>>& shapes() const { return shapes_; }
    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    std::size_t num_classes() const { return shapes_.back()[1]; }

    std::vector<Tensor<S>>& weights() { return weights_; }
    std::vector<Tensor<S>>& biases() { return biases_; }
    const std::vector<Tensor<S>>& weights() const { return weights_; }
    const std::vector<Tensor<S>>& biases() const { return biases_; }

    // Parameter count implied by the layer specs, independent of whether the
    // tensors have been allocated yet.
    std::size_t num_params() const {
        std::size_t n = 0;
        for (const auto& s : specs_) {
            if (s.kind == LayerKind::Conv2d) {
                n += s.out_channels * s.in_channels * s.kh * s.kw + s.out_channels;
            } else if (s.kind == LayerKind::Dense) {
                n += s.in_features * s.out_features + s.out_features;
            }
        }
        return n;
    }

private:
    std::vector<LayerSpec> specs_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::vector<std::size_t>> shapes_;
    std::vector<Tensor<S>> weights_;
    std::vector<Tensor<S>> biases_;
};

} // namespace midec::nn
