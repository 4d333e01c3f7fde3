#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace midec::nn {

// Dense row-major N-d array. Scalar is float in normal operation and
// double when verifying gradients.
template <class Scalar>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<Scalar> data;
    std::vector<Scalar> grad; // empty unless gradient storage was requested

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shp) : shape(std::move(shp)) {
        data.assign(count(shape), Scalar(0));
    }

    Tensor(std::vector<std::size_t> shp, std::vector<Scalar> values)
        : shape(std::move(shp)), data(std::move(values)) {
        if (count(shape) != data.size()) {
            throw std::invalid_argument("tensor: shape does not match value count");
        }
    }

    static std::size_t count(const std::vector<std::size_t>& shp) {
        if (shp.empty()) throw std::invalid_argument("tensor: empty shape");
        std::size_t n = 1;
        for (std::size_t d : shp) {
            if (d == 0) throw std::invalid_argument("tensor: zero-sized dimension");
            n *= d;
        }
        return n;
    }

    std::size_t size() const { return data.size(); }

    std::size_t dim(std::size_t i) const { return shape.at(i); }

    void alloc_grad() { grad.assign(data.size(), Scalar(0)); }
    void zero_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), Scalar(0));
        else std::fill(grad.begin(), grad.end(), Scalar(0));
    }

    // flat index helpers for the 2-d/4-d layouts used by the layers
    std::size_t idx2(std::size_t a, std::size_t b) const { return a * shape[1] + b; }
    std::size_t idx4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return ((n * shape[1] + c) * shape[2] + h) * shape[3] + w;
    }

    Scalar& at2(std::size_t a, std::size_t b) { return data[idx2(a, b)]; }
    Scalar at2(std::size_t a, std::size_t b) const { return data[idx2(a, b)]; }
    Scalar& at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return data[idx4(n, c, h, w)];
    }
    Scalar at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return data[idx4(n, c, h, w)];
    }

    bool all_finite() const {
        for (Scalar v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    void require_finite(const std::string& what) const {
        if (!all_finite()) throw std::runtime_error("non-finite values in " + what);
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

inline std::string shape_to_string(const std::vector<std::size_t>& shp) {
    std::string s = "(";
    for (std::size_t i = 0; i < shp.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shp[i]);
    }
    s += ")";
    return s;
}

} // namespace midec::nn
