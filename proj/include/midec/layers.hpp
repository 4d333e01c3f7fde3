#pragma once

#include "midec/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace midec::nn {

enum class LayerKind { Conv2d, AvgPool2d, Elu, Square, LogAct, Dense, Flatten, SoftmaxXent };

// One layer of the sequential graph. Only the fields of the given kind are
// meaningful; the factory functions below fill them in.
struct LayerSpec {
    LayerKind kind = LayerKind::Flatten;
    std::size_t out_channels = 0, in_channels = 0;
    std::size_t kh = 0, kw = 0;
    std::size_t sh = 1, sw = 1;
    std::size_t in_features = 0, out_features = 0;
    double alpha = 1.0;   // elu
    double floor = 1e-6;  // log activation clamp

    static LayerSpec conv2d(std::size_t cout, std::size_t cin, std::size_t kh, std::size_t kw,
                            std::size_t sh = 1, std::size_t sw = 1) {
        LayerSpec s;
        s.kind = LayerKind::Conv2d;
        s.out_channels = cout;
        s.in_channels = cin;
        s.kh = kh;
        s.kw = kw;
        s.sh = sh;
        s.sw = sw;
        if (kh < 1 || kw < 1 || sh < 1 || sw < 1 || cout < 1 || cin < 1) {
            throw std::invalid_argument("conv2d spec: sizes and strides must be >= 1");
        }
        return s;
    }
    static LayerSpec avgpool2d(std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw) {
        LayerSpec s;
        s.kind = LayerKind::AvgPool2d;
        s.kh = kh;
        s.kw = kw;
        s.sh = sh;
        s.sw = sw;
        if (kh < 1 || kw < 1 || sh < 1 || sw < 1) {
            throw std::invalid_argument("avgpool2d spec: sizes and strides must be >= 1");
        }
        return s;
    }
    static LayerSpec elu(double alpha = 1.0) {
        LayerSpec s;
        s.kind = LayerKind::Elu;
        s.alpha = alpha;
        return s;
    }
    static LayerSpec square() {
        LayerSpec s;
        s.kind = LayerKind::Square;
        return s;
    }
    static LayerSpec logact(double floor = 1e-6) {
        LayerSpec s;
        s.kind = LayerKind::LogAct;
        if (floor <= 0) throw std::invalid_argument("logact spec: floor must be positive");
        s.floor = floor;
        return s;
    }
    static LayerSpec dense(std::size_t in_features, std::size_t out_features) {
        LayerSpec s;
        s.kind = LayerKind::Dense;
        s.in_features = in_features;
        s.out_features = out_features;
        if (in_features < 1 || out_features < 1) {
            throw std::invalid_argument("dense spec: feature counts must be >= 1");
        }
        return s;
    }
    static LayerSpec flatten() { return LayerSpec{}; }
    static LayerSpec softmax_xent() {
        LayerSpec s;
        s.kind = LayerKind::SoftmaxXent;
        return s;
    }

    bool has_params() const { return kind == LayerKind::Conv2d || kind == LayerKind::Dense; }
    const char* name() const {
        switch (kind) {
            case LayerKind::Conv2d: return "conv2d";
            case LayerKind::AvgPool2d: return "avgpool2d";
            case LayerKind::Elu: return "elu";
            case LayerKind::Square: return "square";
            case LayerKind::LogAct: return "logact";
            case LayerKind::Dense: return "dense";
            case LayerKind::Flatten: return "flatten";
            case LayerKind::SoftmaxXent: return "softmax_xent";
        }
        return "?";
    }
};

// Output shape of one layer, validating the geometry. Throws on any plan
// that would produce an empty dimension.
inline std::vector<std::size_t> layer_output_shape(const LayerSpec& s,
                                                   const std::vector<std::size_t>& in) {
    auto window_out = [&](std::size_t dim, std::size_t k, std::size_t stride, const char* what) {
        if (k > dim) {
            throw std::invalid_argument(std::string(s.name()) + ": " + what + " window " +
                                        std::to_string(k) + " exceeds input extent " +
                                        std::to_string(dim));
        }
        return (dim - k) / stride + 1;
    };
    switch (s.kind) {
        case LayerKind::Conv2d: {
            if (in.size() != 4) throw std::invalid_argument("conv2d: expected NCHW input");
            if (in[1] != s.in_channels) {
                throw std::invalid_argument("conv2d: channel mismatch, input has " +
                                            std::to_string(in[1]) + ", kernel expects " +
                                            std::to_string(s.in_channels));
            }
            return {in[0], s.out_channels, window_out(in[2], s.kh, s.sh, "kernel"),
                    window_out(in[3], s.kw, s.sw, "kernel")};
        }
        case LayerKind::AvgPool2d: {
            if (in.size() != 4) throw std::invalid_argument("avgpool2d: expected NCHW input");
            return {in[0], in[1], window_out(in[2], s.kh, s.sh, "pool"),
                    window_out(in[3], s.kw, s.sw, "pool")};
        }
        case LayerKind::Elu:
        case LayerKind::Square:
        case LayerKind::LogAct:
            return in;
        case LayerKind::Flatten: {
            if (in.size() < 2) throw std::invalid_argument("flatten: expected batched input");
            std::size_t f = 1;
            for (std::size_t i = 1; i < in.size(); ++i) f *= in[i];
            return {in[0], f};
        }
        case LayerKind::Dense: {
            if (in.size() != 2) throw std::invalid_argument("dense: expected [N,F] input");
            if (in[1] != s.in_features) {
                throw std::invalid_argument("dense: dimension mismatch, input features " +
                                            std::to_string(in[1]) + " vs weight " +
                                            std::to_string(s.in_features));
            }
            return {in[0], s.out_features};
        }
        case LayerKind::SoftmaxXent: {
            if (in.size() != 2) throw std::invalid_argument("softmax_xent: expected [N,K] logits");
            return in;
        }
    }
    throw std::logic_error("unknown layer kind");
}

namespace detail {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>>;
template <class S>
using CMapRM = Eigen::Map<const MatRM<S>>;
// Sliding-window view of a contiguous row: element (k, o) = row[o + k].
template <class S>
using SlideMap = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>, 0,
                            Eigen::OuterStride<>>;

template <class S>
void im2col(const Tensor<S>& x, std::size_t n, const LayerSpec& s, std::size_t oh_n,
            std::size_t ow_n, std::vector<S>& cols) {
    const std::size_t cin = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t ckk = cin * s.kh * s.kw;
    cols.resize(ckk * oh_n * ow_n);
    const S* base = x.data.data() + n * cin * H * W;
    std::size_t r = 0;
    for (std::size_t ci = 0; ci < cin; ++ci) {
        for (std::size_t kh = 0; kh < s.kh; ++kh) {
            for (std::size_t kw = 0; kw < s.kw; ++kw, ++r) {
                S* dst = cols.data() + r * oh_n * ow_n;
                for (std::size_t oh = 0; oh < oh_n; ++oh) {
                    const S* src = base + ci * H * W + (oh * s.sh + kh) * W + kw;
                    if (s.sw == 1) {
                        std::copy(src, src + ow_n, dst);
                        dst += ow_n;
                    } else {
                        for (std::size_t ow = 0; ow < ow_n; ++ow) *dst++ = src[ow * s.sw];
                    }
                }
            }
        }
    }
}

template <class S>
void col2im_add(const std::vector<S>& cols, std::size_t n, const LayerSpec& s, std::size_t oh_n,
                std::size_t ow_n, Tensor<S>& gx) {
    const std::size_t cin = gx.shape[1], H = gx.shape[2], W = gx.shape[3];
    S* base = gx.data.data() + n * cin * H * W;
    std::size_t r = 0;
    for (std::size_t ci = 0; ci < cin; ++ci) {
        for (std::size_t kh = 0; kh < s.kh; ++kh) {
            for (std::size_t kw = 0; kw < s.kw; ++kw, ++r) {
                const S* src = cols.data() + r * oh_n * ow_n;
                for (std::size_t oh = 0; oh < oh_n; ++oh) {
                    S* dst = base + ci * H * W + (oh * s.sh + kh) * W + kw;
                    if (s.sw == 1) {
                        for (std::size_t ow = 0; ow < ow_n; ++ow) dst[ow] += src[ow];
                    } else {
                        for (std::size_t ow = 0; ow < ow_n; ++ow) dst[ow * s.sw] += src[ow];
                    }
                    src += ow_n;
                }
            }
        }
    }
}

} // namespace detail

// Valid cross-correlation of NCHW input with an OIHW kernel.
template <class S>
Tensor<S> conv2d_forward(const Tensor<S>& x, const Tensor<S>& kernel, const Tensor<S>& bias,
                         const LayerSpec& s) {
    using namespace detail;
    const auto out_shape = layer_output_shape(s, x.shape);
    if (kernel.shape != std::vector<std::size_t>{s.out_channels, s.in_channels, s.kh, s.kw}) {
        throw std::invalid_argument("conv2d: kernel tensor does not match layer spec");
    }
    if (bias.shape != std::vector<std::size_t>{s.out_channels}) {
        throw std::invalid_argument("conv2d: bias tensor does not match layer spec");
    }
    const std::size_t N = x.shape[0], cin = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t cout = s.out_channels, oh_n = out_shape[2], ow_n = out_shape[3];
    Tensor<S> y(out_shape);

    // bias fill
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t co = 0; co < cout; ++co) {
            S* dst = y.data.data() + (n * cout + co) * oh_n * ow_n;
            std::fill(dst, dst + oh_n * ow_n, bias.data[co]);
        }
    }

    const bool unit_stride = (s.sh == 1 && s.sw == 1);
    if (unit_stride && s.kh == 1) {
        // 1-d convolution along W, row by row; no column buffer needed.
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t h = 0; h < H; ++h) {
                // output rows for channel co live oh_n*ow_n apart
                Eigen::Map<MatRM<S>, 0, Eigen::OuterStride<>> out_s(
                    y.data.data() + n * cout * oh_n * ow_n + h * ow_n, cout, ow_n,
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(oh_n * ow_n)));
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    SlideMap<S> cols(x.data.data() + ((n * cin + ci) * H + h) * W, s.kw, ow_n,
                                     Eigen::OuterStride<>(1));
                    Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>> kmap(
                        kernel.data.data() + ci * s.kw, cout, s.kw,
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(cin * s.kw)));
                    out_s.noalias() += kmap * cols;
                }
            }
        }
        return y;
    }
    if (unit_stride && s.kh == H && s.kw == 1) {
        // full-height spatial filter: plain matrix product per sample
        for (std::size_t n = 0; n < N; ++n) {
            CMapRM<S> xin(x.data.data() + n * cin * H * W, cin * H, W);
            CMapRM<S> kmap(kernel.data.data(), cout, cin * H);
            MapRM<S> out(y.data.data() + n * cout * W, cout, W);
            out.noalias() += kmap * xin;
        }
        return y;
    }
    // generic path
    std::vector<S> cols;
    for (std::size_t n = 0; n < N; ++n) {
        im2col(x, n, s, oh_n, ow_n, cols);
        CMapRM<S> colmap(cols.data(), cin * s.kh * s.kw, oh_n * ow_n);
        CMapRM<S> kmap(kernel.data.data(), cout, cin * s.kh * s.kw);
        MapRM<S> out(y.data.data() + n * cout * oh_n * ow_n, cout, oh_n * ow_n);
        out.noalias() += kmap * colmap;
    }
    return y;
}

// Gradients of conv2d_forward. gx may be null when the input gradient is
// not needed (first layer of a network).
template <class S>
void conv2d_backward(const Tensor<S>& x, const Tensor<S>& kernel, const LayerSpec& s,
                     const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>& gk, Tensor<S>& gb) {
    using namespace detail;
    const auto out_shape = layer_output_shape(s, x.shape);
    if (gy.shape != out_shape) throw std::invalid_argument("conv2d backward: bad gradient shape");
    const std::size_t N = x.shape[0], cin = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t cout = s.out_channels, oh_n = out_shape[2], ow_n = out_shape[3];

    gk = Tensor<S>(kernel.shape);
    gb = Tensor<S>({cout});
    if (gx) *gx = Tensor<S>(x.shape);

    // bias gradient
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t co = 0; co < cout; ++co) {
            const S* src = gy.data.data() + (n * cout + co) * oh_n * ow_n;
            S acc = 0;
            for (std::size_t i = 0; i < oh_n * ow_n; ++i) acc += src[i];
            gb.data[co] += acc;
        }
    }

    const bool unit_stride = (s.sh == 1 && s.sw == 1);
    if (unit_stride && s.kh == 1) {
        MatRM<S> dcols(s.kw, ow_n);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t h = 0; h < H; ++h) {
                Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>> g(
                    gy.data.data() + n * cout * oh_n * ow_n + h * ow_n, cout, ow_n,
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(oh_n * ow_n)));
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    SlideMap<S> cols(x.data.data() + ((n * cin + ci) * H + h) * W, s.kw, ow_n,
                                     Eigen::OuterStride<>(1));
                    Eigen::Map<MatRM<S>, 0, Eigen::OuterStride<>> gkmap(
                        gk.data.data() + ci * s.kw, cout, s.kw,
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(cin * s.kw)));
                    gkmap.noalias() += g * cols.transpose();
                    if (gx) {
                        Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>> kmap(
                            kernel.data.data() + ci * s.kw, cout, s.kw,
                            Eigen::OuterStride<>(static_cast<Eigen::Index>(cin * s.kw)));
                        dcols.noalias() = kmap.transpose() * g;
                        S* dst = gx->data.data() + ((n * cin + ci) * H + h) * W;
                        for (std::size_t kw = 0; kw < s.kw; ++kw) {
                            const S* src = dcols.data() + kw * ow_n;
                            for (std::size_t ow = 0; ow < ow_n; ++ow) dst[kw + ow] += src[ow];
                        }
                    }
                }
            }
        }
        return;
    }
    if (unit_stride && s.kh == H && s.kw == 1) {
        CMapRM<S> kmap(kernel.data.data(), cout, cin * H);
        MapRM<S> gkmap(gk.data.data(), cout, cin * H);
        for (std::size_t n = 0; n < N; ++n) {
            CMapRM<S> xin(x.data.data() + n * cin * H * W, cin * H, W);
            CMapRM<S> g(gy.data.data() + n * cout * W, cout, W);
            gkmap.noalias() += g * xin.transpose();
            if (gx) {
                MapRM<S> gxin(gx->data.data() + n * cin * H * W, cin * H, W);
                gxin.noalias() += kmap.transpose() * g;
            }
        }
        return;
    }
    std::vector<S> cols, dcols;
    for (std::size_t n = 0; n < N; ++n) {
        im2col(x, n, s, oh_n, ow_n, cols);
        CMapRM<S> colmap(cols.data(), cin * s.kh * s.kw, oh_n * ow_n);
        CMapRM<S> g(gy.data.data() + n * cout * oh_n * ow_n, cout, oh_n * ow_n);
        MapRM<S> gkmap(gk.data.data(), cout, cin * s.kh * s.kw);
        gkmap.noalias() += g * colmap.transpose();
        if (gx) {
            dcols.resize(cols.size());
            MapRM<S> dcolmap(dcols.data(), cin * s.kh * s.kw, oh_n * ow_n);
            CMapRM<S> kmap(kernel.data.data(), cout, cin * s.kh * s.kw);
            dcolmap.noalias() = kmap.transpose() * g;
            col2im_add(dcols, n, s, oh_n, ow_n, *gx);
        }
    }
}

template <class S>
Tensor<S> avgpool2d_forward(const Tensor<S>& x, const LayerSpec& s) {
    const auto out_shape = layer_output_shape(s, x.shape);
    const std::size_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t oh_n = out_shape[2], ow_n = out_shape[3];
    Tensor<S> y(out_shape);
    const S inv = S(1) / static_cast<S>(s.kh * s.kw);
    for (std::size_t nc = 0; nc < N * C; ++nc) {
        const S* in = x.data.data() + nc * H * W;
        S* out = y.data.data() + nc * oh_n * ow_n;
        for (std::size_t oh = 0; oh < oh_n; ++oh) {
            for (std::size_t ow = 0; ow < ow_n; ++ow) {
                S acc = 0;
                for (std::size_t kh = 0; kh < s.kh; ++kh) {
                    const S* row = in + (oh * s.sh + kh) * W + ow * s.sw;
                    for (std::size_t kw = 0; kw < s.kw; ++kw) acc += row[kw];
                }
                out[oh * ow_n + ow] = acc * inv;
            }
        }
    }
    return y;
}

template <class S>
Tensor<S> avgpool2d_backward(const std::vector<std::size_t>& in_shape, const LayerSpec& s,
                             const Tensor<S>& gy) {
    const std::size_t N = in_shape[0], C = in_shape[1], H = in_shape[2], W = in_shape[3];
    const std::size_t oh_n = gy.shape[2], ow_n = gy.shape[3];
    Tensor<S> gx(in_shape);
    const S inv = S(1) / static_cast<S>(s.kh * s.kw);
    for (std::size_t nc = 0; nc < N * C; ++nc) {
        S* out = gx.data.data() + nc * H * W;
        const S* g = gy.data.data() + nc * oh_n * ow_n;
        for (std::size_t oh = 0; oh < oh_n; ++oh) {
            for (std::size_t ow = 0; ow < ow_n; ++ow) {
                const S v = g[oh * ow_n + ow] * inv;
                for (std::size_t kh = 0; kh < s.kh; ++kh) {
                    S* row = out + (oh * s.sh + kh) * W + ow * s.sw;
                    for (std::size_t kw = 0; kw < s.kw; ++kw) row[kw] += v;
                }
            }
        }
    }
    return gx;
}

// x > 0 ? x : alpha*(e^x - 1); saturates to -alpha for large negative x.
template <class S>
Tensor<S> elu_forward(const Tensor<S>& x, double alpha) {
    Tensor<S> y(x.shape);
    const S a = static_cast<S>(alpha);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const S v = x.data[i];
        y.data[i] = v > S(0) ? v : a * (std::exp(v) - S(1));
    }
    return y;
}

template <class S>
Tensor<S> elu_backward(const Tensor<S>& x, double alpha, const Tensor<S>& gy) {
    Tensor<S> gx(x.shape);
    const S a = static_cast<S>(alpha);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const S v = x.data[i];
        gx.data[i] = gy.data[i] * (v > S(0) ? S(1) : a * std::exp(v));
    }
    return gx;
}

template <class S>
Tensor<S> square_forward(const Tensor<S>& x) {
    Tensor<S> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = x.data[i] * x.data[i];
    return y;
}

template <class S>
Tensor<S> square_backward(const Tensor<S>& x, const Tensor<S>& gy) {
    Tensor<S> gx(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) gx.data[i] = S(2) * x.data[i] * gy.data[i];
    return gx;
}

// ln(max(x, floor)); gradient is 1/x above the clamp and 0 inside it.
template <class S>
Tensor<S> logact_forward(const Tensor<S>& x, double floor) {
    Tensor<S> y(x.shape);
    const S f = static_cast<S>(floor);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = std::log(std::max(x.data[i], f));
    return y;
}

template <class S>
Tensor<S> logact_backward(const Tensor<S>& x, double floor, const Tensor<S>& gy) {
    Tensor<S> gx(x.shape);
    const S f = static_cast<S>(floor);
    for (std::size_t i = 0; i < x.size(); ++i) {
        gx.data[i] = x.data[i] >= f ? gy.data[i] / x.data[i] : S(0);
    }
    return gx;
}

template <class S>
Tensor<S> dense_forward(const Tensor<S>& x, const Tensor<S>& weight, const Tensor<S>& bias,
                        const LayerSpec& s) {
    using namespace detail;
    const auto out_shape = layer_output_shape(s, x.shape);
    if (weight.shape != std::vector<std::size_t>{s.in_features, s.out_features}) {
        throw std::invalid_argument("dense: weight tensor does not match layer spec");
    }
    if (bias.shape != std::vector<std::size_t>{s.out_features}) {
        throw std::invalid_argument("dense: bias tensor does not match layer spec");
    }
    Tensor<S> y(out_shape);
    CMapRM<S> xm(x.data.data(), x.shape[0], x.shape[1]);
    CMapRM<S> wm(weight.data.data(), s.in_features, s.out_features);
    MapRM<S> ym(y.data.data(), out_shape[0], out_shape[1]);
    ym.noalias() = xm * wm;
    for (std::size_t n = 0; n < out_shape[0]; ++n) {
        for (std::size_t k = 0; k < s.out_features; ++k) y.data[n * s.out_features + k] += bias.data[k];
    }
    return y;
}

template <class S>
void dense_backward(const Tensor<S>& x, const Tensor<S>& weight, const LayerSpec& s,
                    const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>& gw, Tensor<S>& gb) {
    using namespace detail;
    gw = Tensor<S>(weight.shape);
    gb = Tensor<S>({s.out_features});
    CMapRM<S> xm(x.data.data(), x.shape[0], x.shape[1]);
    CMapRM<S> wm(weight.data.data(), s.in_features, s.out_features);
    CMapRM<S> gm(gy.data.data(), gy.shape[0], gy.shape[1]);
    MapRM<S> gwm(gw.data.data(), s.in_features, s.out_features);
    gwm.noalias() = xm.transpose() * gm;
    for (std::size_t n = 0; n < gy.shape[0]; ++n) {
        for (std::size_t k = 0; k < s.out_features; ++k) gb.data[k] += gy.data[n * s.out_features + k];
    }
    if (gx) {
        *gx = Tensor<S>(x.shape);
        MapRM<S> gxm(gx->data.data(), x.shape[0], x.shape[1]);
        gxm.noalias() = gm * wm.transpose();
    }
}

template <class S>
Tensor<S> flatten_forward(const Tensor<S>& x) {
    std::size_t f = 1;
    for (std::size_t i = 1; i < x.shape.size(); ++i) f *= x.shape[i];
    Tensor<S> y({x.shape[0], f}, x.data);
    return y;
}

// Row-stabilized softmax probabilities.
template <class S>
Tensor<S> softmax(const Tensor<S>& logits) {
    if (logits.shape.size() != 2) throw std::invalid_argument("softmax: expected [N,K] logits");
    const std::size_t N = logits.shape[0], K = logits.shape[1];
    Tensor<S> probs(logits.shape);
    for (std::size_t n = 0; n < N; ++n) {
        const S* row = logits.data.data() + n * K;
        S* out = probs.data.data() + n * K;
        S m = row[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, row[k]);
        S z = 0;
        for (std::size_t k = 0; k < K; ++k) {
            out[k] = std::exp(row[k] - m);
            z += out[k];
        }
        const S inv = S(1) / z;
        for (std::size_t k = 0; k < K; ++k) out[k] *= inv;
    }
    return probs;
}

// Mean cross-entropy over the batch plus the probabilities, computed with
// log-sum-exp stabilization.
template <class S>
std::pair<S, Tensor<S>> softmax_xent_forward(const Tensor<S>& logits,
                                             const std::vector<int>& labels) {
    const std::size_t N = logits.shape[0], K = logits.shape[1];
    if (labels.size() != N) throw std::invalid_argument("softmax_xent: one label per row required");
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= K) {
            throw std::invalid_argument("softmax_xent: label " + std::to_string(l) +
                                        " out of range [0," + std::to_string(K) + ")");
        }
    }
    Tensor<S> probs(logits.shape);
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const S* row = logits.data.data() + n * K;
        S* out = probs.data.data() + n * K;
        S m = row[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, row[k]);
        S z = 0;
        for (std::size_t k = 0; k < K; ++k) {
            out[k] = std::exp(row[k] - m);
            z += out[k];
        }
        const S inv = S(1) / z;
        for (std::size_t k = 0; k < K; ++k) out[k] *= inv;
        loss += -(static_cast<double>(row[labels[n]]) - static_cast<double>(m) -
                  std::log(static_cast<double>(z)));
    }
    return {static_cast<S>(loss / static_cast<double>(N)), probs};
}

// d(mean xent)/d(logits) = (probs - onehot) / N
template <class S>
Tensor<S> softmax_xent_backward(const Tensor<S>& probs, const std::vector<int>& labels) {
    const std::size_t N = probs.shape[0], K = probs.shape[1];
    Tensor<S> g(probs.shape, probs.data);
    const S inv = S(1) / static_cast<S>(N);
    for (std::size_t n = 0; n < N; ++n) {
        g.data[n * K + static_cast<std::size_t>(labels[n])] -= S(1);
        for (std::size_t k = 0; k < K; ++k) g.data[n * K + k] *= inv;
    }
    return g;
}

} // namespace midec::nn
