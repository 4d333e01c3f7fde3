#include "midec/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace midec {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("fft: size must be a power of two");
    }
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = x[i + k];
                const std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= inv;
    }
}

Psd welch_psd(const std::vector<double>& x, double fs, std::size_t segment) {
    if (segment == 0 || (segment & (segment - 1)) != 0) {
        throw std::invalid_argument("welch_psd: segment must be a power of two");
    }
    if (x.size() < segment) throw std::invalid_argument("welch_psd: signal shorter than segment");
    const double pi = 3.14159265358979323846264338327950288;
    std::vector<double> window(segment);
    double wss = 0.0;
    for (std::size_t i = 0; i < segment; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(segment)));
        wss += window[i] * window[i];
    }
    const std::size_t hop = segment / 2;
    const std::size_t nseg = (x.size() - segment) / hop + 1;
    std::vector<double> acc(segment / 2, 0.0);
    std::vector<std::complex<double>> buf(segment);
    for (std::size_t s = 0; s < nseg; ++s) {
        for (std::size_t i = 0; i < segment; ++i) {
            buf[i] = std::complex<double>(x[s * hop + i] * window[i], 0.0);
        }
        fft(buf, false);
        for (std::size_t k = 1; k <= segment / 2; ++k) {
            acc[k - 1] += std::norm(buf[k]);
        }
    }
    Psd psd;
    psd.freq.resize(segment / 2);
    psd.power.resize(segment / 2);
    const double scale = 1.0 / (static_cast<double>(nseg) * wss * fs);
    for (std::size_t k = 1; k <= segment / 2; ++k) {
        psd.freq[k - 1] = fs * static_cast<double>(k) / static_cast<double>(segment);
        psd.power[k - 1] = acc[k - 1] * scale;
    }
    return psd;
}

double loglog_slope(const Psd& psd, double f_lo, double f_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < psd.freq.size(); ++i) {
        const double f = psd.freq[i];
        if (f < f_lo || f > f_hi || psd.power[i] <= 0.0) continue;
        const double lx = std::log10(f);
        const double ly = std::log10(psd.power[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("loglog_slope: not enough bins in band");
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

} // namespace midec
