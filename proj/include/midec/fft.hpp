#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace midec {

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse);

std::size_t next_pow2(std::size_t n);

// Averaged-periodogram (Welch) power spectral density with a Hann window
// and 50% overlap. Returns (frequency, power) pairs for bins 1..seg/2.
struct Psd {
    std::vector<double> freq;
    std::vector<double> power;
};
Psd welch_psd(const std::vector<double>& x, double fs, std::size_t segment);

// Least-squares slope of log10(power) against log10(freq) restricted to
// [f_lo, f_hi].
double loglog_slope(const Psd& psd, double f_lo, double f_hi);

} // namespace midec
