#pragma once

#include "midec/dataset.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace midec::dsp {

struct BiquadSection {
    double b0, b1, b2; // numerator
    double a1, a2;     // denominator, a0 normalized to 1
};

// Cascade of second-order sections plus the sampling rate it was designed
// for. All designs verify pole stability before returning.
struct BiquadCascade {
    std::vector<BiquadSection> sections;
    double fs = 0.0;
    std::string description;

    std::complex<double> response(double freq_hz) const;
    double gain(double freq_hz) const { return std::abs(response(freq_hz)); }
    bool stable() const;
};

// Digital Butterworth band-pass of the given total order (pole count):
// analog prototype of order/2 poles, LP->BP transform, bilinear transform
// with frequency pre-warping. order must be one of {2,4,6,8}.
BiquadCascade design_butterworth_bandpass(double low_hz, double high_hz, double fs, int order);

// Single-biquad notch at f0 with quality factor q (RBJ cookbook form):
// exact null at f0, unit gain at DC and Nyquist.
BiquadCascade design_notch(double f0_hz, double q, double fs);

// Single forward pass through the cascade (direct form II transposed).
// zi, when given, holds two state values per section and is updated.
std::vector<double> sosfilt(const BiquadCascade& cascade, const std::vector<double>& x,
                            std::vector<double>* zi = nullptr);

// Zero-phase two-pass filtering with odd-reflection padding of length
// 3*(2*n_sections+1) and steady-state initial conditions on each pass.
std::vector<double> filtfilt(const BiquadCascade& cascade, const std::vector<double>& x);

// Keep every factor-th sample starting at index 0. The caller must have
// band-limited the signal below fs/(2*factor) beforehand.
std::vector<double> decimate(const std::vector<double>& x, int factor);

// Channels-by-time continuous multichannel signal with event markers.
struct ContinuousRecording {
    std::vector<std::vector<double>> samples; // [channel][time]
    double fs = 0.0;
    std::vector<std::string> channel_names;
    std::vector<std::pair<std::size_t, int>> events; // (sample index, code)

    std::size_t n_channels() const { return samples.size(); }
    std::size_t n_samples() const { return samples.empty() ? 0 : samples[0].size(); }
    void validate() const;
};

// The fixed conditioning chain: band-pass -> notch -> decimate, with event
// indices rescaled to the new rate.
struct PreprocessParams {
    double bp_low = 1.0;
    double bp_high = 60.0;
    int bp_order = 4;
    double notch_hz = 60.0;
    double notch_q = 30.0;
    int decim = 4;
};
ContinuousRecording preprocess(const ContinuousRecording& rec, const PreprocessParams& p = {});

// Cut one epoch per event whose code appears in code_to_class, subtracting
// the per-channel mean of each epoch. Events whose window leaves the
// recording are counted in rejected_events rather than silently dropped.
struct EpochExtraction {
    EpochedDataset data;
    std::size_t rejected_events = 0;
};
EpochExtraction extract_epochs(const ContinuousRecording& rec, double offset_s, double length_s,
                               const std::map<int, int>& code_to_class,
                               const std::vector<std::string>& class_names);

// Mean squared amplitude per channel after an order-4 Butterworth band-pass
// applied with filtfilt.
std::vector<double> bandpower(const float* epoch, std::size_t n_channels, std::size_t n_samples,
                              double fs, double low_hz, double high_hz);
std::vector<double> bandpower(const std::vector<std::vector<double>>& epoch, double fs,
                              double low_hz, double high_hz);

} // namespace midec::dsp
