#include "midec/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace midec::dsp {

namespace {

using cplx = std::complex<double>;

constexpr double pi = std::numbers::pi;

// Section transfer function at z^-1 = e^-jw.
cplx section_response(const BiquadSection& s, const cplx& zinv) {
    const cplx zinv2 = zinv * zinv;
    return (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
}

// Real biquad from a conjugate (or real) pole pair in the z-plane, with the
// numerator (z-1)(z+1) common to every Butterworth band-pass section.
BiquadSection bandpass_section(const cplx& p1, const cplx& p2, double gain) {
    BiquadSection s;
    s.b0 = gain;
    s.b1 = 0.0;
    s.b2 = -gain;
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    return s;
}

} // namespace

std::complex<double> BiquadCascade::response(double freq_hz) const {
    const double w = 2.0 * pi * freq_hz / fs;
    const cplx zinv = std::exp(cplx(0.0, -w));
    cplx h(1.0, 0.0);
    for (const auto& s : sections) h *= section_response(s, zinv);
    return h;
}

bool BiquadCascade::stable() const {
    // Jury criterion for a real quadratic z^2 + a1 z + a2
    for (const auto& s : sections) {
        if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2)) return false;
    }
    return true;
}

BiquadCascade design_butterworth_bandpass(double low_hz, double high_hz, double fs, int order) {
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0)) {
        throw std::invalid_argument("butterworth design: band edges must satisfy 0 < low < high < fs/2");
    }
    if (order < 2 || order > 8 || order % 2 != 0) {
        throw std::invalid_argument("butterworth design: order must be one of {2,4,6,8}");
    }
    const int n_lp = order / 2;

    // frequency pre-warping so the bilinear transform lands the band edges
    const double fs2 = 2.0 * fs;
    const double wl = fs2 * std::tan(pi * low_hz / fs);
    const double wh = fs2 * std::tan(pi * high_hz / fs);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;

    // analog low-pass prototype poles on the unit circle, left half-plane
    std::vector<cplx> lp_poles;
    for (int k = 0; k < n_lp; ++k) {
        const double phi = pi / 2.0 + pi * (2.0 * k + 1.0) / (2.0 * n_lp);
        lp_poles.emplace_back(std::cos(phi), std::sin(phi));
    }

    // low-pass -> band-pass: each prototype pole maps to a pair
    std::vector<cplx> bp_poles;
    for (const auto& p : lp_poles) {
        const cplx a = p * (bw / 2.0);
        const cplx d = std::sqrt(a * a - w0 * w0);
        bp_poles.push_back(a + d);
        bp_poles.push_back(a - d);
    }

    // bilinear transform of the poles; zeros land at z=+1 (n_lp of them,
    // from s=0) and z=-1 (n_lp, from the infinite zeros)
    std::vector<cplx> z_poles;
    z_poles.reserve(bp_poles.size());
    cplx pole_prod(1.0, 0.0);
    for (const auto& s : bp_poles) {
        z_poles.push_back((fs2 + s) / (fs2 - s));
        pole_prod *= (fs2 - s);
    }
    const double k_total =
        std::pow(bw, n_lp) * std::pow(fs2, n_lp) / pole_prod.real();

    BiquadCascade c;
    c.fs = fs;
    c.description = "butterworth bandpass " + std::to_string(low_hz) + "-" +
                    std::to_string(high_hz) + " Hz order " + std::to_string(order);

    // Pair the digital poles into conjugate (or real) couples. The analog
    // construction emits, per prototype pole p, the images of p and then of
    // its conjugate partner, so matching by conjugate value is exact except
    // for the all-real case of a very wide band.
    std::vector<bool> used(z_poles.size(), false);
    std::vector<std::pair<cplx, cplx>> pairs;
    for (std::size_t i = 0; i < z_poles.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const cplx want = std::conj(z_poles[i]);
        std::size_t best = z_poles.size();
        double best_d = 0.0;
        for (std::size_t j = i + 1; j < z_poles.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(z_poles[j] - want);
            if (best == z_poles.size() || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        if (best == z_poles.size()) {
            throw std::logic_error("butterworth design: unpaired pole");
        }
        used[best] = true;
        pairs.emplace_back(z_poles[i], z_poles[best]);
    }

    // spread the overall gain evenly across sections for float headroom
    const double g =
        k_total >= 0.0 ? std::pow(k_total, 1.0 / static_cast<double>(pairs.size())) : 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double gi = g;
        if (k_total < 0.0) gi = (i == 0) ? k_total : 1.0; // negative gain: first section carries it
        c.sections.push_back(bandpass_section(pairs[i].first, pairs[i].second, gi));
    }
    if (!c.stable()) throw std::runtime_error("butterworth design: unstable cascade");
    return c;
}

BiquadCascade design_notch(double f0_hz, double q, double fs) {
    if (!(f0_hz > 0.0 && f0_hz < fs / 2.0)) {
        throw std::invalid_argument("notch design: f0 must lie in (0, fs/2)");
    }
    if (!(q > 0.0)) throw std::invalid_argument("notch design: q must be positive");
    const double w0 = 2.0 * pi * f0_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    BiquadSection s;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * c / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * c / a0;
    s.a2 = (1.0 - alpha) / a0;
    BiquadCascade cascade;
    cascade.fs = fs;
    cascade.description = "notch " + std::to_string(f0_hz) + " Hz q " + std::to_string(q);
    cascade.sections.push_back(s);
    if (!cascade.stable()) throw std::runtime_error("notch design: unstable section");
    return cascade;
}

std::vector<double> sosfilt(const BiquadCascade& cascade, const std::vector<double>& x,
                            std::vector<double>* zi) {
    const std::size_t ns = cascade.sections.size();
    std::vector<double> state;
    if (zi) {
        if (zi->size() != 2 * ns) throw std::invalid_argument("sosfilt: zi needs 2 values per section");
        state = *zi;
    } else {
        state.assign(2 * ns, 0.0);
    }
    std::vector<double> y = x;
    for (std::size_t k = 0; k < ns; ++k) {
        const auto& s = cascade.sections[k];
        double z1 = state[2 * k], z2 = state[2 * k + 1];
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
        state[2 * k] = z1;
        state[2 * k + 1] = z2;
    }
    if (zi) *zi = state;
    return y;
}

namespace {

// Steady-state direct-form-II-transposed state for unit constant input,
// section by section; the running scale tracks each section's DC gain.
std::vector<double> steady_state_zi(const BiquadCascade& c) {
    std::vector<double> zi(2 * c.sections.size());
    double scale = 1.0;
    for (std::size_t k = 0; k < c.sections.size(); ++k) {
        const auto& s = c.sections[k];
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        zi[2 * k] = scale * (dc - s.b0);
        zi[2 * k + 1] = scale * (s.b2 - s.a2 * dc);
        scale *= dc;
    }
    return zi;
}

std::vector<double> one_pass(const BiquadCascade& c, const std::vector<double>& x,
                             const std::vector<double>& zi_unit) {
    std::vector<double> zi(zi_unit.size());
    for (std::size_t i = 0; i < zi.size(); ++i) zi[i] = zi_unit[i] * x.front();
    return sosfilt(c, x, &zi);
}

} // namespace

std::vector<double> filtfilt(const BiquadCascade& cascade, const std::vector<double>& x) {
    const std::size_t ns = cascade.sections.size();
    const std::size_t padlen = 3 * (2 * ns + 1);
    if (x.size() <= padlen) {
        throw std::invalid_argument("filtfilt: signal length " + std::to_string(x.size()) +
                                    " too short for padding length " + std::to_string(padlen));
    }
    const std::size_t n = x.size();

    // odd reflection about both end samples
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[0] - x[padlen - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    const auto zi_unit = steady_state_zi(cascade);
    std::vector<double> y = one_pass(cascade, ext, zi_unit);
    std::reverse(y.begin(), y.end());
    y = one_pass(cascade, y, zi_unit);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(padlen),
                               y.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

std::vector<double> decimate(const std::vector<double>& x, int factor) {
    if (factor < 1) throw std::invalid_argument("decimate: factor must be >= 1");
    if (factor == 1) return x;
    std::vector<double> y;
    y.reserve((x.size() + factor - 1) / factor);
    for (std::size_t i = 0; i < x.size(); i += static_cast<std::size_t>(factor)) y.push_back(x[i]);
    return y;
}

void ContinuousRecording::validate() const {
    for (const auto& ch : samples) {
        if (ch.size() != n_samples()) throw std::invalid_argument("recording: ragged channels");
    }
    if (channel_names.size() != samples.size()) {
        throw std::invalid_argument("recording: channel name count mismatch");
    }
    std::set<std::string> uniq(channel_names.begin(), channel_names.end());
    if (uniq.size() != channel_names.size()) {
        throw std::invalid_argument("recording: duplicate channel names");
    }
    for (const auto& [idx, code] : events) {
        (void)code;
        if (idx >= n_samples()) throw std::invalid_argument("recording: event outside recording");
    }
}

ContinuousRecording preprocess(const ContinuousRecording& rec, const PreprocessParams& p) {
    rec.validate();
    const auto bp = design_butterworth_bandpass(p.bp_low, p.bp_high, rec.fs, p.bp_order);
    const auto nt = design_notch(p.notch_hz, p.notch_q, rec.fs);
    ContinuousRecording out;
    out.fs = rec.fs / p.decim;
    out.channel_names = rec.channel_names;
    out.samples.reserve(rec.n_channels());
    for (const auto& ch : rec.samples) {
        auto f = filtfilt(bp, ch);
        f = filtfilt(nt, f);
        out.samples.push_back(decimate(f, p.decim));
    }
    out.events.reserve(rec.events.size());
    for (const auto& [idx, code] : rec.events) {
        out.events.emplace_back(idx / static_cast<std::size_t>(p.decim), code);
    }
    return out;
}

EpochExtraction extract_epochs(const ContinuousRecording& rec, double offset_s, double length_s,
                               const std::map<int, int>& code_to_class,
                               const std::vector<std::string>& class_names) {
    rec.validate();
    const auto len = static_cast<std::size_t>(std::lround(length_s * rec.fs));
    if (len == 0) throw std::invalid_argument("extract_epochs: window length is zero samples");
    const auto offset = std::lround(offset_s * rec.fs);

    EpochExtraction out;
    auto& ds = out.data;
    ds.n_channels = rec.n_channels();
    ds.n_samples = len;
    ds.fs = rec.fs;
    ds.channel_names = rec.channel_names;
    ds.class_names = class_names;

    for (const auto& [ev_sample, code] : rec.events) {
        const auto it = code_to_class.find(code);
        if (it == code_to_class.end()) continue;
        if (it->second < 0 || static_cast<std::size_t>(it->second) >= class_names.size()) {
            throw std::invalid_argument("extract_epochs: class index outside class_names");
        }
        const auto start_signed = static_cast<std::ptrdiff_t>(ev_sample) + offset;
        if (start_signed < 0 ||
            static_cast<std::size_t>(start_signed) + len > rec.n_samples()) {
            ++out.rejected_events;
            continue;
        }
        const auto start = static_cast<std::size_t>(start_signed);
        const std::size_t e = ds.n_epochs();
        ds.data.resize(ds.data.size() + ds.n_channels * len);
        for (std::size_t c = 0; c < ds.n_channels; ++c) {
            const double* src = rec.samples[c].data() + start;
            double mean = 0.0;
            for (std::size_t t = 0; t < len; ++t) mean += src[t];
            mean /= static_cast<double>(len);
            float* dst = ds.data.data() + (e * ds.n_channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) dst[t] = static_cast<float>(src[t] - mean);
        }
        ds.labels.push_back(it->second);
        ds.trial_ids.push_back(static_cast<int>(e));
        ds.subject_ids.push_back(0);
    }
    return out;
}

std::vector<double> bandpower(const float* epoch, std::size_t n_channels, std::size_t n_samples,
                              double fs, double low_hz, double high_hz) {
    const auto bp = design_butterworth_bandpass(low_hz, high_hz, fs, 4);
    std::vector<double> powers(n_channels, 0.0);
    std::vector<double> ch(n_samples);
    for (std::size_t c = 0; c < n_channels; ++c) {
        for (std::size_t t = 0; t < n_samples; ++t) {
            ch[t] = static_cast<double>(epoch[c * n_samples + t]);
        }
        const auto f = filtfilt(bp, ch);
        double acc = 0.0;
        for (double v : f) acc += v * v;
        powers[c] = acc / static_cast<double>(n_samples);
    }
    return powers;
}

std::vector<double> bandpower(const std::vector<std::vector<double>>& epoch, double fs,
                              double low_hz, double high_hz) {
    const auto bp = design_butterworth_bandpass(low_hz, high_hz, fs, 4);
    std::vector<double> powers(epoch.size(), 0.0);
    for (std::size_t c = 0; c < epoch.size(); ++c) {
        const auto f = filtfilt(bp, epoch[c]);
        double acc = 0.0;
        for (double v : f) acc += v * v;
        powers[c] = acc / static_cast<double>(std::max<std::size_t>(epoch[c].size(), 1));
    }
    return powers;
}

} // namespace midec::dsp
