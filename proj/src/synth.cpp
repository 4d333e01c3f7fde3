#include "midec/synth.hpp"

#include "midec/fft.hpp"
#include "midec/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace midec::synth {

namespace {

// Per-trial RNG stream ids: sources draw from 0..1, per-channel pink noise
// from 100+c, per-channel sensor noise from 200+c, the MRCP jitter from 300.
// Keeping the streams apart means zeroing rhythm_scale reproduces the exact
// same noise — the matched pair used for noise-floor subtraction.
constexpr std::uint64_t kSourceStream = 0;
constexpr std::uint64_t kPinkStream = 100;
constexpr std::uint64_t kSensorStream = 200;
constexpr std::uint64_t kMrcpStream = 300;

constexpr double kEnvelopeDepth = 0.35; // slow AM: 1 + depth * mean of 3 sinusoids
constexpr double kBetaRelative = 0.5;   // beta rides at half the mu amplitude
constexpr double kErdRampSeconds = 0.5; // amplitude eases down at the end of the cue

// Scalp rhythms are narrowband stochastic processes, not pure tones: their
// phase decorrelates within a second or so. The instantaneous frequency
// wanders around the nominal value as an AR(1) with these correlation times
// and standard deviations (Hz). Without this, every trial is a template a
// classifier can memorize by phase.
constexpr double kMuCoherenceTau = 0.30;
constexpr double kBetaCoherenceTau = 0.20;
constexpr double kMuFreqWanderHz = 1.0;
constexpr double kBetaFreqWanderHz = 1.6;

// Movement-related cortical potential: motor tasks also produce a slow,
// cue-locked negative deflection over the engaged source areas, on top of
// the induced (phase-random) rhythm suppression. Its amplitude follows the
// class's ERD depths, so zeroing erd_depth removes every task signature; it
// does not scale with rhythm_scale, so matched noise-floor trials keep it
// and band-power floor subtraction cancels its leakage.
constexpr double kMrcpScale = 3.0;                 // peak deflection per unit ERD depth
constexpr double kMrcpRiseSeconds = 0.6;           // raised-cosine ramp to the plateau
constexpr double kMrcpAmpJitter = 0.25;            // per-trial amplitude sd (multiplicative)
constexpr double kMrcpLatencyJitterSeconds = 0.06; // per-trial onset sd

std::vector<double> make_pattern(std::initializer_list<std::pair<const char*, double>> weights) {
    const auto& montage = data::channel_montage();
    std::vector<double> p(montage.size(), 0.0);
    for (const auto& [name, w] : weights) {
        const auto it = std::find(montage.begin(), montage.end(), name);
        if (it == montage.end()) throw std::logic_error("make_pattern: unknown channel");
        p[static_cast<std::size_t>(it - montage.begin())] = w;
    }
    const double norm = std::sqrt(std::inner_product(p.begin(), p.end(), p.begin(), 0.0));
    for (double& v : p) v /= norm;
    return p;
}

} // namespace

GeneratorParams default_params() {
    GeneratorParams p;
    // Source 0: hand/arm area around C3 spreading to CP3/FC3. The C1 entry
    // (cross-bleed into source 1's peak) is kept moderate so the measured
    // ERD ratio at each peak channel stays close to (1 - depth)^2.
    p.source_patterns[0] = make_pattern({{"C3", 1.0},
                                         {"CP3", 0.7},
                                         {"FC3", 0.6},
                                         {"P3", 0.35},
                                         {"CP1", 0.3},
                                         {"C1", 0.25},
                                         {"FC1", 0.2},
                                         {"F3", 0.15},
                                         {"P1", 0.15},
                                         {"CPz", 0.1}});
    // Source 1: pre-motor/supplementary area around C1/FC1, overlapping
    // source 0 at C3/CP1/FC1 so the MI classes stay mutually confusable.
    p.source_patterns[1] = make_pattern({{"C1", 1.0},
                                         {"FC1", 0.75},
                                         {"Cz", 0.5},
                                         {"CP1", 0.45},
                                         {"C3", 0.25},
                                         {"CPz", 0.25},
                                         {"FC2", 0.2},
                                         {"P1", 0.2},
                                         {"F1", 0.15},
                                         {"C2", 0.1}});
    return p;
}

void GeneratorParams::validate() const {
    if (fs <= 0.0) throw std::invalid_argument("GeneratorParams: fs must be positive");
    if (n_channels != data::channel_montage().size())
        throw std::invalid_argument("GeneratorParams: n_channels must match the 24-channel montage");
    if (class_names.size() != erd_depth.size())
        throw std::invalid_argument("GeneratorParams: class count must match erd_depth rows");
    for (double d : erd_depth[0])
        if (d != 0.0) throw std::invalid_argument("GeneratorParams: rest class must have erd_depth 0");
    for (const auto& row : erd_depth)
        for (double d : row)
            if (d < 0.0 || d > 1.0)
                throw std::invalid_argument("GeneratorParams: erd_depth must lie in [0, 1]");
    for (const auto& pattern : source_patterns) {
        if (pattern.size() != n_channels)
            throw std::invalid_argument(
                "GeneratorParams: source pattern length must equal n_channels (call "
                "default_params() for the canonical patterns)");
        const double norm =
            std::sqrt(std::inner_product(pattern.begin(), pattern.end(), pattern.begin(), 0.0));
        if (std::abs(norm - 1.0) > 1e-6)
            throw std::invalid_argument("GeneratorParams: source patterns must have unit norm");
    }
    if (mu_freq <= 0.0 || beta_freq <= 0.0 || mu_freq >= fs / 2.0 || beta_freq >= fs / 2.0)
        throw std::invalid_argument("GeneratorParams: rhythm frequencies must lie in (0, fs/2)");
    if (rhythm_scale < 0.0 || pink_noise_scale < 0.0 || sensor_noise_scale < 0.0)
        throw std::invalid_argument("GeneratorParams: scales must be non-negative");
    if (rest_s <= 0.0 || cue_s <= 0.0 || imagery_s <= 0.0)
        throw std::invalid_argument("GeneratorParams: all trial segments need positive duration");
}

std::string params_to_json(const GeneratorParams& params, std::size_t n_per_class) {
    nlohmann::json j;
    j["generator"] = "synthetic motor-imagery EEG";
    j["fs"] = params.fs;
    j["n_channels"] = params.n_channels;
    j["class_names"] = params.class_names;
    j["mu_freq"] = params.mu_freq;
    j["beta_freq"] = params.beta_freq;
    j["erd_depth"] = params.erd_depth;
    j["rhythm_scale"] = params.rhythm_scale;
    j["pink_noise_scale"] = params.pink_noise_scale;
    j["sensor_noise_scale"] = params.sensor_noise_scale;
    j["trial_timing_s"] = {params.rest_s, params.cue_s, params.imagery_s};
    j["seed"] = params.seed;
    j["n_per_class"] = n_per_class;
    return j.dump();
}

GeneratorParams params_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("generator params: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("generator params: expected a JSON object");

    GeneratorParams p = default_params();
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "fs") {
                p.fs = value.get<double>();
            } else if (key == "mu_freq") {
                p.mu_freq = value.get<double>();
            } else if (key == "beta_freq") {
                p.beta_freq = value.get<double>();
            } else if (key == "rhythm_scale") {
                p.rhythm_scale = value.get<double>();
            } else if (key == "pink_noise_scale") {
                p.pink_noise_scale = value.get<double>();
            } else if (key == "sensor_noise_scale") {
                p.sensor_noise_scale = value.get<double>();
            } else if (key == "seed") {
                p.seed = value.get<std::uint64_t>();
            } else if (key == "erd_depth") {
                const auto rows = value.get<std::vector<std::vector<double>>>();
                if (rows.size() != p.erd_depth.size())
                    throw std::invalid_argument("expected " + std::to_string(p.erd_depth.size()) +
                                                " rows (one per class)");
                for (std::size_t c = 0; c < rows.size(); ++c) {
                    if (rows[c].size() != 2)
                        throw std::invalid_argument("row " + std::to_string(c) +
                                                    " must have 2 entries (one per source)");
                    p.erd_depth[c] = {rows[c][0], rows[c][1]};
                }
            } else if (key == "trial_timing_s") {
                const auto t = value.get<std::vector<double>>();
                if (t.size() != 3)
                    throw std::invalid_argument("expected [rest_s, cue_s, imagery_s]");
                p.rest_s = t[0];
                p.cue_s = t[1];
                p.imagery_s = t[2];
            } else if (key == "source_patterns") {
                const auto pats = value.get<std::vector<std::vector<double>>>();
                if (pats.size() != 2)
                    throw std::invalid_argument("expected exactly 2 patterns");
                p.source_patterns = {pats[0], pats[1]};
            } else if (key == "n_channels") {
                if (value.get<std::size_t>() != p.n_channels)
                    throw std::invalid_argument("the montage is fixed at " +
                                                std::to_string(p.n_channels) + " channels");
            } else if (key == "class_names") {
                if (value.get<std::vector<std::string>>() != p.class_names)
                    throw std::invalid_argument("the task set is fixed");
            } else if (key == "generator" || key == "n_per_class") {
                // provenance metadata emitted by params_to_json; harmless
            } else {
                throw std::invalid_argument("unknown key");
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("generator params: key `" + key + "`: " + e.what());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("generator params: key `" + key + "`: " + e.what());
        }
    }
    p.validate();
    return p;
}

std::vector<double> pink_noise(std::size_t n, std::uint64_t seed) {
    if (n < 256)
        throw std::invalid_argument("pink_noise: need at least 256 samples for spectral shaping");
    const std::size_t m = next_pow2(n);
    Rng rng(seed);

    // White Gaussian spectrum shaped by 1/sqrt(f) so power falls as 1/f;
    // bin 0 stays empty (zero mean by construction).
    std::vector<std::complex<double>> spec(m, {0.0, 0.0});
    for (std::size_t k = 1; k <= m / 2; ++k) {
        const double amp = 1.0 / std::sqrt(static_cast<double>(k));
        const double re = rng.normal() * amp;
        const double im = k == m / 2 ? 0.0 : rng.normal() * amp;
        spec[k] = {re, im};
        if (k != m / 2) spec[m - k] = std::conj(spec[k]);
    }
    fft(spec, true);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = spec[i].real();

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double& v : x) {
        v -= mean;
        var += v * v;
    }
    var /= static_cast<double>(n);
    const double inv_sd = 1.0 / std::sqrt(var);
    for (double& v : x) v *= inv_sd;
    return x;
}

dsp::ContinuousRecording generate_trial(int class_index, const GeneratorParams& params,
                                        std::uint64_t trial_seed) {
    params.validate();
    if (class_index < 0 || static_cast<std::size_t>(class_index) >= params.class_names.size())
        throw std::invalid_argument("generate_trial: invalid class index " +
                                    std::to_string(class_index));

    const auto t_total = static_cast<std::size_t>(std::llround(params.trial_seconds() * params.fs));
    const double dt = 1.0 / params.fs;
    const double cue_end_s = params.rest_s + params.cue_s;
    const double ramp_s = std::min(kErdRampSeconds, params.cue_s);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Each source: slow AM envelope over a mu+beta carrier, attenuated by
    // (1 - erd_depth) during imagery. The attenuation eases in over the last
    // half second of the cue, so the imagery window sees a constant level.
    std::array<std::vector<double>, 2> source(
        {std::vector<double>(t_total), std::vector<double>(t_total)});
    for (std::size_t i = 0; i < 2; ++i) {
        Rng rng(derive_seed(trial_seed, kSourceStream + i));
        std::array<double, 3> am_f, am_ph;
        for (double& f : am_f) f = rng.uniform(0.1, 0.4);
        for (double& ph : am_ph) ph = rng.uniform(0.0, two_pi);
        double mu_ph = rng.uniform(0.0, two_pi);
        double beta_ph = rng.uniform(0.0, two_pi);
        const double depth = params.erd_depth[static_cast<std::size_t>(class_index)][i];

        // AR(1) frequency wander gives the carriers a finite coherence time.
        double ou_mu = rng.normal(), ou_beta = rng.normal();
        const double rho_mu = std::exp(-dt / kMuCoherenceTau);
        const double rho_beta = std::exp(-dt / kBetaCoherenceTau);
        const double kick_mu = std::sqrt(1.0 - rho_mu * rho_mu);
        const double kick_beta = std::sqrt(1.0 - rho_beta * rho_beta);

        for (std::size_t t = 0; t < t_total; ++t) {
            const double ts = static_cast<double>(t) * dt;
            double env = 0.0;
            for (std::size_t a = 0; a < 3; ++a) env += std::sin(two_pi * am_f[a] * ts + am_ph[a]);
            env = 1.0 + kEnvelopeDepth * env / 3.0;

            double amp = 1.0;
            if (ts >= cue_end_s) {
                amp = 1.0 - depth;
            } else if (ts >= cue_end_s - ramp_s) {
                const double u = (ts - (cue_end_s - ramp_s)) / ramp_s; // 0 -> 1 across the ramp
                amp = 1.0 - depth * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
            }

            const double carrier = std::sin(mu_ph) + kBetaRelative * std::sin(beta_ph);
            source[i][t] = params.rhythm_scale * amp * env * carrier;

            mu_ph += two_pi * (params.mu_freq + kMuFreqWanderHz * ou_mu) * dt;
            beta_ph += two_pi * (params.beta_freq + kBetaFreqWanderHz * ou_beta) * dt;
            ou_mu = rho_mu * ou_mu + kick_mu * rng.normal();
            ou_beta = rho_beta * ou_beta + kick_beta * rng.normal();
        }
    }

    // Cue-locked MRCP: eases down to a sustained negative plateau shortly
    // after the cue ends. One latency/amplitude draw per trial — it is a
    // single motor command, so both sources deflect together.
    {
        Rng mrcp_rng(derive_seed(trial_seed, kMrcpStream));
        const double amp_jitter = std::max(0.3, 1.0 + kMrcpAmpJitter * mrcp_rng.normal());
        const double onset_s = cue_end_s + kMrcpLatencyJitterSeconds * mrcp_rng.normal();
        for (std::size_t i = 0; i < 2; ++i) {
            const double depth = params.erd_depth[static_cast<std::size_t>(class_index)][i];
            if (depth == 0.0) continue;
            const double peak = -kMrcpScale * depth * amp_jitter;
            for (std::size_t t = 0; t < t_total; ++t) {
                const double ts = static_cast<double>(t) * dt;
                if (ts < onset_s) continue;
                const double u = (ts - onset_s) / kMrcpRiseSeconds;
                source[i][t] +=
                    u < 1.0 ? peak * 0.5 * (1.0 - std::cos(std::numbers::pi * u)) : peak;
            }
        }
    }

    dsp::ContinuousRecording rec;
    rec.fs = params.fs;
    rec.channel_names = data::channel_montage();
    rec.samples.resize(params.n_channels);
    for (std::size_t c = 0; c < params.n_channels; ++c) {
        std::vector<double>& ch = rec.samples[c];
        ch.resize(t_total);
        const std::vector<double> pink =
            pink_noise(t_total, derive_seed(trial_seed, kPinkStream + c));
        Rng sensor(derive_seed(trial_seed, kSensorStream + c));
        const double p0 = params.source_patterns[0][c];
        const double p1 = params.source_patterns[1][c];
        for (std::size_t t = 0; t < t_total; ++t)
            ch[t] = p0 * source[0][t] + p1 * source[1][t] + params.pink_noise_scale * pink[t] +
                    params.sensor_noise_scale * sensor.normal();
    }

    rec.events = {{0, kRestOnsetCode},
                  {static_cast<std::size_t>(std::llround(cue_end_s * params.fs)), class_index}};
    rec.validate();
    return rec;
}

EpochedDataset generate_dataset(std::size_t n_per_class, const GeneratorParams& params,
                                std::uint64_t seed) {
    params.validate();
    if (n_per_class < 1) throw std::invalid_argument("generate_dataset: n_per_class must be >= 1");
    if (params.class_names.size() < 2)
        throw std::invalid_argument("generate_dataset: need rest plus at least one MI class");

    const std::size_t n_mi_classes = params.class_names.size() - 1;
    const std::size_t n_trials = n_mi_classes * n_per_class;

    std::map<int, int> code_to_class = {{kRestOnsetCode, 0}};
    for (std::size_t k = 1; k <= n_mi_classes; ++k)
        code_to_class[static_cast<int>(k)] = static_cast<int>(k);

    // Every kept epoch comes from its own recording: trials 0..n_trials-1
    // contribute only their imagery window, and n_per_class extra trials
    // contribute only their rest window. Reusing both windows of one trial
    // would let a classifier link them through the shared background
    // activity instead of the class contrast.
    EpochedDataset out;

    auto cut_trial = [&](std::size_t trial, int class_index, int want_label,
                         std::vector<float>* epoch_out, int* label_out) {
        const dsp::ContinuousRecording raw =
            generate_trial(class_index, params, derive_seed(seed, trial));
        const dsp::ContinuousRecording pre = dsp::preprocess(raw);
        const dsp::EpochExtraction ext =
            dsp::extract_epochs(pre, 0.0, 3.0, code_to_class, params.class_names);
        if (ext.data.n_epochs() != 2 || ext.rejected_events != 0)
            throw std::runtime_error("generate_dataset: trial " + std::to_string(trial) +
                                     " did not yield exactly one rest and one imagery epoch");
        if (out.n_channels == 0) {
            out.n_channels = ext.data.n_channels;
            out.n_samples = ext.data.n_samples;
            out.fs = ext.data.fs;
            out.channel_names = ext.data.channel_names;
            out.class_names = params.class_names;
        }
        const std::size_t epoch_sz = ext.data.n_channels * ext.data.n_samples;
        for (std::size_t e = 0; e < 2; ++e) {
            const bool is_rest = ext.data.labels[e] == 0;
            if ((want_label == 0) != is_rest) continue;
            const float* src = ext.data.epoch(e);
            epoch_out->assign(src, src + epoch_sz);
            *label_out = ext.data.labels[e];
        }
    };

    std::vector<float> epoch;
    int label = 0;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        // One rest epoch (from a dedicated trial) ahead of each class cycle.
        if (trial % n_mi_classes == 0) {
            const std::size_t rest_trial = n_trials + trial / n_mi_classes;
            const int rest_host_class = static_cast<int>(1 + (trial / n_mi_classes) % n_mi_classes);
            cut_trial(rest_trial, rest_host_class, 0, &epoch, &label);
            out.data.insert(out.data.end(), epoch.begin(), epoch.end());
            out.labels.push_back(0);
            out.trial_ids.push_back(static_cast<int>(rest_trial));
            out.subject_ids.push_back(0);
        }
        const int class_index = static_cast<int>(1 + trial / n_per_class);
        cut_trial(trial, class_index, class_index, &epoch, &label);
        out.data.insert(out.data.end(), epoch.begin(), epoch.end());
        out.labels.push_back(label);
        out.trial_ids.push_back(static_cast<int>(trial));
        out.subject_ids.push_back(0);
    }

    out.provenance = params_to_json(params, n_per_class) + " master_seed=" + std::to_string(seed);
    out.validate();
    return out;
}

} // namespace midec::synth
