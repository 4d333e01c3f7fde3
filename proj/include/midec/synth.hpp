#pragma once

#include "midec/dataset.hpp"
#include "midec/dsp.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace midec::synth {

// Event codes stamped into generated recordings.
inline constexpr int kRestOnsetCode = 100;  // relaxation window start (t = 0)
// Imagery onset carries the class index itself (1..3 for the MI classes,
// 0 for an explicit rest trial).

// Two fixed cortical sources projected onto the 24-channel montage; per-class
// ERD depths control how strongly each source desynchronizes during imagery.
struct GeneratorParams {
    double fs = 1000.0; // generation rate; the pipeline decimates to 250 Hz
    std::size_t n_channels = 24;
    std::vector<std::string> class_names = {"rest", "elbow_extension", "grasp", "twist"};
    double mu_freq = 10.0;
    double beta_freq = 20.0;
    // erd_depth[class][source]: fraction of rhythm amplitude removed during
    // imagery. Row 0 is rest and must stay zero.
    std::array<std::array<double, 2>, 4> erd_depth = {{{0.0, 0.0},
                                                       {0.6, 0.0},
                                                       {0.0, 0.6},
                                                       {0.35, 0.35}}};
    // Unit-norm spatial mixing vectors (filled by default_params()).
    std::array<std::vector<double>, 2> source_patterns;
    double rhythm_scale = 1.5;
    double pink_noise_scale = 1.0;
    double sensor_noise_scale = 0.3;
    double rest_s = 3.0, cue_s = 3.0, imagery_s = 4.0;
    std::uint64_t seed = 1;

    double trial_seconds() const { return rest_s + cue_s + imagery_s; }
    void validate() const;
};

// Defaults with the canonical source patterns installed: source 0 peaks at C3
// (spreading to CP3/FC3), source 1 at C1 (spreading to FC1/Cz).
GeneratorParams default_params();

// Provenance string: the parameter set serialized as compact JSON.
std::string params_to_json(const GeneratorParams& params, std::size_t n_per_class);

// Parse a JSON object of overrides on top of default_params(). Recognized
// keys: fs, mu_freq, beta_freq, erd_depth (4x2), rhythm_scale,
// pink_noise_scale, sensor_noise_scale, trial_timing_s ([rest, cue,
// imagery]), seed, source_patterns (2 x n_channels). Unknown keys are an
// error so typos cannot silently fall back to defaults.
GeneratorParams params_from_json(const std::string& text);

// 1/f-shaped noise via spectral shaping of a white Gaussian spectrum,
// normalized to zero mean and unit variance. Deterministic per seed.
std::vector<double> pink_noise(std::size_t n, std::uint64_t seed);

// One 10-second trial at params.fs with events at the rest onset (code 100)
// and the imagery onset (code = class index). Pure in (params, trial_seed).
dsp::ContinuousRecording generate_trial(int class_index, const GeneratorParams& params,
                                        std::uint64_t trial_seed);

// n_per_class trials for each MI class, run through the full preprocessing
// chain (bandpass 1-60 Hz, 60 Hz notch, decimate to 250 Hz) and cut into
// 3-second epochs. Rest epochs come from the relaxation windows, subsampled
// to n_per_class for balance: 4 * n_per_class epochs total.
EpochedDataset generate_dataset(std::size_t n_per_class, const GeneratorParams& params,
                                std::uint64_t seed);

} // namespace midec::synth
