#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace midec {

// Labeled fixed-length multichannel epochs. Data is stored contiguously as
// float32, epoch-major then channel-major then time, matching the on-disk
// container layout.
struct EpochedDataset {
    std::size_t n_channels = 0;
    std::size_t n_samples = 0;
    double fs = 0.0;
    std::vector<float> data;    // [n_epochs][n_channels][n_samples]
    std::vector<int> labels;    // class index per epoch
    std::vector<int> trial_ids; // per epoch
    std::vector<int> subject_ids;
    std::vector<std::string> channel_names;
    std::vector<std::string> class_names;
    std::string provenance; // free-form note carried into the manifest

    std::size_t n_epochs() const { return labels.size(); }
    std::size_t epoch_count_from_data() const {
        const std::size_t per = n_channels * n_samples;
        return per == 0 ? 0 : data.size() / per;
    }
    float* epoch(std::size_t e) { return data.data() + e * n_channels * n_samples; }
    const float* epoch(std::size_t e) const { return data.data() + e * n_channels * n_samples; }
    float* channel(std::size_t e, std::size_t c) { return epoch(e) + c * n_samples; }
    const float* channel(std::size_t e, std::size_t c) const { return epoch(e) + c * n_samples; }

    // Throws when the bookkeeping vectors disagree with the data block.
    void validate() const;
};

namespace data {

// The canonical 24-channel evaluation montage (sensorimotor strip).
const std::vector<std::string>& channel_montage();

// Subset and reorder dataset channels; every requested name must exist.
EpochedDataset select_channels(const EpochedDataset& ds, const std::vector<std::string>& names);

// Container IO: <stem>.json manifest + <stem>.f32 little-endian float block
// whose digest is stored in the manifest and verified on read.
void write_dataset(const EpochedDataset& ds, const std::string& stem);
EpochedDataset read_dataset(const std::string& stem);

// Directory of per-epoch CSVs (header = channel names, rows = samples) plus
// an index.csv sidecar mapping filename to class label.
EpochedDataset import_csv(const std::string& dir_path, double fs,
                          const std::map<std::string, int>& class_map,
                          const std::vector<std::string>& class_names,
                          std::string* warning = nullptr);

} // namespace data
} // namespace midec
