#include "midec/dataset.hpp"

#include "midec/bytes.hpp"
#include "midec/digest.hpp"
#include "midec/textio.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace midec {

void EpochedDataset::validate() const {
    const std::size_t n = labels.size();
    if (trial_ids.size() != n || subject_ids.size() != n) {
        throw std::invalid_argument("dataset: per-epoch id vectors disagree with label count");
    }
    if (data.size() != n * n_channels * n_samples) {
        throw std::invalid_argument("dataset: data block holds " +
                                    std::to_string(epoch_count_from_data()) +
                                    " epochs but manifest lists " + std::to_string(n));
    }
    if (channel_names.size() != n_channels) {
        throw std::invalid_argument("dataset: channel name count mismatch");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= class_names.size()) {
            throw std::invalid_argument("dataset: class index outside class_names");
        }
    }
}

namespace data {

const std::vector<std::string>& channel_montage() {
    static const std::vector<std::string> names{
        "F3",  "F1",  "Fz",  "F2",  "F4",  "FC3", "FC1", "FC2", "FC4", "C3",  "C1",  "Cz",
        "C2",  "C4",  "CP3", "CP1", "CPz", "CP2", "CP4", "P3",  "P1",  "Pz",  "P2",  "P4"};
    return names;
}

EpochedDataset select_channels(const EpochedDataset& ds, const std::vector<std::string>& names) {
    ds.validate();
    std::vector<std::size_t> index;
    std::vector<std::string> missing;
    for (const auto& name : names) {
        const auto it = std::find(ds.channel_names.begin(), ds.channel_names.end(), name);
        if (it == ds.channel_names.end()) {
            missing.push_back(name);
        } else {
            index.push_back(static_cast<std::size_t>(it - ds.channel_names.begin()));
        }
    }
    if (!missing.empty()) {
        std::string msg = "select_channels: missing channels:";
        for (const auto& m : missing) msg += " " + m;
        throw std::invalid_argument(msg);
    }
    EpochedDataset out;
    out.n_channels = names.size();
    out.n_samples = ds.n_samples;
    out.fs = ds.fs;
    out.labels = ds.labels;
    out.trial_ids = ds.trial_ids;
    out.subject_ids = ds.subject_ids;
    out.channel_names = names;
    out.class_names = ds.class_names;
    out.provenance = ds.provenance;
    out.data.resize(ds.n_epochs() * out.n_channels * out.n_samples);
    for (std::size_t e = 0; e < ds.n_epochs(); ++e) {
        for (std::size_t c = 0; c < index.size(); ++c) {
            const float* src = ds.channel(e, index[c]);
            std::copy(src, src + ds.n_samples, out.data.data() + (e * out.n_channels + c) * out.n_samples);
        }
    }
    return out;
}

namespace {

static_assert(sizeof(float) == 4, "container format requires 32-bit float");

constexpr int kFormatVersion = 1;

} // namespace

void write_dataset(const EpochedDataset& ds, const std::string& stem) {
    ds.validate();
    const std::string block = floats_to_le_bytes(ds.data);
    const std::uint64_t digest = crc64(block.data(), block.size());

    nlohmann::json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["fs"] = ds.fs;
    manifest["n_channels"] = ds.n_channels;
    manifest["epoch_len"] = ds.n_samples;
    manifest["channel_names"] = ds.channel_names;
    manifest["class_names"] = ds.class_names;
    manifest["provenance"] = ds.provenance;
    manifest["data_digest_crc64"] = to_hex_u64(digest);
    nlohmann::json epochs = nlohmann::json::array();
    const std::size_t epoch_bytes = ds.n_channels * ds.n_samples * 4;
    for (std::size_t e = 0; e < ds.n_epochs(); ++e) {
        epochs.push_back({{"file_offset", e * epoch_bytes},
                          {"class_index", ds.labels[e]},
                          {"trial_id", ds.trial_ids[e]},
                          {"subject_id", ds.subject_ids[e]}});
    }
    manifest["epochs"] = std::move(epochs);

    write_file_atomic(stem + ".f32", block);
    write_file_atomic(stem + ".json", manifest.dump(2) + "\n");
}

EpochedDataset read_dataset(const std::string& stem) {
    const std::string manifest_path = stem + ".json";
    const std::string block_path = stem + ".f32";
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_dataset: bad manifest " + manifest_path + ": " + e.what());
    }
    const int version = manifest.at("format_version").get<int>();
    if (version != kFormatVersion) {
        throw std::runtime_error("read_dataset: format version mismatch in " + manifest_path +
                                 " (file " + std::to_string(version) + ", reader " +
                                 std::to_string(kFormatVersion) + ")");
    }

    EpochedDataset ds;
    ds.fs = manifest.at("fs").get<double>();
    ds.n_channels = manifest.at("n_channels").get<std::size_t>();
    ds.n_samples = manifest.at("epoch_len").get<std::size_t>();
    ds.channel_names = manifest.at("channel_names").get<std::vector<std::string>>();
    ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    ds.provenance = manifest.value("provenance", std::string());

    const std::string block = read_file(block_path);
    const std::uint64_t expect = parse_hex_u64(manifest.at("data_digest_crc64").get<std::string>());
    const std::uint64_t got = crc64(block.data(), block.size());
    if (expect != got) {
        throw std::runtime_error("read_dataset: digest mismatch for data block " + block_path +
                                 " (manifest " + to_hex_u64(expect) + ", computed " +
                                 to_hex_u64(got) + ")");
    }

    const auto& epochs = manifest.at("epochs");
    const std::size_t epoch_bytes = ds.n_channels * ds.n_samples * 4;
    if (epochs.size() * epoch_bytes != block.size()) {
        throw std::runtime_error("read_dataset: manifest lists " + std::to_string(epochs.size()) +
                                 " epochs but " + block_path + " holds " +
                                 std::to_string(epoch_bytes ? block.size() / epoch_bytes : 0) +
                                 " (truncated or inconsistent)");
    }
    ds.data = le_bytes_to_floats(block);
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto& row = epochs[e];
        if (row.at("file_offset").get<std::size_t>() != e * epoch_bytes) {
            throw std::runtime_error("read_dataset: unexpected epoch offset in " + manifest_path);
        }
        ds.labels.push_back(row.at("class_index").get<int>());
        ds.trial_ids.push_back(row.at("trial_id").get<int>());
        ds.subject_ids.push_back(row.at("subject_id").get<int>());
    }
    ds.validate();
    return ds;
}

namespace {

struct CsvEpoch {
    std::vector<std::string> channels;
    std::vector<float> data; // [channel][sample]
    std::size_t n_samples = 0;
};

CsvEpoch parse_epoch_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("import_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("import_csv: empty file " + path);
    CsvEpoch ep;
    ep.channels = split_csv_line(line);
    if (ep.channels.empty()) throw std::runtime_error("import_csv: no header columns in " + path);
    const std::size_t nc = ep.channels.size();
    std::vector<std::vector<float>> columns(nc);
    std::size_t row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != nc) {
            throw std::runtime_error("import_csv: " + path + " row " + std::to_string(row) +
                                     " has " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(nc));
        }
        for (std::size_t c = 0; c < nc; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw std::runtime_error("import_csv: non-numeric cell in " + path + " at row " +
                                         std::to_string(row) + ", column " + std::to_string(c + 1) +
                                         " (" + ep.channels[c] + ")");
            }
            columns[c].push_back(static_cast<float>(v));
        }
    }
    ep.n_samples = columns.empty() ? 0 : columns[0].size();
    if (ep.n_samples == 0) throw std::runtime_error("import_csv: no sample rows in " + path);
    ep.data.reserve(nc * ep.n_samples);
    for (const auto& col : columns) ep.data.insert(ep.data.end(), col.begin(), col.end());
    return ep;
}

} // namespace

EpochedDataset import_csv(const std::string& dir_path, double fs,
                          const std::map<std::string, int>& class_map,
                          const std::vector<std::string>& class_names, std::string* warning) {
    namespace fs_ns = std::filesystem;
    const fs_ns::path dir(dir_path);
    const fs_ns::path index_path = dir / "index.csv";
    if (!fs_ns::exists(index_path)) {
        throw std::runtime_error("import_csv: missing sidecar " + index_path.string());
    }

    std::ifstream idx(index_path);
    std::string line;
    std::vector<std::pair<std::string, int>> entries;
    std::size_t row = 0;
    while (std::getline(idx, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) {
            throw std::runtime_error("import_csv: index.csv row " + std::to_string(row) +
                                     " must be `filename,label`");
        }
        if (row == 1 && cells[0] == "filename") continue; // optional header
        const auto it = class_map.find(cells[1]);
        if (it == class_map.end()) {
            throw std::runtime_error("import_csv: unknown label `" + cells[1] +
                                     "` in index.csv row " + std::to_string(row));
        }
        entries.emplace_back(cells[0], it->second);
    }
    if (entries.empty()) throw std::runtime_error("import_csv: index.csv lists no epochs");

    EpochedDataset ds;
    ds.fs = fs;
    ds.class_names = class_names;
    ds.provenance = "imported from " + dir_path;

    for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto ep = parse_epoch_csv((dir / entries[e].first).string());
        if (e == 0) {
            ds.channel_names = ep.channels;
            ds.n_channels = ep.channels.size();
            ds.n_samples = ep.n_samples;
        } else {
            if (ep.channels != ds.channel_names) {
                throw std::runtime_error("import_csv: " + entries[e].first +
                                         " channel header differs from " + entries[0].first);
            }
            if (ep.n_samples != ds.n_samples) {
                throw std::runtime_error("import_csv: " + entries[e].first + " has " +
                                         std::to_string(ep.n_samples) + " samples, expected " +
                                         std::to_string(ds.n_samples));
            }
        }
        ds.data.insert(ds.data.end(), ep.data.begin(), ep.data.end());
        ds.labels.push_back(entries[e].second);
        ds.trial_ids.push_back(static_cast<int>(e));
        ds.subject_ids.push_back(0);
    }

    // reorder to the canonical montage when the channel set matches exactly
    const auto& montage = channel_montage();
    const std::set<std::string> have(ds.channel_names.begin(), ds.channel_names.end());
    const std::set<std::string> want(montage.begin(), montage.end());
    if (have == want && ds.channel_names.size() == montage.size()) {
        ds = select_channels(ds, montage);
        ds.provenance = "imported from " + dir_path;
    } else if (warning) {
        *warning = "channel set does not match the 24-channel montage (" +
                   std::to_string(ds.n_channels) + " channels); keeping file order";
    }
    ds.validate();
    return ds;
}

} // namespace data
} // namespace midec
