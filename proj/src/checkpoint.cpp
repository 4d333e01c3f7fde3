#include "midec/checkpoint.hpp"

#include "midec/bytes.hpp"
#include "midec/digest.hpp"
#include "midec/textio.hpp"

#include "json.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace midec::model {

namespace {

constexpr const char* kMagic = "MIDECKPT\n";
constexpr int kCheckpointVersion = 1;

nlohmann::json arch_to_json(const ArchitectureConfig& a) {
    return {{"n_channels", a.n_channels},
            {"epoch_len", a.epoch_len},
            {"fs", a.fs},
            {"n_classes", a.n_classes},
            {"f1_temporal_filters", a.f1_temporal_filters},
            {"temporal_kernel", a.temporal_kernel},
            {"f2_refine_filters", a.f2_refine_filters},
            {"refine_kernel", a.refine_kernel},
            {"pool1_kernel", a.pool1_kernel},
            {"pool1_stride", a.pool1_stride},
            {"pool2_kernel", a.pool2_kernel},
            {"pool2_stride", a.pool2_stride}};
}

ArchitectureConfig arch_from_json(const nlohmann::json& j) {
    ArchitectureConfig a;
    a.n_channels = j.at("n_channels").get<std::size_t>();
    a.epoch_len = j.at("epoch_len").get<std::size_t>();
    a.fs = j.at("fs").get<double>();
    a.n_classes = j.at("n_classes").get<std::size_t>();
    a.f1_temporal_filters = j.at("f1_temporal_filters").get<std::size_t>();
    a.temporal_kernel = j.at("temporal_kernel").get<std::size_t>();
    a.f2_refine_filters = j.at("f2_refine_filters").get<std::size_t>();
    a.refine_kernel = j.at("refine_kernel").get<std::size_t>();
    a.pool1_kernel = j.at("pool1_kernel").get<std::size_t>();
    a.pool1_stride = j.at("pool1_stride").get<std::size_t>();
    a.pool2_kernel = j.at("pool2_kernel").get<std::size_t>();
    a.pool2_stride = j.at("pool2_stride").get<std::size_t>();
    return a;
}

} // namespace

std::string save_checkpoint(const TrainedNetwork& net) {
    std::vector<float> params;
    params.reserve(net.net.num_params());
    for (std::size_t i = 0; i < net.net.specs().size(); ++i) {
        const auto& w = net.net.weights()[i];
        const auto& b = net.net.biases()[i];
        params.insert(params.end(), w.data.begin(), w.data.end());
        params.insert(params.end(), b.data.begin(), b.data.end());
    }
    const std::string payload = floats_to_le_bytes(params);

    nlohmann::json header;
    header["format_version"] = kCheckpointVersion;
    header["kind"] = to_string(net.kind);
    header["architecture"] = arch_to_json(net.arch);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : net.history) hist.push_back({h.loss, h.accuracy});
    header["history"] = std::move(hist);
    header["n_params"] = params.size();
    header["payload_digest_crc64"] = to_hex_u64(crc64(payload.data(), payload.size()));

    return std::string(kMagic) + header.dump() + "\n" + payload;
}

TrainedNetwork load_checkpoint(const std::string& bytes) {
    const std::string magic(kMagic);
    if (bytes.size() < magic.size() || bytes.compare(0, magic.size(), magic) != 0)
        throw std::runtime_error("checkpoint: bad magic (not a checkpoint blob)");
    const std::size_t header_end = bytes.find('\n', magic.size());
    if (header_end == std::string::npos)
        throw std::runtime_error("checkpoint: truncated before the header ended");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(magic.size(), header_end - magic.size()));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: malformed header JSON: ") + e.what());
    }

    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: version mismatch: file has " +
                                 std::to_string(version) + ", reader expects " +
                                 std::to_string(kCheckpointVersion));

    const std::string payload = bytes.substr(header_end + 1);
    if (to_hex_u64(crc64(payload.data(), payload.size())) !=
        header.at("payload_digest_crc64").get<std::string>())
        throw std::runtime_error("checkpoint: digest mismatch (file corrupt or truncated)");

    const std::vector<float> params = le_bytes_to_floats(payload);
    if (params.size() != header.at("n_params").get<std::size_t>())
        throw std::runtime_error("checkpoint: payload holds " + std::to_string(params.size()) +
                                 " parameters but the header declares " +
                                 std::to_string(header.at("n_params").get<std::size_t>()));

    TrainedNetwork net(model_kind_from_string(header.at("kind").get<std::string>()),
                       arch_from_json(header.at("architecture")));
    net.net.alloc_params();
    if (params.size() != net.net.num_params())
        throw std::runtime_error(
            "checkpoint: incompatible architecture: payload holds " +
            std::to_string(params.size()) + " parameters but the declared architecture needs " +
            std::to_string(net.net.num_params()));

    std::size_t at = 0;
    for (std::size_t i = 0; i < net.net.specs().size(); ++i) {
        auto& w = net.net.weights()[i];
        auto& b = net.net.biases()[i];
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), w.data.size(),
                    w.data.begin());
        at += w.data.size();
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), b.data.size(),
                    b.data.begin());
        at += b.data.size();
    }

    for (const auto& h : header.at("history")) {
        if (!h.is_array() || h.size() != 2)
            throw std::runtime_error("checkpoint: malformed history entry");
        net.history.push_back({h[0].get<double>(), h[1].get<double>()});
    }
    return net;
}

void write_checkpoint(const TrainedNetwork& net, const std::string& path) {
    write_file_atomic(path, save_checkpoint(net));
}

TrainedNetwork read_checkpoint(const std::string& path) {
    try {
        return load_checkpoint(read_file(path));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace midec::model
