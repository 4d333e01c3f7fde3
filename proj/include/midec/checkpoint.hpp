#pragma once

#include "midec/train.hpp"

#include <string>

namespace midec::model {

// Single-blob checkpoint: magic line, one-line JSON header (version, kind,
// architecture, history, payload digest), then the parameters as raw
// little-endian float32. Round-trips are bit-exact.
std::string save_checkpoint(const TrainedNetwork& net);
TrainedNetwork load_checkpoint(const std::string& bytes);

// File wrappers (atomic write).
void write_checkpoint(const TrainedNetwork& net, const std::string& path);
TrainedNetwork read_checkpoint(const std::string& path);

} // namespace midec::model
