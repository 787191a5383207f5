#pragma once

// Plain-text experiment files: sectioned key=value lines mirroring
// TrainConfig. parse(serialize(c)) == c for every valid config; unknown keys
// and sections are rejected.

#include <cstdint>
#include <string>

#include "fgssl/trainer.hpp"

namespace fgssl {

std::string serialize_experiment(const TrainConfig& cfg);
TrainConfig parse_experiment(const std::string& text);
TrainConfig parse_experiment_file(const std::string& path);

// Stable fingerprint of the serialized form, stored in checkpoints.
uint64_t config_hash(const TrainConfig& cfg);

}  // namespace fgssl
