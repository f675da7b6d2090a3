// Run configuration: device parameters plus run keys, loaded from flat JSON.
#pragma once

#include <cstdint>
#include <string>

#include "ionnode/devmodel.hpp"

namespace ionnode::cli {

struct RunConfig {
  dev::DeviceParams device;
  std::string experiment;
  std::int64_t shots = 0;   // 0: the experiment's own default
  std::int64_t trials = 0;  // 0: the experiment's own default
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  unsigned workers = 1;
};

/// Parses a JSON object. Every DeviceParams field is a key of the same name
/// in SI units (seconds, 1/s, phonons); `correlators_cp` is [XX, YY, ZZ].
/// Run keys: experiment, shots, trials, master_seed, output_dir, workers.
/// Unknown keys and type errors throw ContractError naming the key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Snapshot of every key, suitable for provenance records.
std::string config_to_json(const RunConfig& cfg);

}  // namespace ionnode::cli
