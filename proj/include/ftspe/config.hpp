#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftspe/harness.hpp"

namespace ftspe {

// Full description of one simulation/estimation run: trajectory, noise,
// estimator gains, initial estimates, seeds, and output options. Built either
// from a named preset or from a flat key=value config file (or a preset with
// file overrides on top).
struct RunConfig {
  std::string preset;  // originating preset name, empty for explicit configs

  TrajectorySpec traj{};
  NoiseSpec noise{};
  std::vector<std::uint64_t> seeds{1};
  EstimatorSelection estimators{};
  EstimatorConfigs est{};

  std::string feature_file;  // empty -> built-in feature set
  std::string out_dir = "out";
  bool plot = true;

  void validate() const;                           // throws ConfigError
  [[nodiscard]] FeaturePointSet features() const;  // loads feature_file or the default set
};

[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] RunConfig preset_config(const std::string& name);  // throws ConfigError

// Parses flat sectioned key=value text. Scalars accept plain decimals,
// rationals ("13/11"), and pi-multiples ("0.9pi", "pi"). Unknown sections or
// keys fail with the offending line number. A `preset` key applies that
// preset first; remaining keys override it.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& origin);
[[nodiscard]] RunConfig load_config(const std::string& path);

// Canonical emission: fixed section/key order, every field printed with 17
// significant digits. load(emit(cfg)) reproduces cfg exactly, so
// emit(load(emit(...))) is byte-stable.
[[nodiscard]] std::string emit_config(const RunConfig& cfg);
void write_config(const RunConfig& cfg, const std::string& path);

// Scalar literal parser used by the config reader (exposed for tests).
[[nodiscard]] double parse_scalar(const std::string& token);

}  // namespace ftspe
