#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftspe/harness.hpp"

namespace ftspe {

// FNV-1a 64-bit hash; used for the parameter digest in log headers.
[[nodiscard]] std::uint64_t fnv1a64(const void* data, std::size_t len);
[[nodiscard]] std::uint64_t fnv1a64(const std::string& data);

// 16-hex-digit digest of every estimator parameter in canonical text form, so
// two logs carry the same digest iff they were produced with identical
// estimator settings.
[[nodiscard]] std::string gains_digest(const EstimatorConfigs& est);

// One '#' metadata line (seed, dt, gains digest, RNG algorithm), a column
// header, then one row per (step, estimator):
//   t,estimator,phi,chi_norm,wx,wy,wz,vx,vy,vz,V
// Floats carry 17 significant digits; V is nan for estimators that do not
// define one. Byte-stable across runs for identical inputs.
void write_scenario_csv(const ScenarioLog& log, const EstimatorConfigs& est,
                        const std::string& path);

struct SummaryRow {
  std::uint64_t seed = 0;
  std::string estimator;
  EstimatorMetrics m;
};

// Per-seed RMS / settling-time table plus per-estimator means.
[[nodiscard]] std::string format_summary_table(const std::vector<SummaryRow>& rows);
// Per-seed wall-clock table plus per-estimator means.
[[nodiscard]] std::string format_walltime_table(const std::vector<SummaryRow>& rows);

// Self-contained SVG line plots (phi, chi_norm, velocity-error norms vs t),
// one polyline per estimator, written as <stem>_phi.svg etc. under dir.
// Plot emission never feeds back into the CSV logs.
void write_svg_plots(const ScenarioLog& log, const std::string& dir, const std::string& stem);

void ensure_directory(const std::string& dir);

}  // namespace ftspe
