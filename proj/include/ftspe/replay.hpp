#pragma once

#include <string>
#include <vector>

#include "ftspe/harness.hpp"

namespace ftspe {

// One recorded epoch: gyro sample plus the body-frame positions of the
// tracked points. No translational velocity and no ground truth — replay
// reconstructs the former and never sees the latter.
struct ReplayRecord {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();
  std::vector<Vec3> points;
};

// CSV with a header row and columns t,gx,gy,gz,p1x,p1y,p1z,... Throws
// ConfigError naming the offending line for malformed rows, non-increasing
// timestamps, or a point count that changes mid-file.
[[nodiscard]] std::vector<ReplayRecord> load_replay_csv(const std::string& path);
void write_replay_csv(const std::vector<ReplayRecord>& records, const std::string& path);

// Strips a synthesized measurement stream down to the replay channels (time,
// measured gyro, measured points). The translational-velocity channel is
// dropped on purpose: replay must reconstruct it from the point tracks.
[[nodiscard]] std::vector<ReplayRecord> export_replay(const MeasurementStream& stream);

struct ReplayResult {
  std::vector<double> t;
  std::vector<Pose> g_hat;
  std::vector<Twist> xi_hat;
};

// Offline estimation over recorded data. The first record defines the
// landmark set (the inertial frame coincides with the body frame at record
// 0), the finite-time filters smooth the gyro and each point track, the
// filtered twist is reconstructed from them, and the observer runs over the
// stream. Requires a uniform sample rate (relative jitter <= 1e-6) and at
// least two records.
[[nodiscard]] ReplayResult run_replay(const std::vector<ReplayRecord>& records,
                                      const EstimatorConfigs& cfg);

// t, estimated rotation (row-major), position, angular and translational
// velocity estimates. 17 significant digits; no truth columns.
void write_estimate_csv(const ReplayResult& result, const std::string& path);

}  // namespace ftspe
