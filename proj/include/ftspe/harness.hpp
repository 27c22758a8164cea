#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ftspe/baselines.hpp"
#include "ftspe/observer.hpp"
#include "ftspe/velocity_filter.hpp"

namespace ftspe {

// Ground-truth motion: initial pose plus a body-twist profile, integrated
// exactly on the group.
struct TrajectorySpec {
  Mat3 R0 = Mat3::Identity();
  Vec3 b0 = Vec3::Zero();

  enum class Profile { Constant, Sinusoidal };
  Profile profile = Profile::Constant;
  Twist xi0{Vec3(0.0, 0.15, 0.0), Vec3(0.65, 0.0, 0.1)};
  Twist amplitude{Vec3::Zero(), Vec3::Zero()};  // sinusoidal only
  double frequency_hz = 0.0;                    // sinusoidal only

  double dt = 0.1;
  double T = 30.0;

  [[nodiscard]] long num_steps() const;  // N; the trajectory has N+1 samples
  [[nodiscard]] Twist xi_at(double t) const;
  void validate() const;  // throws ConfigError
};

struct NoiseSpec {
  double gyro_std = 0.0;      // rad/s
  double transvel_std = 0.0;  // m/s
  PointNoise point_noise{};
  std::uint64_t seed = 1;
};

struct TruthSample {
  Pose g;
  Twist xi;
  double t = 0.0;
};

[[nodiscard]] std::vector<TruthSample> generate_truth(const TrajectorySpec& spec);

// One epoch of the shared measurement stream. The pair columns and the point
// mean are precomputed once so every estimator consumes identical data.
struct MeasurementEpoch {
  FeatureFrame frame;
  Eigen::Matrix3Xd E_m;
  Vec3 a_bar = Vec3::Zero();
  Twist xi_m;
  double t = 0.0;
};

struct MeasurementStream {
  std::vector<MeasurementEpoch> epochs;
  std::uint64_t seed = 0;
};

// RNG draw order per epoch: one 3-vector per feature point (when point noise
// is enabled), then the gyro noise vector (when gyro_std > 0), then the
// translational-velocity noise vector (when transvel_std > 0).
[[nodiscard]] MeasurementStream synthesize_stream(const std::vector<TruthSample>& truth,
                                                  const FeaturePointSet& points,
                                                  const NoiseSpec& noise);

struct EstimatorSelection {
  bool fts = true;
  bool vpe = false;
  bool dqmekf = false;
};

struct InitialEstimates {
  Pose g_hat0{exp_so3(0.9 * kPi * Vec3::UnitX()), Vec3(1.5, 1.0, 1.0)};
  Twist xi_hat0{Vec3(-0.67, -0.25, -0.09), Vec3(0.76, -2.63, 2.83)};
};

struct EstimatorConfigs {
  ObserverGains fts_gains{};
  VpeParams vpe_params{};
  DqMekfParams dq_params{};
  InitialEstimates init{};
  Vec3 K_diag = Vec3(3.0, 2.0, 1.0);

  // When set, the FTS observer consumes the finite-time filter's outputs
  // (filtered point mean and reconstructed twist) instead of the raw measured
  // twist; the translational-velocity channel of the stream is then unused.
  bool use_velocity_filter = false;
  FtsFilterParams filter_params{};
};

struct StepRecord {
  double t = 0.0;
  double phi = 0.0;       // principal angle of the attitude error, rad
  double chi_norm = 0.0;  // position error norm, m
  Vec3 omega_err = Vec3::Zero();    // error-frame angular velocity error
  Vec3 upsilon_err = Vec3::Zero();  // error-frame translational velocity error
  double V = std::numeric_limits<double>::quiet_NaN();  // FTS only
  Pose g_hat;
  Twist xi_hat;
};

struct EstimatorRun {
  std::string name;  // "fts", "vpe", "dqmekf"
  std::vector<StepRecord> records;
  double wall_time = 0.0;  // seconds over the estimation loop only
};

struct ScenarioLog {
  std::vector<TruthSample> truth;
  std::vector<EstimatorRun> runs;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string rng_algorithm;
};

// Runs every selected estimator over one shared measurement stream. Wall time
// covers each estimator's own stepping loop (including any estimator-specific
// per-epoch work such as filtering or the SVD pose fix) but not stream
// synthesis or error logging. Estimator exceptions are rethrown with the
// estimator name and step index attached.
[[nodiscard]] ScenarioLog run_scenario(const std::vector<TruthSample>& truth,
                                       const FeaturePointSet& points, const NoiseSpec& noise,
                                       const EstimatorSelection& sel, const EstimatorConfigs& cfg);

struct EstimatorMetrics {
  double rms_phi = 0.0;
  double rms_chi = 0.0;
  double wall_time = 0.0;
  // First time after which the error stays below tolerance; +inf if never.
  double settle_phi = std::numeric_limits<double>::infinity();
  double settle_chi = std::numeric_limits<double>::infinity();
};

[[nodiscard]] EstimatorMetrics metrics(const EstimatorRun& run, double phi_tol = 1e-2,
                                       double chi_tol = 1e-2);

[[nodiscard]] double settle_time(const std::vector<StepRecord>& records, bool use_phi, double tol);

}  // namespace ftspe
