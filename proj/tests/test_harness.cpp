#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "ftspe/errors.hpp"
#include "ftspe/harness.hpp"
#include "test_support.hpp"

using namespace ftspe;
using test_support::random_rotation;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Pose truth_start(const TrajectorySpec& spec) { return Pose{spec.R0, spec.b0}; }

// Configs initialized at the exact true state, so any drift is the harness's.
EstimatorConfigs truth_init_configs(const TrajectorySpec& spec) {
  EstimatorConfigs cfg;
  cfg.init.g_hat0 = truth_start(spec);
  cfg.init.xi_hat0 = spec.xi0;
  return cfg;
}

EstimatorSelection select(bool fts, bool vpe, bool dqmekf) {
  EstimatorSelection sel;
  sel.fts = fts;
  sel.vpe = vpe;
  sel.dqmekf = dqmekf;
  return sel;
}

// Softer corrector gains for cases that need a forgiving feedback loop rather
// than the aggressive defaults.
ObserverGains mild_gains() {
  ObserverGains gains;
  gains.k_p = 2.0;
  gains.k_omega = 1.5;
  gains.k_upsilon = 1.2;
  gains.alpha1 = 1.0;
  gains.alpha2 = 0.8;
  return gains;
}

std::uint64_t mix(std::uint64_t h, double d) {
  h ^= std::bit_cast<std::uint64_t>(d);
  h *= 0x100000001b3ULL;
  return h;
}

// Order-sensitive digest over every numeric field of a run's records.
// Wall time is deliberately excluded: it is the one non-deterministic field.
std::uint64_t run_digest(const EstimatorRun& run) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const StepRecord& r : run.records) {
    h = mix(h, r.t);
    h = mix(h, r.phi);
    h = mix(h, r.chi_norm);
    h = mix(h, r.V);
    for (int i = 0; i < 3; ++i) {
      h = mix(h, r.omega_err(i));
      h = mix(h, r.upsilon_err(i));
      h = mix(h, r.g_hat.p(i));
      h = mix(h, r.xi_hat.angular(i));
      h = mix(h, r.xi_hat.linear(i));
      for (int j = 0; j < 3; ++j) h = mix(h, r.g_hat.R(i, j));
    }
  }
  return h;
}

NoiseSpec tumbling_noise(std::uint64_t seed) {
  NoiseSpec noise;
  noise.gyro_std = 0.16;
  noise.transvel_std = 0.02;
  noise.point_noise.dist = PointNoise::Dist::Gaussian;
  noise.point_noise.std_dev = 0.01;
  noise.seed = seed;
  return noise;
}

StepRecord record_at(double t, double phi, double chi) {
  StepRecord rec;
  rec.t = t;
  rec.phi = phi;
  rec.chi_norm = chi;
  return rec;
}

}  // namespace

TEST_CASE("harness: truth generation follows the constant-screw flow") {
  SplitMix64 rng(61);
  TrajectorySpec spec;
  spec.R0 = random_rotation(rng);
  spec.b0 = Vec3(0.4, -1.3, 2.2);

  REQUIRE(spec.num_steps() == 300);
  const auto truth = generate_truth(spec);
  REQUIRE(truth.size() == 301);

  // Initial sample is the initial condition, bit for bit.
  CHECK((truth[0].g.R - spec.R0).norm() == 0.0);
  CHECK((truth[0].g.p - spec.b0).norm() == 0.0);
  CHECK(truth[0].t == 0.0);

  // Time stamps sit on the uniform grid.
  for (std::size_t k = 0; k < truth.size(); ++k) {
    CHECK(truth[k].t == static_cast<double>(k) * spec.dt);
    CHECK((truth[k].xi.stacked() - spec.xi0.stacked()).norm() == 0.0);
  }

  // A constant twist integrates to a one-parameter screw: the step-by-step
  // composition must match the closed-form exponential at any sample.
  for (long k : {1L, 7L, 50L, 150L, 300L}) {
    const Pose expected = compose(truth_start(spec), exp_se3(spec.xi0, static_cast<double>(k) * spec.dt));
    CAPTURE(k);
    CHECK((truth[static_cast<std::size_t>(k)].g.R - expected.R).norm() <= 1e-9);
    CHECK((truth[static_cast<std::size_t>(k)].g.p - expected.p).norm() <= 1e-9);
  }

  // Composition does not drift off the group.
  for (const TruthSample& s : truth) {
    CHECK((s.g.R.transpose() * s.g.R - Mat3::Identity()).norm() <= 1e-12);
    CHECK(s.g.R.determinant() > 0.9);
  }
}

TEST_CASE("harness: stationary and sinusoidal twist profiles") {
  SplitMix64 rng(62);

  TrajectorySpec still;
  still.R0 = random_rotation(rng);
  still.b0 = Vec3(1.0, 2.0, 3.0);
  still.xi0 = Twist{Vec3::Zero(), Vec3::Zero()};
  for (const TruthSample& s : generate_truth(still)) {
    CHECK((s.g.R - still.R0).norm() == 0.0);
    CHECK((s.g.p - still.b0).norm() == 0.0);
  }

  TrajectorySpec wavy;
  wavy.profile = TrajectorySpec::Profile::Sinusoidal;
  wavy.amplitude = Twist{Vec3(0.05, 0.0, -0.02), Vec3(0.2, 0.1, 0.0)};
  wavy.frequency_hz = 0.25;
  for (double t : {0.0, 0.3, 1.7, 12.4}) {
    const Twist xi = wavy.xi_at(t);
    const double s = std::sin(2.0 * kPi * wavy.frequency_hz * t);
    CHECK((xi.angular - (wavy.xi0.angular + s * wavy.amplitude.angular)).norm() == 0.0);
    CHECK((xi.linear - (wavy.xi0.linear + s * wavy.amplitude.linear)).norm() == 0.0);
  }
  const auto truth = generate_truth(wavy);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const Twist xi = wavy.xi_at(truth[k].t);
    CHECK((truth[k].xi.stacked() - xi.stacked()).norm() == 0.0);
  }
  // The constant profile ignores amplitude and frequency.
  TrajectorySpec flat = wavy;
  flat.profile = TrajectorySpec::Profile::Constant;
  CHECK((flat.xi_at(1.7).stacked() - flat.xi0.stacked()).norm() == 0.0);

  // Step count rounds to the nearest grid point.
  TrajectorySpec odd;
  odd.dt = 0.0702;
  odd.T = 30.82;
  CHECK(odd.num_steps() == 439);
}

TEST_CASE("harness: trajectory validation rejects bad specs") {
  TrajectorySpec spec;

  spec.dt = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.dt = -0.1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = TrajectorySpec{};
  spec.T = 0.05;  // shorter than one step
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = TrajectorySpec{};
  spec.R0(0, 0) = 2.0;
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = TrajectorySpec{};
  spec.profile = TrajectorySpec::Profile::Sinusoidal;
  spec.frequency_hz = -1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  CHECK_THROWS_AS((void)generate_truth(spec), ConfigError);
  spec = TrajectorySpec{};
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("harness: noise-free streams pass the measurements through exactly") {
  SplitMix64 rng(63);
  TrajectorySpec spec;
  spec.R0 = random_rotation(rng);
  spec.b0 = Vec3(-0.3, 0.8, 1.1);
  spec.T = 3.0;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();

  const MeasurementStream stream = synthesize_stream(truth, points, NoiseSpec{});
  REQUIRE(stream.epochs.size() == truth.size());
  CHECK(stream.seed == NoiseSpec{}.seed);

  SplitMix64 unused(NoiseSpec{}.seed);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const MeasurementEpoch& e = stream.epochs[k];
    CHECK(e.t == truth[k].t);
    CHECK((e.xi_m.stacked() - truth[k].xi.stacked()).norm() == 0.0);

    // Body-frame unit directions of the true pose, bit for bit.
    const FeatureFrame exact = synthesize_frame(truth[k].g, points, PointNoise{}, unused, truth[k].t);
    REQUIRE(e.frame.a.size() == exact.a.size());
    for (std::size_t i = 0; i < exact.a.size(); ++i) {
      CHECK((e.frame.a[i] - exact.a[i]).norm() == 0.0);
    }
    CHECK((e.E_m - pair_columns(e.frame.a)).norm() == 0.0);

    Vec3 mean = Vec3::Zero();
    for (const Vec3& a : e.frame.a) mean += a;
    mean /= static_cast<double>(e.frame.a.size());
    CHECK((e.a_bar - mean).norm() == 0.0);
  }
}

TEST_CASE("harness: noisy stream draws points, then gyro, then linear rate") {
  TrajectorySpec spec;
  spec.T = 2.0;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();
  const NoiseSpec noise = tumbling_noise(97);

  const MeasurementStream stream = synthesize_stream(truth, points, noise);

  // Replaying the documented draw order with a fresh generator must reproduce
  // the stream exactly; any reorder or extra draw would desynchronize it.
  SplitMix64 rng(noise.seed);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const FeatureFrame frame = synthesize_frame(truth[k].g, points, noise.point_noise, rng, truth[k].t);
    const Vec3 gyro = rng.gaussian_vec3(noise.gyro_std);
    const Vec3 vel = rng.gaussian_vec3(noise.transvel_std);

    const MeasurementEpoch& e = stream.epochs[k];
    REQUIRE(e.frame.a.size() == frame.a.size());
    for (std::size_t i = 0; i < frame.a.size(); ++i) {
      CHECK((e.frame.a[i] - frame.a[i]).norm() == 0.0);
    }
    CHECK((e.xi_m.angular - (truth[k].xi.angular + gyro)).norm() == 0.0);
    CHECK((e.xi_m.linear - (truth[k].xi.linear + vel)).norm() == 0.0);
  }
}

TEST_CASE("harness: stream synthesis is seed-deterministic") {
  TrajectorySpec spec;
  spec.T = 2.0;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();

  const MeasurementStream a = synthesize_stream(truth, points, tumbling_noise(11));
  const MeasurementStream b = synthesize_stream(truth, points, tumbling_noise(11));
  const MeasurementStream c = synthesize_stream(truth, points, tumbling_noise(12));

  REQUIRE(a.epochs.size() == b.epochs.size());
  double same = 0.0;
  double other = 0.0;
  for (std::size_t k = 0; k < a.epochs.size(); ++k) {
    same = std::max(same, (a.epochs[k].E_m - b.epochs[k].E_m).norm());
    same = std::max(same, (a.epochs[k].xi_m.stacked() - b.epochs[k].xi_m.stacked()).norm());
    other = std::max(other, (a.epochs[k].xi_m.stacked() - c.epochs[k].xi_m.stacked()).norm());
  }
  CHECK(same == 0.0);
  CHECK(other > 1e-6);
}

TEST_CASE("harness: estimators initialized at the true state stay on it") {
  // A rate small enough that every discrete update is well inside its
  // stability region; drift here would mean the harness wires the stream,
  // geometry, or estimator states incorrectly.
  TrajectorySpec spec;
  spec.dt = 1e-3;
  spec.T = 2.0;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();
  const EstimatorConfigs cfg = truth_init_configs(spec);

  const ScenarioLog log = run_scenario(truth, points, NoiseSpec{}, select(true, true, true), cfg);

  CHECK(log.seed == NoiseSpec{}.seed);
  CHECK(log.dt == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(log.rng_algorithm == SplitMix64::kAlgorithm);
  REQUIRE(log.truth.size() == truth.size());
  REQUIRE(log.runs.size() == 3);
  CHECK(log.runs[0].name == "fts");
  CHECK(log.runs[1].name == "vpe");
  CHECK(log.runs[2].name == "dqmekf");

  for (const EstimatorRun& run : log.runs) {
    REQUIRE(run.records.size() == truth.size());
    CHECK(run.wall_time >= 0.0);
    CHECK(run.wall_time < 60.0);
    double max_phi = 0.0;
    double max_chi = 0.0;
    for (std::size_t k = 0; k < run.records.size(); ++k) {
      CHECK(run.records[k].t == truth[k].t);
      max_phi = std::max(max_phi, run.records[k].phi);
      max_chi = std::max(max_chi, run.records[k].chi_norm);
      if (run.name == "fts") {
        CHECK(std::isfinite(run.records[k].V));
        CHECK(run.records[k].V >= 0.0);
      } else {
        CHECK(std::isnan(run.records[k].V));
      }
    }
    CAPTURE(run.name);
    CHECK(max_phi <= 1e-8);
    // The Kalman baseline hunts at the level of its propagation discretization;
    // the two geometric estimators are exactly invariant up to roundoff.
    CHECK(max_chi <= (run.name == "dqmekf" ? 1e-4 : 1e-10));
  }
}

TEST_CASE("harness: logged error fields recompute from the logged estimates") {
  TrajectorySpec spec;
  spec.dt = 1e-3;
  spec.T = 0.5;
  const auto truth = generate_truth(spec);
  const EstimatorConfigs cfg = truth_init_configs(spec);

  const ScenarioLog log = run_scenario(truth, default_feature_set(), tumbling_noise(5),
                                       select(true, true, true), cfg);
  for (const EstimatorRun& run : log.runs) {
    for (std::size_t k = 0; k < run.records.size(); ++k) {
      const StepRecord& rec = run.records[k];
      CHECK(std::abs(rec.phi - principal_angle(rec.g_hat.R.transpose() * truth[k].g.R)) <= 1e-14);
      CHECK(std::abs(rec.chi_norm - (truth[k].g.p - rec.g_hat.p).norm()) <= 1e-14);
      const Vec6 err = adjoint(rec.g_hat) * (truth[k].xi.stacked() - rec.xi_hat.stacked());
      CHECK((rec.omega_err - err.head<3>()).norm() <= 1e-12);
      CHECK((rec.upsilon_err - err.tail<3>()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("harness: runs are bit-identical across calls and selections") {
  TrajectorySpec spec;
  spec.dt = 1e-3;
  spec.T = 0.5;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();
  const EstimatorConfigs cfg = truth_init_configs(spec);
  const NoiseSpec noise = tumbling_noise(21);

  const ScenarioLog all1 = run_scenario(truth, points, noise, select(true, true, true), cfg);
  const ScenarioLog all2 = run_scenario(truth, points, noise, select(true, true, true), cfg);
  REQUIRE(all1.runs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(run_digest(all1.runs[i]) == run_digest(all2.runs[i]));
  }

  // Every estimator consumes the same synthesized stream, so dropping the
  // others from the selection must not change a run by a single bit.
  const ScenarioLog only_fts = run_scenario(truth, points, noise, select(true, false, false), cfg);
  const ScenarioLog only_dq = run_scenario(truth, points, noise, select(false, false, true), cfg);
  REQUIRE(only_fts.runs.size() == 1);
  REQUIRE(only_dq.runs.size() == 1);
  CHECK(run_digest(only_fts.runs[0]) == run_digest(all1.runs[0]));
  CHECK(run_digest(only_dq.runs[0]) == run_digest(all1.runs[2]));

  // A different seed changes the stream and therefore the run.
  const ScenarioLog reseeded =
      run_scenario(truth, points, tumbling_noise(22), select(true, false, false), cfg);
  CHECK(run_digest(reseeded.runs[0]) != run_digest(all1.runs[0]));
}

TEST_CASE("harness: aggressive gains at a coarse sample rate amplify roundoff") {
  // Characterization: with the default corrector gains and a 0.1 s step, the
  // explicit update is outside its stability region. Even starting exactly on
  // the true state, machine-epsilon residuals grow without bound; the harness
  // must record the blow-up instead of crashing. The two baselines consume
  // the identical stream and stay put, which pins the cause to the update
  // law's step-size limit rather than the harness or the measurements.
  TrajectorySpec spec;  // dt = 0.1, T = 30
  const auto truth = generate_truth(spec);
  const EstimatorConfigs cfg = truth_init_configs(spec);

  const ScenarioLog log = run_scenario(truth, default_feature_set(), NoiseSpec{},
                                       select(true, true, true), cfg);
  REQUIRE(log.runs.size() == 3);

  const StepRecord& fts_end = log.runs[0].records.back();
  const bool diverged = !std::isfinite(fts_end.V) || fts_end.V > 1e100;
  CHECK(diverged);

  double vpe_phi = 0.0, vpe_chi = 0.0, dq_phi = 0.0, dq_chi = 0.0;
  for (const StepRecord& r : log.runs[1].records) {
    vpe_phi = std::max(vpe_phi, r.phi);
    vpe_chi = std::max(vpe_chi, r.chi_norm);
  }
  for (const StepRecord& r : log.runs[2].records) {
    dq_phi = std::max(dq_phi, r.phi);
    dq_chi = std::max(dq_chi, r.chi_norm);
  }
  CHECK(vpe_phi <= 1e-6);
  CHECK(vpe_chi <= 1e-10);
  CHECK(dq_phi <= 1e-2);
  CHECK(dq_chi <= 1e-2);
}

TEST_CASE("harness: velocity-filter path feeds the observer filtered kinematics") {
  TrajectorySpec spec;
  spec.dt = 0.0702;
  spec.T = 5.0;
  const auto truth = generate_truth(spec);
  const FeaturePointSet points = default_feature_set();

  EstimatorConfigs cfg = truth_init_configs(spec);
  cfg.fts_gains = mild_gains();
  cfg.filter_params.lambda_c = 0.3;

  const ScenarioLog raw = run_scenario(truth, points, NoiseSpec{}, select(true, false, false), cfg);
  cfg.use_velocity_filter = true;
  const ScenarioLog filt = run_scenario(truth, points, NoiseSpec{}, select(true, false, false), cfg);

  // Raw kinematics keep the truth-initialized observer exactly on the truth;
  // the filter's cold start and chatter perturb it, so the two runs must
  // differ — but only by a bounded, finite amount.
  double divergence = 0.0;
  double filt_chi = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const StepRecord& a = raw.runs[0].records[k];
    const StepRecord& b = filt.runs[0].records[k];
    CHECK(std::isfinite(b.phi));
    CHECK(std::isfinite(b.chi_norm));
    CHECK(std::isfinite(b.V));
    divergence = std::max(divergence, (a.g_hat.p - b.g_hat.p).norm());
    filt_chi = std::max(filt_chi, b.chi_norm);
  }
  CHECK(raw.runs[0].records.back().chi_norm <= 1e-10);
  CHECK(divergence >= 1e-3);
  CHECK(filt_chi <= 2.0);
}

TEST_CASE("harness: estimator failures carry the stage and step index") {
  TrajectorySpec spec;
  spec.T = 1.0;
  const auto truth = generate_truth(spec);

  EstimatorConfigs cfg = truth_init_configs(spec);
  cfg.use_velocity_filter = true;
  cfg.filter_params.lambda_c = -1.0;

  CHECK_THROWS_WITH_AS(
      (void)run_scenario(truth, default_feature_set(), NoiseSpec{}, select(true, false, false), cfg),
      "fts: step 0: fts filter: lambda_c must be positive", Error);

  CHECK_THROWS_AS((void)run_scenario({}, default_feature_set(), NoiseSpec{},
                                     select(true, false, false), cfg),
                  ConfigError);
  CHECK_THROWS_AS((void)run_scenario(truth, default_feature_set(), NoiseSpec{},
                                     select(false, false, false), EstimatorConfigs{}),
                  ConfigError);
}

TEST_CASE("harness: settle time is the start of the final in-tolerance stretch") {
  std::vector<StepRecord> recs;
  recs.push_back(record_at(0.0, 5.0, 5.0));
  recs.push_back(record_at(1.0, 0.005, 5.0));
  recs.push_back(record_at(2.0, 0.5, 5.0));  // leaves the band: earlier entry voided
  recs.push_back(record_at(3.0, 0.005, 0.01));  // boundary value counts as inside
  recs.push_back(record_at(4.0, 0.001, 0.002));

  CHECK(settle_time(recs, true, 1e-2) == 3.0);
  CHECK(settle_time(recs, false, 1e-2) == 3.0);
  CHECK(settle_time(recs, true, 1e-4) == kInf);

  // Already inside at the first sample and never leaves.
  std::vector<StepRecord> low{record_at(0.0, 1e-3, 1e-3), record_at(1.0, 1e-3, 1e-3)};
  CHECK(settle_time(low, true, 1e-2) == 0.0);

  CHECK(settle_time({}, true, 1e-2) == kInf);
}

TEST_CASE("harness: metrics summarize an error series") {
  EstimatorRun run;
  run.name = "fts";
  run.wall_time = 0.125;
  run.records.push_back(record_at(0.0, 0.0, 3.0));
  run.records.push_back(record_at(1.0, 2.0, 4.0));

  const EstimatorMetrics m = metrics(run);
  CHECK(m.rms_phi == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(m.rms_chi == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(m.wall_time == 0.125);
  CHECK(m.settle_phi == kInf);  // 2.0 at the final sample
  CHECK(m.settle_chi == kInf);

  // RMS does not care about the order of the records.
  EstimatorRun swapped = run;
  std::swap(swapped.records[0], swapped.records[1]);
  const EstimatorMetrics ms = metrics(swapped);
  CHECK(ms.rms_phi == doctest::Approx(m.rms_phi).epsilon(1e-12));
  CHECK(ms.rms_chi == doctest::Approx(m.rms_chi).epsilon(1e-12));

  // Constant series: RMS is the constant, settle time is the first sample.
  EstimatorRun flat;
  for (int k = 0; k < 5; ++k) flat.records.push_back(record_at(0.5 * k, 1e-3, 2e-3));
  const EstimatorMetrics mf = metrics(flat);
  CHECK(mf.rms_phi == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(mf.rms_chi == doctest::Approx(2e-3).epsilon(1e-12));
  CHECK(mf.settle_phi == 0.0);
  CHECK(mf.settle_chi == 0.0);

  // Tolerances are honored separately per channel.
  const EstimatorMetrics mt = metrics(flat, 1e-4, 1e-2);
  CHECK(mt.settle_phi == kInf);
  CHECK(mt.settle_chi == 0.0);

  // An empty run reports the neutral defaults.
  const EstimatorMetrics me = metrics(EstimatorRun{});
  CHECK(me.rms_phi == 0.0);
  CHECK(me.rms_chi == 0.0);
  CHECK(me.wall_time == 0.0);
  CHECK(me.settle_phi == kInf);
  CHECK(me.settle_chi == kInf);
}
