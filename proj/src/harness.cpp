#include <chrono>
#include <cmath>

#include "ftspe/errors.hpp"
#include "ftspe/harness.hpp"

namespace ftspe {

long TrajectorySpec::num_steps() const { return std::lround(T / dt); }

Twist TrajectorySpec::xi_at(double t) const {
  if (profile == Profile::Constant) return xi0;
  const double s = std::sin(2.0 * kPi * frequency_hz * t);
  return Twist{xi0.angular + s * amplitude.angular, xi0.linear + s * amplitude.linear};
}

void TrajectorySpec::validate() const {
  if (!(dt > 0.0)) throw ConfigError("trajectory: dt must be positive");
  if (!(T >= dt)) throw ConfigError("trajectory: T must be at least dt");
  require_rotation(R0, "trajectory R0");
  if (profile == Profile::Sinusoidal && frequency_hz < 0.0) {
    throw ConfigError("trajectory: frequency must be non-negative");
  }
}

std::vector<TruthSample> generate_truth(const TrajectorySpec& spec) {
  spec.validate();
  const long n = spec.num_steps();
  std::vector<TruthSample> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  Pose g{spec.R0, spec.b0};
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    out.push_back(TruthSample{g, spec.xi_at(t), t});
    if (k < n) g = compose(g, exp_se3(spec.xi_at(t), spec.dt));
  }
  return out;
}

MeasurementStream synthesize_stream(const std::vector<TruthSample>& truth,
                                    const FeaturePointSet& points, const NoiseSpec& noise) {
  MeasurementStream stream;
  stream.seed = noise.seed;
  stream.epochs.reserve(truth.size());
  SplitMix64 rng(noise.seed);
  for (const TruthSample& s : truth) {
    MeasurementEpoch e;
    e.t = s.t;
    e.frame = synthesize_frame(s.g, points, noise.point_noise, rng, s.t);
    e.E_m = pair_columns(e.frame.a);
    Vec3 a_bar = Vec3::Zero();
    for (const Vec3& a : e.frame.a) a_bar += a;
    e.a_bar = a_bar / static_cast<double>(e.frame.a.size());
    e.xi_m = s.xi;
    if (noise.gyro_std > 0.0) e.xi_m.angular += rng.gaussian_vec3(noise.gyro_std);
    if (noise.transvel_std > 0.0) e.xi_m.linear += rng.gaussian_vec3(noise.transvel_std);
    stream.epochs.push_back(std::move(e));
  }
  return stream;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Pose/velocity errors shared by every estimator's log records.
void fill_error_fields(StepRecord& rec, const TruthSample& truth) {
  rec.phi = principal_angle(rec.g_hat.R.transpose() * truth.g.R);
  rec.chi_norm = (truth.g.p - rec.g_hat.p).norm();
  const Vec6 err = adjoint(rec.g_hat) * (truth.xi.stacked() - rec.xi_hat.stacked());
  rec.omega_err = err.head<3>();
  rec.upsilon_err = err.tail<3>();
}

EstimatorRun run_fts(const std::vector<TruthSample>& truth, const MeasurementStream& stream,
                     const RunGeometry& geo, const EstimatorConfigs& cfg) {
  const std::size_t n = stream.epochs.size();
  const double dt = truth.size() > 1 ? truth[1].t - truth[0].t : 0.0;
  std::vector<ObserverState> states(n);
  std::vector<Twist> xi_in(n);
  std::vector<Vec3> abar_in(n);

  EstimatorRun run;
  run.name = "fts";

  std::size_t k = 0;
  try {
    const auto t0 = Clock::now();
    VelocityPipeline pipe(stream.epochs[0].frame.a.size(), cfg.filter_params, dt);
    if (cfg.use_velocity_filter) {
      const FilteredKinematics f0 = pipe.process(stream.epochs[0].frame, stream.epochs[0].xi_m.angular);
      xi_in[0] = f0.xi_f;
      abar_in[0] = f0.a_bar_f;
    } else {
      xi_in[0] = stream.epochs[0].xi_m;
      abar_in[0] = stream.epochs[0].a_bar;
    }
    states[0] = make_observer_state(cfg.init.g_hat0, xi_in[0], cfg.init.xi_hat0);
    FrameContext ctx;
    for (k = 0; k + 1 < n; ++k) {
      ctx.E_m = stream.epochs[k].E_m;
      ctx.a_bar = abar_in[k];
      ctx.t = stream.epochs[k].t;
      states[k + 1] = observer_step(states[k], geo, ctx, xi_in[k], cfg.fts_gains, dt);
      if (cfg.use_velocity_filter) {
        const FilteredKinematics f =
            pipe.process(stream.epochs[k + 1].frame, stream.epochs[k + 1].xi_m.angular);
        xi_in[k + 1] = f.xi_f;
        abar_in[k + 1] = f.a_bar_f;
      } else {
        xi_in[k + 1] = stream.epochs[k + 1].xi_m;
        abar_in[k + 1] = stream.epochs[k + 1].a_bar;
      }
    }
    run.wall_time = seconds_since(t0);
  } catch (const Error& err) {
    throw Error("fts: step " + std::to_string(k) + ": " + err.what());
  }

  // Untimed post-pass: derived error/energy quantities.
  run.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    StepRecord& rec = run.records[i];
    rec.t = stream.epochs[i].t;
    rec.g_hat = states[i].g_hat;
    Vec6 phi_vec;
    phi_vec << states[i].omega, states[i].upsilon;
    rec.xi_hat = Twist::from_stacked(xi_in[i].stacked() - adjoint(inverse(states[i].g_hat)) * phi_vec);
    fill_error_fields(rec, truth[i]);
    FrameContext ctx;
    ctx.E_m = stream.epochs[i].E_m;
    ctx.a_bar = abar_in[i];
    ctx.t = stream.epochs[i].t;
    rec.V = lyapunov(states[i], geo, ctx, cfg.fts_gains).V;
  }
  return run;
}

EstimatorRun run_vpe(const std::vector<TruthSample>& truth, const MeasurementStream& stream,
                     const RunGeometry& geo, const EstimatorConfigs& cfg) {
  const std::size_t n = stream.epochs.size();
  const double dt = truth.size() > 1 ? truth[1].t - truth[0].t : 0.0;
  std::vector<VpeState> states(n);

  EstimatorRun run;
  run.name = "vpe";

  std::size_t k = 0;
  try {
    const auto t0 = Clock::now();
    states[0] = make_vpe_state(cfg.init.g_hat0, stream.epochs[0].xi_m, cfg.init.xi_hat0,
                               cfg.vpe_params);
    FrameContext ctx;
    for (k = 0; k + 1 < n; ++k) {
      ctx.E_m = stream.epochs[k + 1].E_m;
      ctx.a_bar = stream.epochs[k + 1].a_bar;
      ctx.t = stream.epochs[k + 1].t;
      states[k + 1] = vpe_step(states[k], geo, ctx, stream.epochs[k].xi_m, dt);
    }
    run.wall_time = seconds_since(t0);
  } catch (const Error& err) {
    throw Error("vpe: step " + std::to_string(k) + ": " + err.what());
  }

  run.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    StepRecord& rec = run.records[i];
    rec.t = stream.epochs[i].t;
    rec.g_hat = states[i].g_hat;
    Vec6 phi_vec;
    phi_vec << states[i].omega, states[i].upsilon;
    rec.xi_hat = Twist::from_stacked(stream.epochs[i].xi_m.stacked() -
                                     adjoint(inverse(states[i].g_hat)) * phi_vec);
    fill_error_fields(rec, truth[i]);
  }
  return run;
}

EstimatorRun run_dqmekf(const std::vector<TruthSample>& truth, const MeasurementStream& stream,
                        const RunGeometry& geo, const EstimatorConfigs& cfg) {
  const std::size_t n = stream.epochs.size();
  const double dt = truth.size() > 1 ? truth[1].t - truth[0].t : 0.0;
  std::vector<Pose> poses(n);

  EstimatorRun run;
  run.name = "dqmekf";

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(geo.D.cols());
  std::size_t k = 0;
  try {
    const auto t0 = Clock::now();
    DqMekfState st = dqmekf_init(cfg.init.g_hat0, cfg.dq_params);
    poses[0] = dqmekf_pose(st);
    for (k = 0; k + 1 < n; ++k) {
      const MeasurementEpoch& next = stream.epochs[k + 1];
      const Mat3 R_w = wahba_svd(geo.D, next.E_m, ones);
      const Pose pose_meas{R_w, geo.q_bar - R_w * next.a_bar};
      st = dqmekf_step(st, pose_meas, stream.epochs[k].xi_m, dt);
      poses[k + 1] = dqmekf_pose(st);
    }
    run.wall_time = seconds_since(t0);
  } catch (const Error& err) {
    throw Error("dqmekf: step " + std::to_string(k) + ": " + err.what());
  }

  run.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    StepRecord& rec = run.records[i];
    rec.t = stream.epochs[i].t;
    rec.g_hat = poses[i];
    rec.xi_hat = stream.epochs[i].xi_m;  // this filter adopts the measured twist
    fill_error_fields(rec, truth[i]);
  }
  return run;
}

}  // namespace

ScenarioLog run_scenario(const std::vector<TruthSample>& truth, const FeaturePointSet& points,
                         const NoiseSpec& noise, const EstimatorSelection& sel,
                         const EstimatorConfigs& cfg) {
  if (truth.empty()) throw ConfigError("run_scenario: empty truth trajectory");
  if (!sel.fts && !sel.vpe && !sel.dqmekf) {
    throw ConfigError("run_scenario: no estimator selected");
  }

  ScenarioLog log;
  log.truth = truth;
  log.seed = noise.seed;
  log.dt = truth.size() > 1 ? truth[1].t - truth[0].t : 0.0;
  log.rng_algorithm = SplitMix64::kAlgorithm;

  const MeasurementStream stream = synthesize_stream(truth, points, noise);
  const RunGeometry geo = make_run_geometry(points, cfg.K_diag);

  if (sel.fts) log.runs.push_back(run_fts(truth, stream, geo, cfg));
  if (sel.vpe) log.runs.push_back(run_vpe(truth, stream, geo, cfg));
  if (sel.dqmekf) log.runs.push_back(run_dqmekf(truth, stream, geo, cfg));
  return log;
}

double settle_time(const std::vector<StepRecord>& records, bool use_phi, double tol) {
  double settled_at = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (const StepRecord& rec : records) {
    const double e = use_phi ? rec.phi : rec.chi_norm;
    if (e <= tol) {
      if (!inside) {
        inside = true;
        settled_at = rec.t;
      }
    } else {
      inside = false;
      settled_at = std::numeric_limits<double>::infinity();
    }
  }
  return settled_at;
}

EstimatorMetrics metrics(const EstimatorRun& run, double phi_tol, double chi_tol) {
  EstimatorMetrics m;
  if (run.records.empty()) return m;
  double sum_phi2 = 0.0;
  double sum_chi2 = 0.0;
  for (const StepRecord& rec : run.records) {
    sum_phi2 += rec.phi * rec.phi;
    sum_chi2 += rec.chi_norm * rec.chi_norm;
  }
  const double inv_n = 1.0 / static_cast<double>(run.records.size());
  m.rms_phi = std::sqrt(sum_phi2 * inv_n);
  m.rms_chi = std::sqrt(sum_chi2 * inv_n);
  m.wall_time = run.wall_time;
  m.settle_phi = settle_time(run.records, true, phi_tol);
  m.settle_chi = settle_time(run.records, false, chi_tol);
  return m;
}

}  // namespace ftspe
