#pragma once

#include <utility>

#include "ftspe/measurements.hpp"

namespace ftspe {

struct ObserverGains {
  double p = 13.0 / 11.0;
  double kappa = 1.1;
  double k_p = 10.1;
  double k_omega = 11.01;
  double k_upsilon = 10.02;
  double alpha1 = 88.65;
  double alpha2 = 0.9609;
  double eps_reg = 1e-9;  // squared-norm floor for the fractional-power terms

  // Throws ConfigError unless p in (1,2) strictly and all gains positive.
  // Constructing out-of-range values directly is allowed (the p -> 1 limit is
  // used as a comparison run in tests); loading from config always validates.
  void validate() const;
};

// (g_hat, omega, upsilon): pose estimate plus error-frame velocity states.
struct ObserverState {
  Pose g_hat;
  Vec3 omega = Vec3::Zero();
  Vec3 upsilon = Vec3::Zero();
  long k = 0;
};

// Run-constant measurement geometry: D, W, K, the cached product D*W, and the
// landmark centroid.
struct RunGeometry {
  Eigen::Matrix3Xd D;
  Eigen::MatrixXd W;
  Mat3 K;
  Eigen::Matrix3Xd DW;
  Vec3 q_bar = Vec3::Zero();
  Vec3 K_diag = Vec3(3.0, 2.0, 1.0);
};

[[nodiscard]] RunGeometry make_run_geometry(const FeaturePointSet& points, const Vec3& K_diag);

// Per-epoch measured quantities consumed by the observer.
struct FrameContext {
  Eigen::Matrix3Xd E_m;  // pairwise body columns (raw measurements)
  Vec3 a_bar = Vec3::Zero();  // measured (or filtered) point mean
  double t = 0.0;
};

[[nodiscard]] FrameContext make_frame_context(const RunGeometry& geo, const FeatureFrame& frame);

// H(x) = I - (2(1-1/p)/x^T x) x x^T; eigenvalues {2/p - 1, 1, 1}.
// Caller guards ||x||^2 >= eps_reg.
[[nodiscard]] Mat3 H_matrix(const Vec3& x, double p);

// x / (x^T x)^(1-1/p); returns 0 when ||x||^2 < eps_reg (the true limit, since
// the net exponent 2/p - 1 is positive for p in (1,2)).
[[nodiscard]] Vec3 fractional_term(const Vec3& x, double p, double eps_reg);

struct FtsTerms {
  Vec3 s_L, y, z1, z2, Psi, Phi, w_L, v_y;
  Mat3 L;
};

[[nodiscard]] FtsTerms fts_terms(const ObserverState& state, const RunGeometry& geo,
                                 const FrameContext& ctx, const ObserverGains& gains);

// gamma = d/dt omega, eta = d/dt upsilon (the printed feedback laws, with each
// fractional denominator floored at eps_reg and H-terms skipped below it).
[[nodiscard]] std::pair<Vec3, Vec3> observer_derivatives(const FtsTerms& t, const RunGeometry& geo,
                                                         const ObserverGains& gains);

// One discrete step: Euler on (omega, upsilon), exact group exponential on
// g_hat with xi_hat_k = xi_input_k - Ad(g_hat_k^-1) phi_k using the pre-update
// velocity states. Returns the new state; xi_hat_out (if non-null) receives
// the twist estimate published at step k.
[[nodiscard]] ObserverState observer_step(const ObserverState& state, const RunGeometry& geo,
                                          const FrameContext& ctx, const Twist& xi_input,
                                          const ObserverGains& gains, double dt,
                                          Twist* xi_hat_out = nullptr);

struct LyapunovSample {
  double U = 0.0;
  double Psi_sq = 0.0;
  double Phi_sq = 0.0;
  double V = 0.0;
};

[[nodiscard]] LyapunovSample lyapunov(const ObserverState& state, const RunGeometry& geo,
                                      const FrameContext& ctx, const ObserverGains& gains);

// Settling-rate constant k0 = min(alpha1 k_p^(1-1/p),
// 2^(1/p) alpha2 (k_p kappa)^(1-1/p), 2^(1/p) k_upsilon, 2^(1/p) k_omega).
[[nodiscard]] double settling_gain_k0(const ObserverGains& gains);

struct RobustnessBounds {
  double eps_omega = 0.0;    // bound on angular-velocity measurement noise
  double eps_upsilon = 0.0;  // bound on translational-velocity measurement noise
  double q_bar_max = 0.0;
  double s_L_max = 0.0;
  double y_max = 0.0;
  double Psi_max = 0.0;
  double Phi_max = 0.0;
};

struct RobustnessResult {
  bool satisfied = false;
  double margin = 0.0;  // (alpha_min/k_min)(s^(2/p)+y^(2/p)) - Lambda
};

// Gain condition for convergence to the bounded neighborhood under bounded
// velocity measurement noise:
//   alpha_min / k_min >= Lambda / (s_L_max^(2/p) + y_max^(2/p)).
[[nodiscard]] RobustnessResult check_gain_robustness(const ObserverGains& gains,
                                                     const RobustnessBounds& b);

// Initial error-frame velocities from the measured twist and the initial
// estimates: phi_0 = Ad_{g_hat_0}(xi_m_0 - xi_hat_0).
[[nodiscard]] ObserverState make_observer_state(const Pose& g_hat0, const Twist& xi_m0,
                                                const Twist& xi_hat0);

}  // namespace ftspe
