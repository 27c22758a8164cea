#include "ftspe/observer.hpp"

#include <algorithm>
#include <cmath>

namespace ftspe {

void ObserverGains::validate() const {
  if (!(p > 1.0 && p < 2.0)) throw ConfigError("gains: p must lie in (1,2)");
  for (double g : {kappa, k_p, k_omega, k_upsilon, alpha1, alpha2}) {
    if (!(g > 0.0)) throw ConfigError("gains: all gains must be positive");
  }
  if (!(eps_reg > 0.0)) throw ConfigError("gains: eps_reg must be positive");
}

RunGeometry make_run_geometry(const FeaturePointSet& points, const Vec3& K_diag) {
  RunGeometry geo;
  geo.D = pair_columns(points.q);
  require_rank3(geo.D, "make_run_geometry");
  const WahbaWeights w = compute_wahba_weights(geo.D, K_diag);
  geo.W = w.W;
  geo.K = w.K;
  geo.K_diag = K_diag;
  geo.DW = geo.D * geo.W;
  geo.q_bar = points.mean();
  return geo;
}

FrameContext make_frame_context(const RunGeometry& geo, const FeatureFrame& frame) {
  FrameContext ctx;
  ctx.E_m = pair_columns(frame.a);
  if (ctx.E_m.cols() != geo.D.cols()) {
    throw EmptyFrame("make_frame_context: frame cardinality mismatch with run geometry");
  }
  Vec3 a_bar = Vec3::Zero();
  for (const auto& v : frame.a) a_bar += v;
  ctx.a_bar = a_bar / static_cast<double>(frame.a.size());
  ctx.t = frame.t;
  return ctx;
}

Mat3 H_matrix(const Vec3& x, double p) {
  return Mat3::Identity() - (2.0 * (1.0 - 1.0 / p) / x.squaredNorm()) * (x * x.transpose());
}

Vec3 fractional_term(const Vec3& x, double p, double eps_reg) {
  const double sq = x.squaredNorm();
  if (sq < eps_reg) return Vec3::Zero();
  return x / std::pow(sq, 1.0 - 1.0 / p);
}

FtsTerms fts_terms(const ObserverState& state, const RunGeometry& geo, const FrameContext& ctx,
                   const ObserverGains& gains) {
  FtsTerms t;
  const Mat3& R_hat = state.g_hat.R;
  t.L = geo.DW * ctx.E_m.transpose();
  const Mat3 lrt = t.L * R_hat.transpose();
  // vee(L R_hat^T - R_hat L^T); the argument is skew by construction.
  t.s_L = Vec3(lrt(2, 1) - lrt(1, 2), lrt(0, 2) - lrt(2, 0), lrt(1, 0) - lrt(0, 1));
  t.y = geo.q_bar - R_hat * ctx.a_bar - state.g_hat.p;
  t.z1 = fractional_term(t.s_L, gains.p, gains.eps_reg);
  t.z2 = fractional_term(t.y, gains.p, gains.eps_reg);
  t.Psi = state.omega + gains.alpha1 * t.z1;
  t.Phi = state.upsilon + state.omega.cross(geo.q_bar) + gains.alpha2 * t.z2;
  const Mat3 wmat = lrt * hat(state.omega) + hat(state.omega) * lrt.transpose();
  t.w_L = Vec3(wmat(2, 1) - wmat(1, 2), wmat(0, 2) - wmat(2, 0), wmat(1, 0) - wmat(0, 1)) * 0.5;
  t.v_y = state.upsilon + state.omega.cross(geo.q_bar - t.y);
  return t;
}

std::pair<Vec3, Vec3> observer_derivatives(const FtsTerms& t, const RunGeometry& geo,
                                           const ObserverGains& g) {
  const double e = 1.0 - 1.0 / g.p;
  Vec3 gamma = -g.k_p * t.s_L - g.k_omega * fractional_term(t.Psi, g.p, g.eps_reg);
  const double sL_sq = t.s_L.squaredNorm();
  if (sL_sq >= g.eps_reg) {
    gamma -= (g.alpha1 / std::pow(sL_sq, e)) * (H_matrix(t.s_L, g.p) * t.w_L);
  }
  Vec3 eta = geo.q_bar.cross(gamma) - g.k_p * g.kappa * t.y -
             g.k_upsilon * fractional_term(t.Phi, g.p, g.eps_reg);
  const double y_sq = t.y.squaredNorm();
  if (y_sq >= g.eps_reg) {
    eta -= (g.alpha2 / std::pow(y_sq, e)) * (H_matrix(t.y, g.p) * t.v_y);
  }
  return {gamma, eta};
}

ObserverState observer_step(const ObserverState& state, const RunGeometry& geo,
                            const FrameContext& ctx, const Twist& xi_input,
                            const ObserverGains& gains, double dt, Twist* xi_hat_out) {
  const FtsTerms terms = fts_terms(state, geo, ctx, gains);
  const auto [gamma, eta] = observer_derivatives(terms, geo, gains);

  // xi_hat_k uses the pre-update velocity states phi_k.
  Vec6 phi;
  phi << state.omega, state.upsilon;
  const Vec6 xi_hat = xi_input.stacked() - adjoint(inverse(state.g_hat)) * phi;
  const Twist xi_hat_tw = Twist::from_stacked(xi_hat);
  if (xi_hat_out != nullptr) *xi_hat_out = xi_hat_tw;

  ObserverState next;
  next.g_hat = compose(state.g_hat, exp_se3(xi_hat_tw, dt));
  next.omega = state.omega + dt * gamma;
  next.upsilon = state.upsilon + dt * eta;
  next.k = state.k + 1;
  return next;
}

LyapunovSample lyapunov(const ObserverState& state, const RunGeometry& geo,
                        const FrameContext& ctx, const ObserverGains& gains) {
  const FtsTerms t = fts_terms(state, geo, ctx, gains);
  LyapunovSample s;
  const double U_t = 0.5 * gains.kappa * t.y.squaredNorm();
  const Eigen::Matrix3Xd resid = geo.D - state.g_hat.R * ctx.E_m;
  const double U_r = 0.5 * (resid.transpose() * resid * geo.W).trace();
  s.U = U_t + U_r;
  s.Psi_sq = t.Psi.squaredNorm();
  s.Phi_sq = t.Phi.squaredNorm();
  s.V = gains.k_p * s.U + 0.5 * s.Psi_sq + 0.5 * s.Phi_sq;
  return s;
}

double settling_gain_k0(const ObserverGains& g) {
  const double e = 1.0 - 1.0 / g.p;
  const double c = std::pow(2.0, 1.0 / g.p);
  return std::min({g.alpha1 * std::pow(g.k_p, e), c * g.alpha2 * std::pow(g.k_p * g.kappa, e),
                   c * g.k_upsilon, c * g.k_omega});
}

RobustnessResult check_gain_robustness(const ObserverGains& g, const RobustnessBounds& b) {
  const double tp = 2.0 / g.p;
  const double lambda =
      (tp * b.eps_omega - b.Psi_max) * std::pow(b.Psi_max, tp - 1.0) +
      (tp * (b.eps_upsilon + b.q_bar_max * b.eps_omega) - b.Phi_max) * std::pow(b.Phi_max, tp - 1.0);
  const double alpha_min = std::min(g.alpha1 * g.k_p, g.alpha2 * g.k_p * g.kappa);
  const double k_min = std::min(g.k_upsilon, g.k_omega);
  // Product form of (alpha_min / k_min) >= lambda / (s^tp + y^tp): stays
  // finite when both state bounds are zero (margin then -lambda).
  const double denom = std::pow(b.s_L_max, tp) + std::pow(b.y_max, tp);
  const double margin = (alpha_min / k_min) * denom - lambda;
  return {margin >= 0.0, margin};
}

ObserverState make_observer_state(const Pose& g_hat0, const Twist& xi_m0, const Twist& xi_hat0) {
  ObserverState s;
  s.g_hat = g_hat0;
  const Vec6 phi = adjoint(g_hat0) * (xi_m0.stacked() - xi_hat0.stacked());
  s.omega = phi.head<3>();
  s.upsilon = phi.tail<3>();
  s.k = 0;
  return s;
}

}  // namespace ftspe
