#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ftspe/baselines.hpp"
#include "ftspe/errors.hpp"

namespace ftspe {

namespace {

void require_spd(const Mat3& A, const char* name) {
  if ((A - A.transpose()).norm() > 1e-9) {
    throw ConfigError(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(A);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError(std::string(name) + " must be positive definite");
  }
}

}  // namespace

void VpeParams::validate() const {
  require_spd(J, "J");
  require_spd(M, "M");
  require_spd(D_t, "D_t");
  require_spd(D_r, "D_r");
  if (kappa <= 0.0) throw ConfigError("kappa must be positive");
  if (phi_prime <= 0.0) throw ConfigError("phi_prime must be positive");
}

VpeState make_vpe_state(const Pose& g_hat0, const Twist& xi_m0, const Twist& xi_hat0,
                        const VpeParams& params) {
  VpeState s;
  s.g_hat = g_hat0;
  s.params = params;
  const Vec6 phi = adjoint(g_hat0) * (xi_m0.stacked() - xi_hat0.stacked());
  s.omega = phi.head<3>();
  s.upsilon = phi.tail<3>();
  return s;
}

Mat3 vpe_solve_F(const Vec3& omega, const Mat3& J, double dt, double tol, int max_iters) {
  const Mat3 Jc = 0.5 * J.trace() * Mat3::Identity() - J;
  const Mat3 target = hat(J * omega);
  // (F Jc - Jc F^T) is skew for symmetric Jc, so the residual matrix is skew
  // by construction and its vee captures it exactly.
  const auto residual = [&](const Vec3& f) -> Vec3 {
    const Mat3 F = exp_so3(f);
    return skew_part_vee(target - (F * Jc - Jc * F.transpose()) / dt);
  };

  Vec3 f = dt * omega;
  Vec3 r = residual(f);
  constexpr double kFdStep = 1e-7;
  for (int it = 0; it < max_iters; ++it) {
    if (r.norm() < tol) return exp_so3(f);
    Mat3 Jac;
    for (int c = 0; c < 3; ++c) {
      Vec3 fp = f;
      fp(c) += kFdStep;
      Jac.col(c) = (residual(fp) - r) / kFdStep;
    }
    f -= Jac.partialPivLu().solve(r);
    r = residual(f);
  }
  if (r.norm() < tol) return exp_so3(f);
  throw ImplicitSolveFailed("vpe_solve_F: Newton iteration did not converge");
}

VpeState vpe_step(const VpeState& state, const RunGeometry& geo, const FrameContext& ctx_next,
                  const Twist& xi_m, double dt, Twist* xi_hat_out) {
  const VpeParams& prm = state.params;

  // Pose update with the pre-update internal velocities.
  Vec6 phi;
  phi << state.omega, state.upsilon;
  const Twist xi_hat = Twist::from_stacked(xi_m.stacked() - adjoint(inverse(state.g_hat)) * phi);
  if (xi_hat_out != nullptr) *xi_hat_out = xi_hat;

  VpeState next = state;
  next.g_hat = compose(state.g_hat, exp_se3(xi_hat, dt));

  // Relative rotation increment from the implicit discrete relation.
  const Mat3 F = vpe_solve_F(state.omega, prm.J, dt);

  // Velocity updates consume the updated pose and the next frame's measurements.
  const Vec3 e = next.g_hat.p + next.g_hat.R * ctx_next.a_bar - geo.q_bar;

  const Mat3 Mt = prm.M + dt * prm.D_t;
  next.upsilon = Mt.ldlt().solve(F.transpose() * prm.M * state.upsilon + dt * prm.kappa * e);

  const Mat3 L = geo.DW * ctx_next.E_m.transpose();
  const Vec3 s = s_L_of(next.g_hat.R, L);

  const Mat3 Jr = prm.J + dt * prm.D_r;
  const Vec3 rhs = F.transpose() * prm.J * state.omega +
                   dt * (prm.M * next.upsilon).cross(next.upsilon) +
                   dt * prm.kappa * geo.q_bar.cross(e) - dt * prm.phi_prime * s;
  next.omega = Jr.ldlt().solve(rhs);
  return next;
}

}  // namespace ftspe
