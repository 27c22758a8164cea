#pragma once

#include <Eigen/Geometry>
#include <vector>

#include "ftspe/observer.hpp"

namespace ftspe {

// Weighted least-squares attitude from paired vector columns: minimizes
// 0.5 * sum_i w_i ||d_i - R e_i||^2 via SVD of the profile matrix with
// determinant correction. Throws DegenerateProfile when the profile matrix
// has rank < 2 (attitude unobservable).
[[nodiscard]] Mat3 wahba_svd(const Eigen::Matrix3Xd& D, const Eigen::Matrix3Xd& E_m,
                             const Eigen::VectorXd& weights_diag);

[[nodiscard]] double wahba_cost(const Mat3& R, const Eigen::Matrix3Xd& D,
                                const Eigen::Matrix3Xd& E_m, const Eigen::VectorXd& weights_diag);

// ---------------------------------------------------------------------------
// Variational pose estimator (discrete comparison baseline).

struct VpeParams {
  Mat3 J = Vec3(1.2, 1.0, 0.9).asDiagonal();
  Mat3 M = Mat3::Identity();
  Mat3 D_t = 10.0 * Mat3::Identity();
  Mat3 D_r = 10.0 * Mat3::Identity();
  double kappa = 1.1;
  double phi_prime = 1.0;  // constant dissipation slope Phi'(x)

  void validate() const;  // throws ConfigError on non-SPD / non-positive entries
};

struct VpeState {
  Pose g_hat;
  Vec3 omega = Vec3::Zero();
  Vec3 upsilon = Vec3::Zero();
  VpeParams params;
};

// Initial internal velocities chosen so the first estimated twist equals the
// supplied initial estimate xi_hat0 (same convention as the FTS observer).
[[nodiscard]] VpeState make_vpe_state(const Pose& g_hat0, const Twist& xi_m0,
                                      const Twist& xi_hat0, const VpeParams& params = {});

// Solves F = exp_so3(f) from (J omega)^x = (F Jc - Jc F^T) / dt with
// Jc = tr(J)/2 I - J, by Newton iteration on f (forward-difference Jacobian,
// step 1e-7, initial guess f = dt * omega). Throws ImplicitSolveFailed when
// the residual does not reach tol within max_iters.
[[nodiscard]] Mat3 vpe_solve_F(const Vec3& omega, const Mat3& J, double dt,
                               double tol = 1e-12, int max_iters = 50);

// One step of the printed recursions. The velocity updates consume the NEXT
// epoch's measured frame (mean point and pair matrix at k+1), so the caller
// passes the k+1 frame context; xi_m is the measured twist at step k.
[[nodiscard]] VpeState vpe_step(const VpeState& state, const RunGeometry& geo,
                                const FrameContext& ctx_next, const Twist& xi_m, double dt,
                                Twist* xi_hat_out = nullptr);

// ---------------------------------------------------------------------------
// Dual-quaternion multiplicative EKF (bias-free comparison baseline).
// Quaternions stay internal to this module.

struct DualQuat {
  Eigen::Quaterniond real = Eigen::Quaterniond::Identity();
  Eigen::Quaterniond dual = Eigen::Quaterniond(0.0, 0.0, 0.0, 0.0);
};

[[nodiscard]] DualQuat dq_from_pose(const Pose& g);
[[nodiscard]] Pose dq_to_pose(const DualQuat& q);
[[nodiscard]] DualQuat dq_multiply(const DualQuat& a, const DualQuat& b);
[[nodiscard]] DualQuat dq_conjugate(const DualQuat& a);

// Normalize the real part; project the dual part onto the orthogonal
// complement of the real part. Idempotent.
void dq_enforce_constraints(DualQuat& q);

struct DqMekfParams {
  Mat6 P0;
  Mat6 Q_proc;  // process noise density for the [attitude; position] error state
  Mat6 R_meas;  // pose pseudo-measurement noise (doubled-Gibbs innovation units)

  DqMekfParams();
};

struct DqMekfState {
  DualQuat q_hat;
  Mat6 P = Mat6::Identity();
  Mat6 Q_proc = Mat6::Identity();
  Mat6 R_meas = Mat6::Identity();
};

[[nodiscard]] DqMekfState dqmekf_init(const Pose& g_hat0, const DqMekfParams& params = {});

// Euler propagation of the dual-quaternion kinematics with the measured twist
// as the dual velocity, followed by the two constraint enforcements and an
// Euler-discretized Riccati update of P.
void dqmekf_propagate(DqMekfState& state, const Twist& xi_m, double dt);

// Multiplicative update against a full-pose measurement. The innovation is
// the doubled Gibbs vector of the error dual quaternion; the correction is
// retracted with the unit-sphere branch when the rotation correction has
// norm < 1 and with the large-error branch otherwise (no unwinding).
void dqmekf_update(DqMekfState& state, const Pose& pose_meas);

// propagate + update in one call.
[[nodiscard]] DqMekfState dqmekf_step(const DqMekfState& state, const Pose& pose_meas,
                                      const Twist& xi_m, double dt);

[[nodiscard]] Pose dqmekf_pose(const DqMekfState& state);

}  // namespace ftspe
