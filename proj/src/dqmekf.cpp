#include <cmath>

#include <Eigen/Cholesky>

#include "ftspe/baselines.hpp"
#include "ftspe/errors.hpp"

namespace ftspe {

namespace {

Eigen::Quaterniond pure(const Vec3& v) { return Eigen::Quaterniond(0.0, v.x(), v.y(), v.z()); }

Eigen::Quaterniond scaled(const Eigen::Quaterniond& q, double s) {
  return Eigen::Quaterniond(s * q.w(), s * q.x(), s * q.y(), s * q.z());
}

Eigen::Quaterniond sum(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return Eigen::Quaterniond(a.w() + b.w(), a.x() + b.x(), a.y() + b.y(), a.z() + b.z());
}

}  // namespace

DualQuat dq_from_pose(const Pose& g) {
  DualQuat q;
  q.real = Eigen::Quaterniond(g.R);
  q.real.normalize();
  // Dual part encodes the body-frame translation: q_d = 1/2 q_r (0, R^T b).
  q.dual = scaled(q.real * pure(g.R.transpose() * g.p), 0.5);
  return q;
}

Pose dq_to_pose(const DualQuat& q) {
  Pose g;
  Eigen::Quaterniond real = q.real;
  real.normalize();
  g.R = real.toRotationMatrix();
  const Eigen::Quaterniond t_body = scaled(real.conjugate() * q.dual, 2.0);
  g.p = g.R * t_body.vec();
  return g;
}

DualQuat dq_multiply(const DualQuat& a, const DualQuat& b) {
  DualQuat out;
  out.real = a.real * b.real;
  out.dual = sum(a.real * b.dual, a.dual * b.real);
  return out;
}

DualQuat dq_conjugate(const DualQuat& a) {
  return DualQuat{a.real.conjugate(), a.dual.conjugate()};
}

void dq_enforce_constraints(DualQuat& q) {
  const double n = q.real.norm();
  q.real = scaled(q.real, 1.0 / n);
  // Remove the component of the dual part along the (unit) real part.
  const double along = q.real.coeffs().dot(q.dual.coeffs());
  q.dual = sum(q.dual, scaled(q.real, -along));
}

DqMekfParams::DqMekfParams() {
  P0 = Mat6::Identity() * 0.01;
  Q_proc = Mat6::Identity();
  Q_proc.topLeftCorner<3, 3>() = 0.16 * 0.16 * Mat3::Identity();
  Q_proc.bottomRightCorner<3, 3>() = 0.02 * 0.02 * Mat3::Identity();
  // Pose pseudo-measurement noise deliberately carries the baseline's original
  // conservative tuning rather than values fitted to this scenario's sensors;
  // see README (comparison-baselines note).
  R_meas = Mat6::Identity();
  R_meas.topLeftCorner<3, 3>() = 1.0 * Mat3::Identity();
  R_meas.bottomRightCorner<3, 3>() = 0.09 * Mat3::Identity();
}

DqMekfState dqmekf_init(const Pose& g_hat0, const DqMekfParams& params) {
  DqMekfState s;
  s.q_hat = dq_from_pose(g_hat0);
  dq_enforce_constraints(s.q_hat);
  s.P = params.P0;
  s.Q_proc = params.Q_proc;
  s.R_meas = params.R_meas;
  return s;
}

void dqmekf_propagate(DqMekfState& state, const Twist& xi_m, double dt) {
  // Dual-velocity kinematics q_dot = 1/2 q (omega + eps nu), Euler step.
  const Eigen::Quaterniond omega_q = pure(xi_m.angular);
  const Eigen::Quaterniond nu_q = pure(xi_m.linear);
  const Eigen::Quaterniond real_dot = scaled(state.q_hat.real * omega_q, 0.5);
  const Eigen::Quaterniond dual_dot =
      scaled(sum(state.q_hat.real * nu_q, state.q_hat.dual * omega_q), 0.5);
  state.q_hat.real = sum(state.q_hat.real, scaled(real_dot, dt));
  state.q_hat.dual = sum(state.q_hat.dual, scaled(dual_dot, dt));
  dq_enforce_constraints(state.q_hat);

  Mat6 F = Mat6::Zero();
  F.topLeftCorner<3, 3>() = -hat(xi_m.angular);
  F.bottomLeftCorner<3, 3>() = -hat(xi_m.linear);
  F.bottomRightCorner<3, 3>() = -hat(xi_m.angular);
  // Discretized Riccati propagation in factored form: agrees with the Euler
  // sum P + dt(FP + PF^T + Q) to first order but cannot produce negative
  // eigenvalues, whatever the twist magnitude.
  const Mat6 Phi = Mat6::Identity() + dt * F;
  state.P = Phi * state.P * Phi.transpose() + dt * state.Q_proc;
  state.P = 0.5 * (state.P + state.P.transpose()).eval();
}

void dqmekf_update(DqMekfState& state, const Pose& pose_meas) {
  const DualQuat delta = dq_multiply(dq_conjugate(state.q_hat), dq_from_pose(pose_meas));

  // Doubled Gibbs-vector innovation; antipodally symmetric, so +/-q map to the
  // same innovation and no unwinding occurs. The scalar is floored to keep the
  // innovation finite at exactly 180 deg.
  double s = delta.real.w();
  if (std::abs(s) < 1e-6) s = (s < 0.0) ? -1e-6 : 1e-6;
  Vec6 z;
  z.head<3>() = 2.0 * delta.real.vec() / s;
  z.tail<3>() = 2.0 * delta.dual.vec() / s;

  const Mat6 S = state.P + state.R_meas;
  const Mat6 K = S.ldlt().solve(state.P).transpose();
  const Vec6 dx = K * z;
  const Vec3 v_r = 0.5 * dx.head<3>();
  const Vec3 v_d = 0.5 * dx.tail<3>();

  DualQuat corr;
  const double vr2 = v_r.squaredNorm();
  if (vr2 < 1.0) {
    const double w = std::sqrt(1.0 - vr2);
    corr.real = Eigen::Quaterniond(w, v_r.x(), v_r.y(), v_r.z());
    corr.dual = Eigen::Quaterniond(-v_r.dot(v_d) / w, v_d.x(), v_d.y(), v_d.z());
  } else {
    // Large-error branch: Gibbs-style retraction, exact for unit Kalman gain.
    const double den = std::sqrt(1.0 + vr2);
    corr.real = scaled(Eigen::Quaterniond(1.0, v_r.x(), v_r.y(), v_r.z()), 1.0 / den);
    corr.dual = Eigen::Quaterniond(-v_r.dot(v_d) * den, v_d.x(), v_d.y(), v_d.z());
  }

  state.q_hat = dq_multiply(state.q_hat, corr);
  dq_enforce_constraints(state.q_hat);

  const Mat6 IKH = Mat6::Identity() - K;
  state.P = IKH * state.P * IKH.transpose() + K * state.R_meas * K.transpose();
  state.P = 0.5 * (state.P + state.P.transpose()).eval();
}

DqMekfState dqmekf_step(const DqMekfState& state, const Pose& pose_meas, const Twist& xi_m,
                        double dt) {
  DqMekfState next = state;
  dqmekf_propagate(next, xi_m, dt);
  dqmekf_update(next, pose_meas);
  return next;
}

Pose dqmekf_pose(const DqMekfState& state) { return dq_to_pose(state.q_hat); }

}  // namespace ftspe
