#pragma once

#include <numbers>

#include <Eigen/Dense>

#include "ftspe/errors.hpp"

namespace ftspe {

inline constexpr double kPi = std::numbers::pi;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Body-frame velocity [angular; linear].
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  [[nodiscard]] Vec6 stacked() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
  static Twist from_stacked(const Vec6& v) { return Twist{v.head<3>(), v.tail<3>()}; }
};

// Element of SE(3): rotation + position. Kept as a plain struct; validity is
// checked explicitly at API boundaries, never silently repaired.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
};

// Cross-product matrix: hat(v) * r == v x r.
[[nodiscard]] Mat3 hat(const Vec3& v);

// Inverse of hat. Throws NonSkewInput if S deviates from skew symmetry by more
// than tol (Frobenius norm of S + S^T).
[[nodiscard]] Vec3 vee(const Mat3& S, double tol = 1e-9);

// vee of the skew part of an arbitrary matrix: 1/2 * vee(A - A^T). No check.
[[nodiscard]] Vec3 skew_part_vee(const Mat3& A);

// Trace inner product <A, B> = tr(A^T B).
[[nodiscard]] double trace_inner(const Mat3& A, const Mat3& B);

// Rodrigues formula with a series branch near zero angle.
[[nodiscard]] Mat3 exp_so3(const Vec3& v);

// Closed-form SE(3) exponential of dt * xi (rotation + left-Jacobian
// translation), so repeated pose updates stay exactly on the group.
[[nodiscard]] Pose exp_se3(const Twist& xi, double dt);

// 6x6 adjoint [[R, 0], [hat(p) R, R]].
[[nodiscard]] Mat6 adjoint(const Pose& g);

// Principal rotation angle acos((tr(Q) - 1) / 2), clamped, in [0, pi].
[[nodiscard]] double principal_angle(const Mat3& Q);

[[nodiscard]] Pose compose(const Pose& g1, const Pose& g2);
[[nodiscard]] Pose inverse(const Pose& g);

[[nodiscard]] bool is_rotation(const Mat3& R, double tol = 1e-9);
void require_rotation(const Mat3& R, const char* where, double tol = 1e-9);

// Gram-Schmidt re-orthonormalization. Only ever applied by explicit caller
// request (e.g. very long replay runs); group operations never invoke it.
[[nodiscard]] Mat3 renormalize(const Mat3& R);

}  // namespace ftspe
