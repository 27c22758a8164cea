#include "ftspe/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ftspe {

Mat3 hat(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

Vec3 vee(const Mat3& S, double tol) {
  if ((S + S.transpose()).norm() > tol) {
    throw NonSkewInput("vee: input deviates from skew symmetry beyond tolerance");
  }
  return skew_part_vee(S);
}

Vec3 skew_part_vee(const Mat3& A) {
  return {0.5 * (A(2, 1) - A(1, 2)), 0.5 * (A(0, 2) - A(2, 0)), 0.5 * (A(1, 0) - A(0, 1))};
}

double trace_inner(const Mat3& A, const Mat3& B) { return (A.transpose() * B).trace(); }

namespace {

// sin(t)/t, (1-cos(t))/t^2, (t-sin(t))/t^3 with 4th-order series below 1e-6.
struct RodriguesCoeffs {
  double a, b, c;
};

RodriguesCoeffs rodrigues_coeffs(double theta2) {
  RodriguesCoeffs k{};
  if (theta2 < 1e-12) {  // theta < 1e-6
    k.a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    k.b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    k.c = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    const double theta = std::sqrt(theta2);
    k.a = std::sin(theta) / theta;
    k.b = (1.0 - std::cos(theta)) / theta2;
    k.c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return k;
}

}  // namespace

Mat3 exp_so3(const Vec3& v) {
  const auto k = rodrigues_coeffs(v.squaredNorm());
  const Mat3 s = hat(v);
  return Mat3::Identity() + k.a * s + k.b * (s * s);
}

Pose exp_se3(const Twist& xi, double dt) {
  const Vec3 w = dt * xi.angular;
  const Vec3 u = dt * xi.linear;
  const auto k = rodrigues_coeffs(w.squaredNorm());
  const Mat3 s = hat(w);
  const Mat3 s2 = s * s;
  Pose g;
  g.R = Mat3::Identity() + k.a * s + k.b * s2;
  g.p = (Mat3::Identity() + k.b * s + k.c * s2) * u;
  return g;
}

Mat6 adjoint(const Pose& g) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = g.R;
  ad.bottomRightCorner<3, 3>() = g.R;
  ad.bottomLeftCorner<3, 3>() = hat(g.p) * g.R;
  return ad;
}

double principal_angle(const Mat3& Q) {
  return std::acos(std::clamp(0.5 * (Q.trace() - 1.0), -1.0, 1.0));
}

Pose compose(const Pose& g1, const Pose& g2) { return {g1.R * g2.R, g1.R * g2.p + g1.p}; }

Pose inverse(const Pose& g) {
  const Mat3 rt = g.R.transpose();
  return {rt, -(rt * g.p)};
}

bool is_rotation(const Mat3& R, double tol) {
  return (R.transpose() * R - Mat3::Identity()).norm() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

void require_rotation(const Mat3& R, const char* where, double tol) {
  if (!is_rotation(R, tol)) {
    throw Error(std::string(where) + ": matrix is not a rotation within tolerance");
  }
}

Mat3 renormalize(const Mat3& R) {
  Mat3 out;
  const Vec3 c0 = R.col(0).normalized();
  Vec3 c1 = R.col(1) - c0 * c0.dot(R.col(1));
  c1.normalize();
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c0.cross(c1);
  return out;
}

}  // namespace ftspe
