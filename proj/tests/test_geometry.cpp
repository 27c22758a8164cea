#include <doctest.h>

#include <Eigen/Dense>

#include "ftspe/errors.hpp"
#include "ftspe/geometry.hpp"
#include "test_support.hpp"

using namespace ftspe;
using namespace test_support;

namespace {

Eigen::Matrix4d homogeneous(const Pose& g) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = g.R;
  m.topRightCorner<3, 1>() = g.p;
  return m;
}

}  // namespace

TEST_CASE("hat: zero, displayed form, cross-product oracle") {
  CHECK(hat(Vec3::Zero()).isZero(0.0));

  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((hat(Vec3(1, 2, 3)) - expected).norm() == 0.0);

  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_vec3(rng, 5.0), r = random_vec3(rng, 5.0);
    CHECK((hat(v) * r - v.cross(r)).norm() <= 1e-15 * (1.0 + v.norm() * r.norm()));
  }
}

TEST_CASE("vee: zero, inverse of hat, skew-part oracle") {
  CHECK(vee(Mat3::Zero()).isZero(0.0));
  CHECK((vee(hat(Vec3(1, 2, 3))) - Vec3(1, 2, 3)).norm() == 0.0);

  SplitMix64 rng(12);
  for (int i = 0; i < 100; ++i) {
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = rng.uniform(-2, 2);
    const Vec3 expected = 0.5 * Vec3(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1));
    CHECK((skew_part_vee(A) - expected).norm() <= 1e-15);
  }

  CHECK_THROWS_AS((void)vee(Mat3::Identity()), NonSkewInput);
}

TEST_CASE("exp_so3: identity, half-turn, 20-term series oracle") {
  CHECK((exp_so3(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);

  const Mat3 half_turn = exp_so3(Vec3(kPi, 0, 0));
  CHECK((half_turn - Vec3(1, -1, -1).asDiagonal().toDenseMatrix()).norm() <= 1e-15);

  // ||v|| <= 2 keeps the 20-term oracle's own truncation error below 5e-14.
  SplitMix64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = rng.uniform(0.0, 2.0) * random_unit(rng);
    CHECK((exp_so3(v) - series_exp(Mat3(hat(v)), 20)).norm() <= 1e-12);
  }
  // Series branch near zero.
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = random_vec3(rng, 1e-7);
    CHECK((exp_so3(v) - series_exp(Mat3(hat(v)), 20)).norm() <= 1e-15);
  }
}

TEST_CASE("exp_so3 stays a rotation for ||v|| <= 10") {
  SplitMix64 rng(14);
  for (int i = 0; i < 500; ++i) {
    const Vec3 v = rng.uniform(0.0, 10.0) * random_unit(rng);
    CHECK(is_rotation(exp_so3(v), 1e-12));
  }
}

TEST_CASE("exp_se3: identity, pure translation, 4x4 series oracle") {
  const Pose id = exp_se3(Twist{}, 1.0);
  CHECK((id.R - Mat3::Identity()).norm() == 0.0);
  CHECK(id.p.norm() == 0.0);

  const Pose trans = exp_se3(Twist{Vec3::Zero(), Vec3(1, 0, 0)}, 1.0);
  CHECK((trans.R - Mat3::Identity()).norm() == 0.0);
  CHECK((trans.p - Vec3(1, 0, 0)).norm() <= 1e-15);

  // ||dt * xi|| stays small enough that the 30-term oracle is exact to 1e-14.
  SplitMix64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const Twist xi{random_vec3(rng, 1.2), random_vec3(rng, 1.2)};
    const double dt = rng.uniform(0.01, 0.5);
    Eigen::Matrix4d xi_hat = Eigen::Matrix4d::Zero();
    xi_hat.topLeftCorner<3, 3>() = hat(xi.angular);
    xi_hat.topRightCorner<3, 1>() = xi.linear;
    const Eigen::Matrix4d oracle = series_exp(Eigen::Matrix4d(dt * xi_hat), 30);
    const Pose g = exp_se3(xi, dt);
    CHECK((homogeneous(g) - oracle).norm() <= 1e-12);
  }
}

TEST_CASE("adjoint: identity, lower-left block, homomorphism") {
  CHECK((adjoint(Pose{}) - Mat6::Identity()).norm() == 0.0);

  const Pose g{Mat3::Identity(), Vec3(1, 0, 0)};
  const Mat6 ad = adjoint(g);
  CHECK((ad.bottomLeftCorner<3, 3>() - hat(Vec3(1, 0, 0))).norm() == 0.0);
  CHECK((ad.topRightCorner<3, 3>()).norm() == 0.0);

  SplitMix64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const Pose g1 = random_pose(rng), g2 = random_pose(rng);
    CHECK((adjoint(compose(g1, g2)) - adjoint(g1) * adjoint(g2)).norm() <= 1e-12);
  }
}

TEST_CASE("principal_angle: identity, half-turn, round trip, transpose symmetry") {
  CHECK(principal_angle(Mat3::Identity()) == 0.0);
  CHECK(principal_angle(Vec3(-1, -1, 1).asDiagonal().toDenseMatrix()) == doctest::Approx(kPi));
  CHECK(principal_angle(exp_so3(Vec3(0.3, 0, 0))) == doctest::Approx(0.3).epsilon(1e-12));

  SplitMix64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Mat3 Q = random_rotation(rng);
    CHECK(principal_angle(Q) == doctest::Approx(principal_angle(Q.transpose())).epsilon(1e-12));
    CHECK(principal_angle(Q) >= 0.0);
    CHECK(principal_angle(Q) <= kPi);
  }
}

TEST_CASE("compose/inverse: group identities and homogeneous-matrix oracle") {
  SplitMix64 rng(18);
  for (int i = 0; i < 50; ++i) {
    const Pose g = random_pose(rng);
    const Pose gi = compose(g, inverse(g));
    CHECK((gi.R - Mat3::Identity()).norm() <= 1e-14);
    CHECK(gi.p.norm() <= 1e-14);
    const Pose ig = compose(Pose{}, g);
    CHECK((ig.R - g.R).norm() == 0.0);
    CHECK((ig.p - g.p).norm() == 0.0);
  }

  for (int trial = 0; trial < 20; ++trial) {
    Pose chain{};
    Eigen::Matrix4d oracle = Eigen::Matrix4d::Identity();
    for (int i = 0; i < 5; ++i) {
      const Pose g = random_pose(rng);
      chain = compose(chain, g);
      oracle = oracle * homogeneous(g);
    }
    CHECK((homogeneous(chain) - oracle).norm() <= 1e-12);
  }
}

TEST_CASE("trace inner product identities") {
  SplitMix64 rng(19);
  for (int i = 0; i < 100; ++i) {
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = rng.uniform(-2, 2);
    const Mat3 sym = 0.5 * (A + A.transpose());
    const Vec3 a1 = random_vec3(rng, 2.0), a2 = random_vec3(rng, 2.0);
    CHECK(std::abs(trace_inner(sym, hat(a1))) <= 1e-12);
    CHECK(trace_inner(hat(a1), hat(a2)) == doctest::Approx(2.0 * a1.dot(a2)).epsilon(1e-12));
  }
}

TEST_CASE("require_rotation and renormalize") {
  CHECK_THROWS_AS(require_rotation(2.0 * Mat3::Identity(), "test"), Error);
  SplitMix64 rng(20);
  const Mat3 R = random_rotation(rng);
  Mat3 drifted = R;
  drifted(0, 1) += 1e-4;
  CHECK(!is_rotation(drifted));
  CHECK(is_rotation(renormalize(drifted), 1e-12));
}
