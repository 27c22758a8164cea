#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ftspe/geometry.hpp"
#include "ftspe/rng.hpp"

namespace ftspe {

// Inertially fixed landmark positions q_i, constant over a run.
struct FeaturePointSet {
  std::vector<Vec3> q;

  [[nodiscard]] std::size_t size() const { return q.size(); }
  [[nodiscard]] Vec3 mean() const;
};

// Default geometry: the four vertices of the unit 3-simplex scaled by 5.
// Non-coplanar, and the nonzero centroid exercises the q_bar coupling terms.
[[nodiscard]] FeaturePointSet default_feature_set();

// CSV loader: header row required, then one `x,y,z` row per point (meters).
[[nodiscard]] FeaturePointSet load_feature_csv(const std::string& path);

// One measurement epoch: body-frame point measurements of the landmark set.
struct FeatureFrame {
  std::vector<Vec3> a;
  double t = 0.0;
};

// Pairwise relative position vectors, in the canonical unordered-pair order
// (lambda < ell, lexicographic). For j = 3 the three pairwise differences are
// linearly dependent, so the third column is replaced by the cross product of
// the first two (pairs (0,1), (0,2), then d1 x d2). For j >= 4 all C(j,2)
// pairs are used.
struct PairVectorMatrices {
  Eigen::Matrix3Xd D;    // inertial-frame columns
  Eigen::Matrix3Xd E_m;  // measured body-frame columns
  int n = 0;
};

// Pairwise columns for one point list (used for both D and E_m).
[[nodiscard]] Eigen::Matrix3Xd pair_columns(const std::vector<Vec3>& pts);

// Builds D and E_m together and verifies rank(D) = 3 (sigma3 > 1e-8 * sigma1).
// Throws RankDeficient on collinear/degenerate geometry.
[[nodiscard]] PairVectorMatrices build_pair_matrices(const FeaturePointSet& points,
                                                     const FeatureFrame& frame);

void require_rank3(const Eigen::Matrix3Xd& D, const char* where);

// Generalized Wahba weight matrix W = D^T (D D^T)^-1 K (D D^T)^-1 D for a
// diagonal attitude gain K = diag(k1, k2, k3), k1 > k2 > k3 >= 1.
// Satisfies D W D^T = K.
struct WahbaWeights {
  Vec3 K_diag = Vec3(3.0, 2.0, 1.0);
  Eigen::MatrixXd W;  // n x n, symmetric PSD
  Mat3 K = Mat3::Zero();
};

[[nodiscard]] WahbaWeights compute_wahba_weights(const Eigen::Matrix3Xd& D, const Vec3& K_diag);

// L = D W E_m^T; equals K R (so L R_hat^T = K Q) for noise-free measurements.
[[nodiscard]] Mat3 compute_L(const Eigen::Matrix3Xd& D, const Eigen::MatrixXd& W,
                             const Eigen::Matrix3Xd& E_m);

// s_K(Q) = vee(K Q - Q^T K); the attitude-potential gradient direction.
[[nodiscard]] Vec3 s_K(const Mat3& Q, const Mat3& K);

// s_L = vee(L R_hat^T - R_hat L^T); the measured counterpart of s_K.
[[nodiscard]] Vec3 s_L_of(const Mat3& R_hat, const Mat3& L);

// Means (q_bar, a_bar_m) of the landmark set and the measured frame.
[[nodiscard]] std::pair<Vec3, Vec3> mean_vectors(const FeaturePointSet& points,
                                                 const FeatureFrame& frame);

// y = q_bar - R_hat a_bar_m - b_hat.
[[nodiscard]] Vec3 translation_residual_y(const Pose& g_hat, const Vec3& a_bar_m,
                                          const Vec3& q_bar);

struct Potentials {
  double U_t = 0.0;
  double U_r = 0.0;
  double U = 0.0;
};

// U_t = kappa/2 * y^T y, U_r = 1/2 <D - R_hat E_m, (D - R_hat E_m) W>.
[[nodiscard]] Potentials potentials(const Pose& g_hat, const PairVectorMatrices& pm,
                                    const WahbaWeights& weights, const Vec3& q_bar,
                                    const Vec3& a_bar_m, double kappa);

// Point-measurement noise model. `uniform` draws per-axis on
// [-std*sqrt(3), +std*sqrt(3)] so the requested standard deviation holds.
struct PointNoise {
  enum class Dist { None, Uniform, Gaussian };
  Dist dist = Dist::None;
  double std_dev = 0.0;
};

// a_i = R^T (q_i - b) + eta_i with eta_i drawn per the noise model.
// Draw order is one noise vector per point, in point order.
[[nodiscard]] FeatureFrame synthesize_frame(const Pose& true_pose, const FeaturePointSet& points,
                                            const PointNoise& noise, SplitMix64& rng,
                                            double t = 0.0);

}  // namespace ftspe
