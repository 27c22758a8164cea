#include "ftspe/measurements.hpp"

#include <Eigen/SVD>
#include <fstream>
#include <sstream>

namespace ftspe {

Vec3 FeaturePointSet::mean() const {
  if (q.empty()) throw EmptyFrame("FeaturePointSet::mean: no points");
  Vec3 m = Vec3::Zero();
  for (const auto& v : q) m += v;
  return m / static_cast<double>(q.size());
}

FeaturePointSet default_feature_set() {
  FeaturePointSet s;
  s.q = {Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(0, 5, 0), Vec3(0, 0, 5)};
  return s;
}

FeaturePointSet load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("feature csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("feature csv: empty file " + path);
  FeaturePointSet s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    Vec3 p;
    char comma = 0;
    if (!(row >> p.x() >> comma >> p.y() >> comma >> p.z())) {
      throw ConfigError("feature csv: bad row at line " + std::to_string(lineno) + " in " + path);
    }
    s.q.push_back(p);
  }
  if (s.q.size() < 3) throw ConfigError("feature csv: need at least 3 points in " + path);
  return s;
}

Eigen::Matrix3Xd pair_columns(const std::vector<Vec3>& pts) {
  const std::size_t j = pts.size();
  if (j < 3) throw RankDeficient("pair_columns: need at least 3 points");
  if (j == 3) {
    Eigen::Matrix3Xd m(3, 3);
    m.col(0) = pts[1] - pts[0];
    m.col(1) = pts[2] - pts[0];
    m.col(2) = m.col(0).cross(m.col(1));
    return m;
  }
  Eigen::Matrix3Xd m(3, static_cast<int>(j * (j - 1) / 2));
  int c = 0;
  for (std::size_t lam = 0; lam < j; ++lam) {
    for (std::size_t ell = lam + 1; ell < j; ++ell) {
      m.col(c++) = pts[ell] - pts[lam];
    }
  }
  return m;
}

void require_rank3(const Eigen::Matrix3Xd& D, const char* where) {
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(D);
  const auto& s = svd.singularValues();
  if (s.size() < 3 || s(2) <= 1e-8 * s(0)) {
    throw RankDeficient(std::string(where) + ": pairwise-vector matrix has rank < 3");
  }
}

PairVectorMatrices build_pair_matrices(const FeaturePointSet& points, const FeatureFrame& frame) {
  if (points.size() != frame.a.size()) {
    throw EmptyFrame("build_pair_matrices: point/frame cardinality mismatch");
  }
  PairVectorMatrices pm;
  pm.D = pair_columns(points.q);
  pm.E_m = pair_columns(frame.a);
  pm.n = static_cast<int>(pm.D.cols());
  require_rank3(pm.D, "build_pair_matrices");
  return pm;
}

WahbaWeights compute_wahba_weights(const Eigen::Matrix3Xd& D, const Vec3& K_diag) {
  if (!(K_diag(0) > K_diag(1) && K_diag(1) > K_diag(2) && K_diag(2) >= 1.0)) {
    throw BadKOrdering("compute_wahba_weights: need k1 > k2 > k3 >= 1");
  }
  require_rank3(D, "compute_wahba_weights");
  WahbaWeights w;
  w.K_diag = K_diag;
  w.K = K_diag.asDiagonal();
  const Mat3 ddt_inv = (D * D.transpose()).inverse();
  w.W = D.transpose() * ddt_inv * w.K * ddt_inv * D;
  return w;
}

Mat3 compute_L(const Eigen::Matrix3Xd& D, const Eigen::MatrixXd& W, const Eigen::Matrix3Xd& E_m) {
  return D * W * E_m.transpose();
}

Vec3 s_K(const Mat3& Q, const Mat3& K) { return vee(K * Q - Q.transpose() * K); }

Vec3 s_L_of(const Mat3& R_hat, const Mat3& L) {
  const Mat3 lrt = L * R_hat.transpose();
  return vee(lrt - lrt.transpose());
}

std::pair<Vec3, Vec3> mean_vectors(const FeaturePointSet& points, const FeatureFrame& frame) {
  if (frame.a.empty()) throw EmptyFrame("mean_vectors: empty frame");
  Vec3 a_bar = Vec3::Zero();
  for (const auto& v : frame.a) a_bar += v;
  a_bar /= static_cast<double>(frame.a.size());
  return {points.mean(), a_bar};
}

Vec3 translation_residual_y(const Pose& g_hat, const Vec3& a_bar_m, const Vec3& q_bar) {
  return q_bar - g_hat.R * a_bar_m - g_hat.p;
}

Potentials potentials(const Pose& g_hat, const PairVectorMatrices& pm, const WahbaWeights& weights,
                      const Vec3& q_bar, const Vec3& a_bar_m, double kappa) {
  Potentials u;
  const Vec3 y = translation_residual_y(g_hat, a_bar_m, q_bar);
  u.U_t = 0.5 * kappa * y.squaredNorm();
  const Eigen::Matrix3Xd resid = pm.D - g_hat.R * pm.E_m;
  u.U_r = 0.5 * (resid.transpose() * resid * weights.W).trace();
  u.U = u.U_t + u.U_r;
  return u;
}

FeatureFrame synthesize_frame(const Pose& true_pose, const FeaturePointSet& points,
                              const PointNoise& noise, SplitMix64& rng, double t) {
  FeatureFrame f;
  f.t = t;
  f.a.reserve(points.size());
  const Mat3 rt = true_pose.R.transpose();
  for (const auto& q : points.q) {
    Vec3 a = rt * (q - true_pose.p);
    switch (noise.dist) {
      case PointNoise::Dist::None:
        break;
      case PointNoise::Dist::Uniform:
        a += rng.uniform_vec3_with_std(noise.std_dev);
        break;
      case PointNoise::Dist::Gaussian:
        a += rng.gaussian_vec3(noise.std_dev);
        break;
    }
    f.a.push_back(a);
  }
  return f;
}

}  // namespace ftspe
