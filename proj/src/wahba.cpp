#include <Eigen/SVD>

#include "ftspe/baselines.hpp"
#include "ftspe/errors.hpp"

namespace ftspe {

Mat3 wahba_svd(const Eigen::Matrix3Xd& D, const Eigen::Matrix3Xd& E_m,
               const Eigen::VectorXd& weights_diag) {
  if (D.cols() == 0 || D.cols() != E_m.cols() || D.cols() != weights_diag.size()) {
    throw EmptyFrame("wahba_svd: mismatched or empty column sets");
  }
  Mat3 B = D * weights_diag.asDiagonal() * E_m.transpose();
  Eigen::JacobiSVD<Mat3> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (sigma(1) <= 1e-12 * sigma(0)) {
    throw DegenerateProfile("wahba_svd: profile matrix is rank-deficient");
  }
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  const double det_correction = (U * V.transpose()).determinant();
  return U * Vec3(1.0, 1.0, det_correction).asDiagonal() * V.transpose();
}

double wahba_cost(const Mat3& R, const Eigen::Matrix3Xd& D, const Eigen::Matrix3Xd& E_m,
                  const Eigen::VectorXd& weights_diag) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < D.cols(); ++i) {
    cost += weights_diag(i) * (D.col(i) - R * E_m.col(i)).squaredNorm();
  }
  return 0.5 * cost;
}

}  // namespace ftspe
