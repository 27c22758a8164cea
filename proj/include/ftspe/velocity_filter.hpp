#pragma once

#include <vector>

#include "ftspe/measurements.hpp"

namespace ftspe {

struct FtsFilterParams {
  double r = 13.0 / 11.0;
  double lambda_c = 1.0;
  double eps_reg = 1e-9;
};

// Discrete finite-time-stable tracking filter for one vector signal:
//   z_f[k+1] = z_m[k] + D(c_k) c_k + D(dz_k) dz_k,
//   c_k = z_f[k] - z_m[k],  dz_k = z_f[k] - z_f[k-1],
//   D(c) = ((c^T c)^(1-1/r) - lambda_c) / ((c^T c)^(1-1/r) + lambda_c),
//   zdot_f[k] = (z_f[k+1] - z_f[k]) / dt.
// History is primed with the first sample so no spurious derivative spike
// occurs at startup.
class FtsVectorFilter {
 public:
  FtsVectorFilter(const FtsFilterParams& params, double dt);

  struct Output {
    Vec3 z_f;      // z_f[k+1], the freshest filtered value
    Vec3 z_dot_f;  // zdot_f[k]
  };

  Output step(const Vec3& z_m);

  [[nodiscard]] const Vec3& current() const { return z_curr_; }
  [[nodiscard]] bool primed() const { return primed_; }

 private:
  FtsFilterParams params_;
  double dt_;
  Vec3 z_prev_ = Vec3::Zero();
  Vec3 z_curr_ = Vec3::Zero();
  bool primed_ = false;
};

// D(c) above; in [-1, 1) for all c, and exactly -1 at c = 0.
[[nodiscard]] double fts_filter_gain(const Vec3& c, const FtsFilterParams& params);

// nu = (1/j) sum_i (hat(a_i) omega - v_i); the point-velocity relation
// v_i = hat(a_i) Omega - nu inverted in the least-squares mean sense.
[[nodiscard]] Vec3 reconstruct_nu(const std::vector<Vec3>& a_f, const std::vector<Vec3>& a_dot_f,
                                  const Vec3& omega_f);

struct FilteredKinematics {
  Vec3 omega_f = Vec3::Zero();
  std::vector<Vec3> a_f;
  std::vector<Vec3> a_dot_f;
  Vec3 a_bar_f = Vec3::Zero();
  Vec3 nu_f = Vec3::Zero();
  Twist xi_f;
};

[[nodiscard]] Twist assemble_xi_f(const FilteredKinematics& kin);

// One filter per measured signal: the gyro and each body point. Produces the
// filtered twist and point mean consumed by the observer when translational
// velocity is not measured. All published values at epoch k come from the
// same recursion output: values are z_f[k+1] and velocities zdot_f[k], i.e.
// the freshest snapshot derived from measurements through t_k.
class VelocityPipeline {
 public:
  VelocityPipeline(std::size_t num_points, const FtsFilterParams& params, double dt);

  FilteredKinematics process(const FeatureFrame& frame, const Vec3& gyro_m);

 private:
  FtsVectorFilter gyro_filter_;
  std::vector<FtsVectorFilter> point_filters_;
};

}  // namespace ftspe
