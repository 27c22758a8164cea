#include "ftspe/velocity_filter.hpp"

#include <cmath>

namespace ftspe {

FtsVectorFilter::FtsVectorFilter(const FtsFilterParams& params, double dt)
    : params_(params), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("fts filter: dt must be positive");
  if (!(params.r > 1.0 && params.r < 2.0)) throw ConfigError("fts filter: r must lie in (1,2)");
  if (!(params.lambda_c > 0.0)) throw ConfigError("fts filter: lambda_c must be positive");
}

double fts_filter_gain(const Vec3& c, const FtsFilterParams& params) {
  const double sq = c.squaredNorm();
  // At c = 0 the gain is exactly -1 and the product D(c)c is exactly 0; the
  // floor only guards the pow() evaluation for denormal-scale inputs.
  const double x = sq < params.eps_reg ? 0.0 : std::pow(sq, 1.0 - 1.0 / params.r);
  return (x - params.lambda_c) / (x + params.lambda_c);
}

FtsVectorFilter::Output FtsVectorFilter::step(const Vec3& z_m) {
  if (!primed_) {
    z_prev_ = z_m;
    z_curr_ = z_m;
    primed_ = true;
  }
  const Vec3 c = z_curr_ - z_m;
  const Vec3 dz = z_curr_ - z_prev_;
  const Vec3 z_next = z_m + fts_filter_gain(c, params_) * c + fts_filter_gain(dz, params_) * dz;
  Output out;
  out.z_f = z_next;
  out.z_dot_f = (z_next - z_curr_) / dt_;
  z_prev_ = z_curr_;
  z_curr_ = z_next;
  return out;
}

Vec3 reconstruct_nu(const std::vector<Vec3>& a_f, const std::vector<Vec3>& a_dot_f,
                    const Vec3& omega_f) {
  if (a_f.empty() || a_f.size() != a_dot_f.size()) {
    throw EmptyFrame("reconstruct_nu: empty or mismatched point lists");
  }
  Vec3 nu = Vec3::Zero();
  for (std::size_t i = 0; i < a_f.size(); ++i) {
    nu += a_f[i].cross(omega_f) - a_dot_f[i];
  }
  return nu / static_cast<double>(a_f.size());
}

Twist assemble_xi_f(const FilteredKinematics& kin) { return {kin.omega_f, kin.nu_f}; }

VelocityPipeline::VelocityPipeline(std::size_t num_points, const FtsFilterParams& params,
                                   double dt)
    : gyro_filter_(params, dt) {
  point_filters_.reserve(num_points);
  for (std::size_t i = 0; i < num_points; ++i) point_filters_.emplace_back(params, dt);
}

FilteredKinematics VelocityPipeline::process(const FeatureFrame& frame, const Vec3& gyro_m) {
  if (frame.a.size() != point_filters_.size()) {
    throw EmptyFrame("VelocityPipeline: frame cardinality changed mid-run");
  }
  FilteredKinematics kin;
  const auto gyro = gyro_filter_.step(gyro_m);
  kin.omega_f = gyro.z_f;
  kin.a_f.reserve(frame.a.size());
  kin.a_dot_f.reserve(frame.a.size());
  Vec3 a_bar = Vec3::Zero();
  for (std::size_t i = 0; i < frame.a.size(); ++i) {
    const auto out = point_filters_[i].step(frame.a[i]);
    kin.a_f.push_back(out.z_f);
    kin.a_dot_f.push_back(out.z_dot_f);
    a_bar += out.z_f;
  }
  kin.a_bar_f = a_bar / static_cast<double>(frame.a.size());
  kin.nu_f = reconstruct_nu(kin.a_f, kin.a_dot_f, kin.omega_f);
  kin.xi_f = assemble_xi_f(kin);
  return kin;
}

}  // namespace ftspe
