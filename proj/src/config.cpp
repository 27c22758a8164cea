#include "ftspe/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftspe/errors.hpp"

namespace ftspe {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_plain(const std::string& s) {
  const char* c = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(c, &end);
  if (end != c + s.size() || s.empty()) throw ConfigError("bad numeric literal '" + s + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<double> parse_scalars(const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split_ws(value)) out.push_back(parse_scalar(tok));
  return out;
}

Vec3 parse_vec3(const std::string& value) {
  const auto v = parse_scalars(value);
  if (v.size() != 3) throw ConfigError("expected 3 values, got " + std::to_string(v.size()));
  return Vec3(v[0], v[1], v[2]);
}

// 1 value -> c*I, 3 -> diagonal, 9 -> row-major full matrix.
Mat3 parse_mat3(const std::string& value) {
  const auto v = parse_scalars(value);
  if (v.size() == 1) return v[0] * Mat3::Identity();
  if (v.size() == 3) return Vec3(v[0], v[1], v[2]).asDiagonal();
  if (v.size() == 9) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c];
    return m;
  }
  throw ConfigError("expected 1, 3, or 9 values, got " + std::to_string(v.size()));
}

// 1 value -> c*I6, 6 -> diagonal.
Mat6 parse_diag6(const std::string& value) {
  const auto v = parse_scalars(value);
  if (v.size() == 1) return v[0] * Mat6::Identity();
  if (v.size() == 6) {
    Mat6 m = Mat6::Zero();
    for (int i = 0; i < 6; ++i) m(i, i) = v[i];
    return m;
  }
  throw ConfigError("expected 1 or 6 values, got " + std::to_string(v.size()));
}

Mat3 parse_rotation9(const std::string& value) {
  const auto v = parse_scalars(value);
  if (v.size() != 9) throw ConfigError("expected 9 row-major values");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c];
  require_rotation(m, "config rotation");
  return m;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "'");
}

std::uint64_t parse_u64(const std::string& value) {
  const char* c = value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(c, &end, 10);
  // strtoull silently wraps negative literals; reject any sign character.
  if (end != c + value.size() || value.empty() || value.find_first_of("+-") != std::string::npos)
    throw ConfigError("bad integer literal '" + value + "'");
  return static_cast<std::uint64_t>(v);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_vec3(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

std::string fmt_mat3(const Mat3& m) {
  std::string s;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (r + c) s += ' ';
      s += fmt(m(r, c));
    }
  return s;
}

std::string fmt_diag6(const Mat6& m) {
  std::string s;
  for (int i = 0; i < 6; ++i) {
    if (i) s += ' ';
    s += fmt(m(i, i));
  }
  return s;
}

struct AxisAngle {
  double angle = 0.0;
  Vec3 axis = Vec3::UnitX();
  bool angle_set = false, axis_set = false;
};

void apply_axis_angle(Mat3& R, const AxisAngle& aa) {
  if (aa.angle_set || aa.axis_set) {
    const double n = aa.axis.norm();
    if (n <= 0.0) throw ConfigError("rotation axis must be nonzero");
    R = exp_so3(aa.angle * (aa.axis / n));
  }
}

}  // namespace

double parse_scalar(const std::string& token) {
  const std::string s = trim(token);
  if (s.empty()) throw ConfigError("empty numeric literal");
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const double num = parse_scalar(s.substr(0, slash));
    const double den = parse_scalar(s.substr(slash + 1));
    if (den == 0.0) throw ConfigError("zero denominator in '" + s + "'");
    return num / den;
  }
  if (s == "pi") return kPi;
  if (s == "-pi") return -kPi;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "pi") == 0)
    return parse_plain(s.substr(0, s.size() - 2)) * kPi;
  return parse_plain(s);
}

std::vector<std::string> preset_names() {
  return {"paper-7.1-noisefree", "paper-7.1-noisy", "paper-7.2", "paper-7.3-like"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;  // defaults already carry the reference scenario constants
  cfg.preset = name;
  if (name == "paper-7.1-noisefree") {
    cfg.seeds = {1};
    return cfg;
  }
  const double gyro_std = 9.1673 * kPi / 180.0;
  if (name == "paper-7.1-noisy") {
    cfg.noise.gyro_std = gyro_std;
    cfg.noise.transvel_std = 0.02;
    cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return cfg;
  }
  if (name == "paper-7.2") {
    cfg.noise.gyro_std = gyro_std;
    cfg.noise.transvel_std = 0.02;
    cfg.noise.point_noise.dist = PointNoise::Dist::Uniform;
    cfg.noise.point_noise.std_dev = 0.15;
    cfg.estimators.vpe = true;
    cfg.estimators.dqmekf = true;
    cfg.seeds = {1, 2, 3, 4, 5};
    return cfg;
  }
  if (name == "paper-7.3-like") {
    cfg.traj.dt = 0.0702;
    cfg.traj.T = 30.82;
    cfg.noise.gyro_std = gyro_std;
    cfg.noise.point_noise.dist = PointNoise::Dist::Uniform;
    cfg.noise.point_noise.std_dev = 0.15;
    cfg.est.init.xi_hat0.angular = Vec3(-0.7500, -0.4910, -0.1070);
    cfg.est.init.xi_hat0.linear = Vec3(-0.9501, -1.2812, 3.0536);
    cfg.est.use_velocity_filter = true;  // translational velocity is not measured
    cfg.est.filter_params.lambda_c = 1.0;
    cfg.seeds = {1};
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  // First pass: find a preset key (it forms the base regardless of position).
  std::vector<std::tuple<int, std::string, std::string, std::string>> entries;  // line, sec, k, v
  {
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(is, raw)) {
      ++line_no;
      std::string line = raw;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(origin, line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(origin, line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(origin, line_no, "empty key");
      if (section.empty()) fail(origin, line_no, "key outside any [section]");
      entries.emplace_back(line_no, section, key, value);
    }
  }

  RunConfig cfg;
  for (const auto& [ln, sec, key, value] : entries) {
    if (sec == "run" && key == "preset") {
      try {
        cfg = preset_config(value);
      } catch (const Error& e) {
        fail(origin, ln, e.what());
      }
      break;
    }
  }

  AxisAngle r0_aa, rhat0_aa;
  for (const auto& [ln, sec, key, value] : entries) {
    try {
      if (sec == "run") {
        if (key == "preset") continue;  // applied above
        if (key == "seeds") {
          cfg.seeds.clear();
          for (const auto& tok : split_ws(value)) cfg.seeds.push_back(parse_u64(tok));
        } else if (key == "out_dir") {
          cfg.out_dir = value;
        } else if (key == "plot") {
          cfg.plot = parse_bool(value);
        } else if (key == "feature_file") {
          cfg.feature_file = value;
        } else if (key == "estimators") {
          cfg.estimators = EstimatorSelection{false, false, false};
          for (const auto& tok : split_on(value, ',')) {
            if (tok == "fts") cfg.estimators.fts = true;
            else if (tok == "vpe") cfg.estimators.vpe = true;
            else if (tok == "dqmekf") cfg.estimators.dqmekf = true;
            else throw ConfigError("unknown estimator '" + tok + "'");
          }
        } else {
          throw ConfigError("unknown key '" + key + "' in [run]");
        }
      } else if (sec == "trajectory") {
        if (key == "profile") {
          if (value == "constant") cfg.traj.profile = TrajectorySpec::Profile::Constant;
          else if (value == "sinusoidal") cfg.traj.profile = TrajectorySpec::Profile::Sinusoidal;
          else throw ConfigError("unknown profile '" + value + "'");
        } else if (key == "R0") cfg.traj.R0 = parse_rotation9(value);
        else if (key == "R0_angle") { r0_aa.angle = parse_scalar(value); r0_aa.angle_set = true; }
        else if (key == "R0_axis") { r0_aa.axis = parse_vec3(value); r0_aa.axis_set = true; }
        else if (key == "b0") cfg.traj.b0 = parse_vec3(value);
        else if (key == "Omega0") cfg.traj.xi0.angular = parse_vec3(value);
        else if (key == "nu0") cfg.traj.xi0.linear = parse_vec3(value);
        else if (key == "amplitude_Omega") cfg.traj.amplitude.angular = parse_vec3(value);
        else if (key == "amplitude_nu") cfg.traj.amplitude.linear = parse_vec3(value);
        else if (key == "frequency_hz") cfg.traj.frequency_hz = parse_scalar(value);
        else if (key == "dt") cfg.traj.dt = parse_scalar(value);
        else if (key == "T") cfg.traj.T = parse_scalar(value);
        else throw ConfigError("unknown key '" + key + "' in [trajectory]");
      } else if (sec == "noise") {
        if (key == "gyro_std_deg") cfg.noise.gyro_std = parse_scalar(value) * kPi / 180.0;
        else if (key == "gyro_std_rad") cfg.noise.gyro_std = parse_scalar(value);
        else if (key == "transvel_std") cfg.noise.transvel_std = parse_scalar(value);
        else if (key == "point_noise") {
          if (value == "none") cfg.noise.point_noise.dist = PointNoise::Dist::None;
          else if (value == "uniform") cfg.noise.point_noise.dist = PointNoise::Dist::Uniform;
          else if (value == "gaussian") cfg.noise.point_noise.dist = PointNoise::Dist::Gaussian;
          else throw ConfigError("unknown point_noise '" + value + "'");
        } else if (key == "point_noise_std") cfg.noise.point_noise.std_dev = parse_scalar(value);
        else if (key == "seed") cfg.noise.seed = parse_u64(value);
        else throw ConfigError("unknown key '" + key + "' in [noise]");
      } else if (sec == "gains") {
        ObserverGains& g = cfg.est.fts_gains;
        if (key == "p") g.p = parse_scalar(value);
        else if (key == "kappa") g.kappa = parse_scalar(value);
        else if (key == "k_p") g.k_p = parse_scalar(value);
        else if (key == "k_omega") g.k_omega = parse_scalar(value);
        else if (key == "k_upsilon") g.k_upsilon = parse_scalar(value);
        else if (key == "alpha1") g.alpha1 = parse_scalar(value);
        else if (key == "alpha2") g.alpha2 = parse_scalar(value);
        else if (key == "eps_reg") g.eps_reg = parse_scalar(value);
        else throw ConfigError("unknown key '" + key + "' in [gains]");
      } else if (sec == "attitude_weights") {
        if (key == "K") cfg.est.K_diag = parse_vec3(value);
        else throw ConfigError("unknown key '" + key + "' in [attitude_weights]");
      } else if (sec == "init") {
        if (key == "Rhat0") cfg.est.init.g_hat0.R = parse_rotation9(value);
        else if (key == "Rhat0_angle") { rhat0_aa.angle = parse_scalar(value); rhat0_aa.angle_set = true; }
        else if (key == "Rhat0_axis") { rhat0_aa.axis = parse_vec3(value); rhat0_aa.axis_set = true; }
        else if (key == "bhat0") cfg.est.init.g_hat0.p = parse_vec3(value);
        else if (key == "Omegahat0") cfg.est.init.xi_hat0.angular = parse_vec3(value);
        else if (key == "nuhat0") cfg.est.init.xi_hat0.linear = parse_vec3(value);
        else throw ConfigError("unknown key '" + key + "' in [init]");
      } else if (sec == "filter") {
        if (key == "use_velocity_filter") cfg.est.use_velocity_filter = parse_bool(value);
        else if (key == "r") cfg.est.filter_params.r = parse_scalar(value);
        else if (key == "lambda_c") cfg.est.filter_params.lambda_c = parse_scalar(value);
        else if (key == "eps_reg") cfg.est.filter_params.eps_reg = parse_scalar(value);
        else throw ConfigError("unknown key '" + key + "' in [filter]");
      } else if (sec == "vpe") {
        VpeParams& v = cfg.est.vpe_params;
        if (key == "J") v.J = parse_mat3(value);
        else if (key == "M") v.M = parse_mat3(value);
        else if (key == "D_t") v.D_t = parse_mat3(value);
        else if (key == "D_r") v.D_r = parse_mat3(value);
        else if (key == "kappa") v.kappa = parse_scalar(value);
        else if (key == "Phi_prime") v.phi_prime = parse_scalar(value);
        else throw ConfigError("unknown key '" + key + "' in [vpe]");
      } else if (sec == "dqmekf") {
        DqMekfParams& d = cfg.est.dq_params;
        if (key == "P0_diag") d.P0 = parse_diag6(value);
        else if (key == "Q_diag") d.Q_proc = parse_diag6(value);
        else if (key == "R_diag") d.R_meas = parse_diag6(value);
        else throw ConfigError("unknown key '" + key + "' in [dqmekf]");
      } else {
        throw ConfigError("unknown section [" + sec + "]");
      }
    } catch (const Error& e) {
      fail(origin, ln, e.what());
    }
  }
  try {
    apply_axis_angle(cfg.traj.R0, r0_aa);
    apply_axis_angle(cfg.est.init.g_hat0.R, rhat0_aa);
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "[run]\n";
  if (!cfg.preset.empty()) o << "preset = " << cfg.preset << "\n";
  o << "seeds =";
  for (auto s : cfg.seeds) o << ' ' << s;
  o << "\n";
  o << "out_dir = " << cfg.out_dir << "\n";
  o << "plot = " << (cfg.plot ? "true" : "false") << "\n";
  if (!cfg.feature_file.empty()) o << "feature_file = " << cfg.feature_file << "\n";
  o << "estimators = ";
  {
    std::string sel;
    if (cfg.estimators.fts) sel += "fts";
    if (cfg.estimators.vpe) sel += (sel.empty() ? "" : ",") + std::string("vpe");
    if (cfg.estimators.dqmekf) sel += (sel.empty() ? "" : ",") + std::string("dqmekf");
    o << sel << "\n";
  }
  o << "\n[trajectory]\n";
  o << "profile = "
    << (cfg.traj.profile == TrajectorySpec::Profile::Constant ? "constant" : "sinusoidal") << "\n";
  o << "R0 = " << fmt_mat3(cfg.traj.R0) << "\n";
  o << "b0 = " << fmt_vec3(cfg.traj.b0) << "\n";
  o << "Omega0 = " << fmt_vec3(cfg.traj.xi0.angular) << "\n";
  o << "nu0 = " << fmt_vec3(cfg.traj.xi0.linear) << "\n";
  o << "amplitude_Omega = " << fmt_vec3(cfg.traj.amplitude.angular) << "\n";
  o << "amplitude_nu = " << fmt_vec3(cfg.traj.amplitude.linear) << "\n";
  o << "frequency_hz = " << fmt(cfg.traj.frequency_hz) << "\n";
  o << "dt = " << fmt(cfg.traj.dt) << "\n";
  o << "T = " << fmt(cfg.traj.T) << "\n";
  o << "\n[noise]\n";
  o << "gyro_std_rad = " << fmt(cfg.noise.gyro_std) << "\n";
  o << "transvel_std = " << fmt(cfg.noise.transvel_std) << "\n";
  const char* pn = cfg.noise.point_noise.dist == PointNoise::Dist::None ? "none"
                   : cfg.noise.point_noise.dist == PointNoise::Dist::Uniform ? "uniform"
                                                                             : "gaussian";
  o << "point_noise = " << pn << "\n";
  o << "point_noise_std = " << fmt(cfg.noise.point_noise.std_dev) << "\n";
  o << "seed = " << cfg.noise.seed << "\n";
  o << "\n[gains]\n";
  const ObserverGains& g = cfg.est.fts_gains;
  o << "p = " << fmt(g.p) << "\n";
  o << "kappa = " << fmt(g.kappa) << "\n";
  o << "k_p = " << fmt(g.k_p) << "\n";
  o << "k_omega = " << fmt(g.k_omega) << "\n";
  o << "k_upsilon = " << fmt(g.k_upsilon) << "\n";
  o << "alpha1 = " << fmt(g.alpha1) << "\n";
  o << "alpha2 = " << fmt(g.alpha2) << "\n";
  o << "eps_reg = " << fmt(g.eps_reg) << "\n";
  o << "\n[attitude_weights]\n";
  o << "K = " << fmt_vec3(cfg.est.K_diag) << "\n";
  o << "\n[init]\n";
  o << "Rhat0 = " << fmt_mat3(cfg.est.init.g_hat0.R) << "\n";
  o << "bhat0 = " << fmt_vec3(cfg.est.init.g_hat0.p) << "\n";
  o << "Omegahat0 = " << fmt_vec3(cfg.est.init.xi_hat0.angular) << "\n";
  o << "nuhat0 = " << fmt_vec3(cfg.est.init.xi_hat0.linear) << "\n";
  o << "\n[filter]\n";
  o << "use_velocity_filter = " << (cfg.est.use_velocity_filter ? "true" : "false") << "\n";
  o << "r = " << fmt(cfg.est.filter_params.r) << "\n";
  o << "lambda_c = " << fmt(cfg.est.filter_params.lambda_c) << "\n";
  o << "eps_reg = " << fmt(cfg.est.filter_params.eps_reg) << "\n";
  o << "\n[vpe]\n";
  const VpeParams& v = cfg.est.vpe_params;
  o << "J = " << fmt_mat3(v.J) << "\n";
  o << "M = " << fmt_mat3(v.M) << "\n";
  o << "D_t = " << fmt_mat3(v.D_t) << "\n";
  o << "D_r = " << fmt_mat3(v.D_r) << "\n";
  o << "kappa = " << fmt(v.kappa) << "\n";
  o << "Phi_prime = " << fmt(v.phi_prime) << "\n";
  o << "\n[dqmekf]\n";
  const DqMekfParams& d = cfg.est.dq_params;
  o << "P0_diag = " << fmt_diag6(d.P0) << "\n";
  o << "Q_diag = " << fmt_diag6(d.Q_proc) << "\n";
  o << "R_diag = " << fmt_diag6(d.R_meas) << "\n";
  return o.str();
}

void write_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << emit_config(cfg);
}

void RunConfig::validate() const {
  traj.validate();
  est.fts_gains.validate();
  est.vpe_params.validate();
  if (est.filter_params.r <= 1.0 || est.filter_params.r >= 2.0)
    throw ConfigError("filter exponent r must lie in (1, 2)");
  if (est.filter_params.lambda_c <= 0.0) throw ConfigError("filter lambda_c must be positive");
  if (est.filter_params.eps_reg < 0.0) throw ConfigError("filter eps_reg must be nonnegative");
  if (seeds.empty()) throw ConfigError("seeds list is empty");
  if (noise.gyro_std < 0 || noise.transvel_std < 0 || noise.point_noise.std_dev < 0)
    throw ConfigError("noise standard deviations must be nonnegative");
  if (!(estimators.fts || estimators.vpe || estimators.dqmekf))
    throw ConfigError("no estimator selected");
  const Vec3& k = est.K_diag;
  if (!(k(0) > k(1) && k(1) > k(2) && k(2) >= 1.0))
    throw ConfigError("attitude weights K must satisfy k1 > k2 > k3 >= 1");
  for (int i = 0; i < 6; ++i)
    if (est.dq_params.P0(i, i) < 0 || est.dq_params.Q_proc(i, i) < 0 ||
        est.dq_params.R_meas(i, i) < 0)
      throw ConfigError("dqmekf covariance diagonals must be nonnegative");
  if (!feature_file.empty() && !std::filesystem::exists(feature_file))
    throw ConfigError("feature file '" + feature_file + "' does not exist");
}

FeaturePointSet RunConfig::features() const {
  if (feature_file.empty()) return default_feature_set();
  return load_feature_csv(feature_file);
}

}  // namespace ftspe
