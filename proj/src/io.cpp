#include "ftspe/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ftspe/errors.hpp"

namespace ftspe {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_kv(std::string& s, const char* key, double v) {
  s += key;
  s += '=';
  s += fmt(v);
  s += ';';
}

void append_mat(std::string& s, const char* key, const Mat3& m) {
  s += key;
  s += '=';
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      s += fmt(m(r, c));
      s += (r == 2 && c == 2) ? ';' : ' ';
    }
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* b = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& data) { return fnv1a64(data.data(), data.size()); }

std::string gains_digest(const EstimatorConfigs& est) {
  std::string s;
  const ObserverGains& g = est.fts_gains;
  append_kv(s, "p", g.p);
  append_kv(s, "kappa", g.kappa);
  append_kv(s, "k_p", g.k_p);
  append_kv(s, "k_omega", g.k_omega);
  append_kv(s, "k_upsilon", g.k_upsilon);
  append_kv(s, "alpha1", g.alpha1);
  append_kv(s, "alpha2", g.alpha2);
  append_kv(s, "eps_reg", g.eps_reg);
  append_kv(s, "K1", est.K_diag(0));
  append_kv(s, "K2", est.K_diag(1));
  append_kv(s, "K3", est.K_diag(2));
  const VpeParams& v = est.vpe_params;
  append_mat(s, "vpe_J", v.J);
  append_mat(s, "vpe_M", v.M);
  append_mat(s, "vpe_D_t", v.D_t);
  append_mat(s, "vpe_D_r", v.D_r);
  append_kv(s, "vpe_kappa", v.kappa);
  append_kv(s, "vpe_Phi_prime", v.phi_prime);
  const DqMekfParams& d = est.dq_params;
  for (int i = 0; i < 6; ++i) append_kv(s, "dq_P0", d.P0(i, i));
  for (int i = 0; i < 6; ++i) append_kv(s, "dq_Q", d.Q_proc(i, i));
  for (int i = 0; i < 6; ++i) append_kv(s, "dq_R", d.R_meas(i, i));
  append_kv(s, "filter_on", est.use_velocity_filter ? 1.0 : 0.0);
  append_kv(s, "filter_r", est.filter_params.r);
  append_kv(s, "filter_lambda_c", est.filter_params.lambda_c);
  append_kv(s, "filter_eps_reg", est.filter_params.eps_reg);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
}

void write_scenario_csv(const ScenarioLog& log, const EstimatorConfigs& est,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write log file '" + path + "'");
  out << "# seed=" << log.seed << " dt=" << fmt(log.dt) << " gains_digest=" << gains_digest(est)
      << " rng=" << log.rng_algorithm << "\n";
  out << "t,estimator,phi,chi_norm,wx,wy,wz,vx,vy,vz,V\n";
  const std::size_t steps = log.truth.size();
  for (std::size_t k = 0; k < steps; ++k) {
    for (const EstimatorRun& run : log.runs) {
      const StepRecord& r = run.records[k];
      out << fmt(r.t) << ',' << run.name << ',' << fmt(r.phi) << ',' << fmt(r.chi_norm) << ','
          << fmt(r.omega_err.x()) << ',' << fmt(r.omega_err.y()) << ',' << fmt(r.omega_err.z())
          << ',' << fmt(r.upsilon_err.x()) << ',' << fmt(r.upsilon_err.y()) << ','
          << fmt(r.upsilon_err.z()) << ',' << fmt(r.V) << "\n";
    }
  }
  if (!out) throw Error("write failed for log file '" + path + "'");
}

namespace {

std::string fmt_cell(double v) {
  char buf[32];
  if (std::isinf(v)) return "never";
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct Agg {
  double sum_phi = 0, sum_chi = 0, sum_wall = 0;
  int n = 0;
};

void print_row(std::ostringstream& o, const std::string& a, const std::string& b,
               const std::string& c, const std::string& d, const std::string& e,
               const std::string& f) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %-8s %14s %14s %14s %14s\n", a.c_str(), b.c_str(),
                c.c_str(), d.c_str(), e.c_str(), f.c_str());
  o << buf;
}

}  // namespace

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream o;
  print_row(o, "seed", "est", "rms_phi[rad]", "rms_chi[m]", "settle_phi[s]", "settle_chi[s]");
  std::map<std::string, Agg> agg;
  for (const auto& r : rows) {
    print_row(o, std::to_string(r.seed), r.estimator, fmt_cell(r.m.rms_phi), fmt_cell(r.m.rms_chi),
              fmt_cell(r.m.settle_phi), fmt_cell(r.m.settle_chi));
    auto& a = agg[r.estimator];
    a.sum_phi += r.m.rms_phi;
    a.sum_chi += r.m.rms_chi;
    ++a.n;
  }
  if (rows.size() > agg.size()) {
    o << "--\n";
    for (const auto& [name, a] : agg)
      print_row(o, "mean", name, fmt_cell(a.sum_phi / a.n), fmt_cell(a.sum_chi / a.n), "-", "-");
  }
  return o.str();
}

std::string format_walltime_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream o;
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%-8s %-8s %14s\n", "seed", "est", "wall_time[s]");
  o << buf;
  std::map<std::string, Agg> agg;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-8s %-8s %14.6f\n", std::to_string(r.seed).c_str(),
                  r.estimator.c_str(), r.m.wall_time);
    o << buf;
    auto& a = agg[r.estimator];
    a.sum_wall += r.m.wall_time;
    ++a.n;
  }
  if (rows.size() > agg.size()) {
    o << "--\n";
    for (const auto& [name, a] : agg) {
      std::snprintf(buf, sizeof(buf), "%-8s %-8s %14.6f\n", "mean", name.c_str(), a.sum_wall / a.n);
      o << buf;
    }
  }
  return o.str();
}

namespace {

struct Series {
  std::string name;
  std::vector<double> t, v;
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

void write_svg(const std::string& path, const std::string& title, const std::string& y_label,
               const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write plot file '" + path + "'");

  const double W = 720, H = 420, ml = 70, mr = 20, mt = 40, mb = 45;
  double t0 = 0, t1 = 1, v0 = 0, v1 = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!std::isfinite(s.v[i])) continue;
      if (first) {
        t0 = t1 = s.t[i];
        v0 = v1 = s.v[i];
        first = false;
      }
      t0 = std::min(t0, s.t[i]);
      t1 = std::max(t1, s.t[i]);
      v0 = std::min(v0, s.v[i]);
      v1 = std::max(v1, s.v[i]);
    }
  if (t1 <= t0) t1 = t0 + 1;
  if (v1 <= v0) v1 = v0 + 1;
  const double pad = 0.05 * (v1 - v0);
  v0 -= pad;
  v1 += pad;
  const auto X = [&](double t) { return ml + (t - t0) / (t1 - t0) * (W - ml - mr); };
  const auto Y = [&](double v) { return H - mb - (v - v0) / (v1 - v0) * (H - mt - mb); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";

  char buf[256];
  for (int i = 0; i <= 5; ++i) {  // grid + tick labels
    const double tv = t0 + (t1 - t0) * i / 5.0, vv = v0 + (v1 - v0) * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n",
                  X(tv), Y(v0), X(tv), Y(v1));
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>\n",
                  X(t0), Y(vv), X(t1), Y(vv));
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.3g</text>\n",
                  X(tv), H - mb + 16, tv);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.3g</text>\n",
                  ml - 6, Y(vv) + 4, vv);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"12\">t [s]</text>\n",
                ml + (W - ml - mr) / 2, H - 8.0);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                "font-size=\"12\" transform=\"rotate(-90 16 %.1f)\">%s</text>\n",
                mt + (H - mt - mb) / 2, mt + (H - mt - mb) / 2, y_label.c_str());
  out << buf;

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << kColors[si % 4]
        << "\" stroke-width=\"1.3\" points=\"";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!std::isfinite(s.v[i])) continue;
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", X(s.t[i]),
                    std::clamp(Y(s.v[i]), -1e4, 1e4));
      out << buf;
    }
    out << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "fill=\"%s\">%s</text>\n",
                  W - mr - 90.0, mt + 16.0 * (si + 1), kColors[si % 4], s.name.c_str());
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace

void write_svg_plots(const ScenarioLog& log, const std::string& dir, const std::string& stem) {
  ensure_directory(dir);
  const struct {
    const char* suffix;
    const char* title;
    const char* y_label;
    double (*pick)(const StepRecord&);
  } plots[] = {
      {"phi", "Attitude error", "phi [rad]", [](const StepRecord& r) { return r.phi; }},
      {"chi", "Position error", "||chi|| [m]", [](const StepRecord& r) { return r.chi_norm; }},
      {"omega_err", "Angular velocity error", "||omega|| [rad/s]",
       [](const StepRecord& r) { return r.omega_err.norm(); }},
      {"upsilon_err", "Translational velocity error", "||upsilon|| [m/s]",
       [](const StepRecord& r) { return r.upsilon_err.norm(); }},
  };
  for (const auto& p : plots) {
    std::vector<Series> series;
    for (const EstimatorRun& run : log.runs) {
      Series s;
      s.name = run.name;
      s.t.reserve(run.records.size());
      s.v.reserve(run.records.size());
      for (const StepRecord& r : run.records) {
        s.t.push_back(r.t);
        s.v.push_back(p.pick(r));
      }
      series.push_back(std::move(s));
    }
    write_svg(dir + "/" + stem + "_" + p.suffix + ".svg", p.title, p.y_label, series);
  }
}

}  // namespace ftspe
