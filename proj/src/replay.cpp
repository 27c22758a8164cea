#include "ftspe/replay.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ftspe/errors.hpp"

namespace ftspe {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<double> parse_row(const std::string& line, const std::string& path, int line_no) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = line.find(',', pos);
    const std::string tok =
        line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const char* c = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(c, &end);
    if (tok.empty() || end != c + tok.size())
      fail(path, line_no, "bad numeric field '" + tok + "'");
    vals.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return vals;
}

}  // namespace

std::vector<ReplayRecord> load_replay_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open replay file '" + path + "'");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) fail(path, 1, "empty replay file");
  ++line_no;
  if (line.rfind("t,gx,gy,gz", 0) != 0)
    fail(path, 1, "expected header starting with 't,gx,gy,gz'");

  std::vector<ReplayRecord> records;
  std::size_t expected_fields = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<double> vals = parse_row(line, path, line_no);
    if (expected_fields == 0) {
      if (vals.size() < 7 || (vals.size() - 4) % 3 != 0)
        fail(path, line_no, "expected 4 + 3*j fields with j >= 1, got " +
                                std::to_string(vals.size()));
      expected_fields = vals.size();
    } else if (vals.size() != expected_fields) {
      fail(path, line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                              std::to_string(vals.size()) + " (point count must not change)");
    }
    ReplayRecord rec;
    rec.t = vals[0];
    rec.gyro = Vec3(vals[1], vals[2], vals[3]);
    const std::size_t j = (vals.size() - 4) / 3;
    rec.points.reserve(j);
    for (std::size_t i = 0; i < j; ++i)
      rec.points.emplace_back(vals[4 + 3 * i], vals[5 + 3 * i], vals[6 + 3 * i]);
    if (!records.empty() && !(rec.t > records.back().t))
      fail(path, line_no, "timestamps must be strictly increasing");
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(path, line_no, "replay file has no data rows");
  return records;
}

void write_replay_csv(const std::vector<ReplayRecord>& records, const std::string& path) {
  if (records.empty()) throw ConfigError("refusing to write empty replay file");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write replay file '" + path + "'");
  out << "t,gx,gy,gz";
  for (std::size_t i = 1; i <= records[0].points.size(); ++i)
    out << ",p" << i << "x,p" << i << "y,p" << i << "z";
  out << "\n";
  for (const ReplayRecord& r : records) {
    out << fmt(r.t) << ',' << fmt(r.gyro.x()) << ',' << fmt(r.gyro.y()) << ','
        << fmt(r.gyro.z());
    for (const Vec3& p : r.points)
      out << ',' << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(p.z());
    out << "\n";
  }
  if (!out) throw Error("write failed for replay file '" + path + "'");
}

std::vector<ReplayRecord> export_replay(const MeasurementStream& stream) {
  std::vector<ReplayRecord> records;
  records.reserve(stream.epochs.size());
  for (const MeasurementEpoch& e : stream.epochs) {
    ReplayRecord r;
    r.t = e.t;
    r.gyro = e.xi_m.angular;
    r.points = e.frame.a;
    records.push_back(std::move(r));
  }
  return records;
}

ReplayResult run_replay(const std::vector<ReplayRecord>& records, const EstimatorConfigs& cfg) {
  if (records.size() < 2) throw ConfigError("replay needs at least two records");
  const std::size_t j = records[0].points.size();
  const double dt = records[1].t - records[0].t;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double step = records[k].t - records[k - 1].t;
    if (std::abs(step - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
      throw ConfigError("replay sample spacing is not uniform (record " + std::to_string(k) +
                        ")");
  }

  // Record 0 fixes the landmarks: the estimate is expressed in the frame the
  // body occupied at the first sample.
  FeaturePointSet landmarks{records[0].points};
  const RunGeometry geo = make_run_geometry(landmarks, cfg.K_diag);

  ReplayResult out;
  const std::size_t n = records.size();
  out.t.resize(n);
  out.g_hat.resize(n);
  out.xi_hat.resize(n);

  std::size_t k = 0;
  try {
    VelocityPipeline pipe(j, cfg.filter_params, dt);
    FeatureFrame frame{records[0].points, records[0].t};
    FilteredKinematics f = pipe.process(frame, records[0].gyro);

    ObserverState state = make_observer_state(cfg.init.g_hat0, f.xi_f, cfg.init.xi_hat0);
    FrameContext ctx;
    for (k = 0; k < n; ++k) {
      out.t[k] = records[k].t;
      out.g_hat[k] = state.g_hat;
      Vec6 phi_vec;
      phi_vec << state.omega, state.upsilon;
      out.xi_hat[k] =
          Twist::from_stacked(f.xi_f.stacked() - adjoint(inverse(state.g_hat)) * phi_vec);
      if (k + 1 == n) break;
      ctx.E_m = pair_columns(records[k].points);
      ctx.a_bar = f.a_bar_f;
      ctx.t = records[k].t;
      state = observer_step(state, geo, ctx, f.xi_f, cfg.fts_gains, dt);
      frame = FeatureFrame{records[k + 1].points, records[k + 1].t};
      f = pipe.process(frame, records[k + 1].gyro);
    }
  } catch (const Error& err) {
    throw Error("replay: step " + std::to_string(k) + ": " + err.what());
  }
  return out;
}

void write_estimate_csv(const ReplayResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write estimate file '" + path + "'");
  out << "t,R11,R12,R13,R21,R22,R23,R31,R32,R33,bx,by,bz,Omx,Omy,Omz,nux,nuy,nuz\n";
  for (std::size_t k = 0; k < result.t.size(); ++k) {
    out << fmt(result.t[k]);
    const Mat3& R = result.g_hat[k].R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << ',' << fmt(R(r, c));
    const Vec3& b = result.g_hat[k].p;
    out << ',' << fmt(b.x()) << ',' << fmt(b.y()) << ',' << fmt(b.z());
    const Twist& xi = result.xi_hat[k];
    out << ',' << fmt(xi.angular.x()) << ',' << fmt(xi.angular.y()) << ','
        << fmt(xi.angular.z()) << ',' << fmt(xi.linear.x()) << ',' << fmt(xi.linear.y()) << ','
        << fmt(xi.linear.z()) << "\n";
  }
  if (!out) throw Error("write failed for estimate file '" + path + "'");
}

}  // namespace ftspe
