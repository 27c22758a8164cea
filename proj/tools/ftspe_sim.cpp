// Command-line front end: scenario simulation, estimator comparison, offline
// replay of recorded point-cloud + gyro data, and gain validation.
//
// Exit codes: 0 success, 1 semantic validation failure, 2 bad input,
// 3 runtime estimator failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftspe/config.hpp"
#include "ftspe/io.hpp"
#include "ftspe/replay.hpp"

namespace {

using namespace ftspe;

struct CommonOpts {
  std::string preset;
  std::string config_path;
  std::string out_dir;
  long seeds_n = 0;
  std::string estimators;
  bool plot = true;
  CLI::Option* plot_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  std::string presets;
  for (const auto& p : preset_names()) presets += (presets.empty() ? "" : ", ") + p;
  cmd->add_option("--preset", c.preset, "Scenario preset: " + presets);
  cmd->add_option("--config", c.config_path, "Config file; its values override the preset");
  cmd->add_option("--seeds", c.seeds_n, "Run seeds 1..N")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out_dir, "Output directory (default from config)");
  cmd->add_option("--estimators", c.estimators, "Comma list from fts,vpe,dqmekf");
  c.plot_opt = cmd->add_flag("--plot,!--no-plot", c.plot, "Emit SVG plots next to the CSV logs");
}

EstimatorSelection parse_estimators(const std::string& list) {
  EstimatorSelection sel{false, false, false};
  std::string cur;
  const auto take = [&](const std::string& tok) {
    if (tok == "fts") sel.fts = true;
    else if (tok == "vpe") sel.vpe = true;
    else if (tok == "dqmekf") sel.dqmekf = true;
    else throw ConfigError("unknown estimator '" + tok + "'");
  };
  for (char ch : list) {
    if (ch == ',') {
      take(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  take(cur);
  return sel;
}

RunConfig make_config(const CommonOpts& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = load_config(c.config_path);
  else if (!c.preset.empty()) cfg = preset_config(c.preset);
  else cfg = preset_config("paper-7.1-noisefree");

  if (c.seeds_n > 0) {
    cfg.seeds.clear();
    for (long i = 1; i <= c.seeds_n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  } else if (const char* env = std::getenv("FTSPE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("FTSPE_SEED is not an integer");
    cfg.seeds = {static_cast<std::uint64_t>(v)};
  }
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  if (!c.estimators.empty()) cfg.estimators = parse_estimators(c.estimators);
  if (c.plot_opt != nullptr && c.plot_opt->count() > 0) cfg.plot = c.plot;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

int run_batch(const CommonOpts& c, bool comparison, const std::string& export_path) {
  const RunConfig cfg = make_config(c);
  const int selected = int(cfg.estimators.fts) + int(cfg.estimators.vpe) + int(cfg.estimators.dqmekf);
  if (comparison && selected < 2)
    throw ConfigError("compare needs at least two estimators selected");

  const std::vector<TruthSample> truth = generate_truth(cfg.traj);
  const FeaturePointSet points = cfg.features();
  ensure_directory(cfg.out_dir);

  const char* stem_base = comparison ? "cmp_seed" : "sim_seed";
  std::vector<SummaryRow> rows;
  bool exported = false;
  for (const std::uint64_t seed : cfg.seeds) {
    NoiseSpec noise = cfg.noise;
    noise.seed = seed;
    const ScenarioLog log = run_scenario(truth, points, noise, cfg.estimators, cfg.est);
    const std::string stem = stem_base + std::to_string(seed);
    write_scenario_csv(log, cfg.est, cfg.out_dir + "/" + stem + ".csv");
    if (cfg.plot) write_svg_plots(log, cfg.out_dir, stem);
    for (const EstimatorRun& run : log.runs)
      rows.push_back(SummaryRow{seed, run.name, metrics(run)});
    if (!export_path.empty() && !exported) {
      write_replay_csv(export_replay(synthesize_stream(truth, points, noise)), export_path);
      std::cout << "exported replay stream -> " << export_path << "\n";
      exported = true;
    }
  }

  // The RMS/settling table is part of the deterministic artifact; wall-clock
  // times are machine-specific and go to stdout only.
  const std::string table = format_summary_table(rows);
  write_text(cfg.out_dir + (comparison ? "/comparison.txt" : "/summary.txt"), table);
  std::cout << table << "\nwall-clock (machine-specific, not logged):\n"
            << format_walltime_table(rows);
  return 0;
}

int run_replay_cmd(const CommonOpts& c, const std::string& file) {
  RunConfig cfg = make_config(c);
  cfg.est.use_velocity_filter = true;  // replay always reconstructs the twist
  const std::vector<ReplayRecord> records = load_replay_csv(file);
  const ReplayResult res = run_replay(records, cfg.est);
  ensure_directory(cfg.out_dir);
  const std::string out = cfg.out_dir + "/replay_estimates.csv";
  write_estimate_csv(res, out);
  std::cout << "replayed " << records.size() << " records -> " << out << "\n";
  return 0;
}

int run_validate_gains(const CommonOpts& c, const RobustnessBounds& base, bool have_qbar) {
  const RunConfig cfg = make_config(c);
  RobustnessBounds b = base;
  if (!have_qbar) b.q_bar_max = cfg.features().mean().norm();
  const RobustnessResult r = check_gain_robustness(cfg.est.fts_gains, b);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", r.margin);
  std::cout << (r.satisfied ? "satisfied" : "violated") << " margin=" << buf << "\n";
  return r.satisfied ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time-stable pose estimation: simulation and replay tool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ftspe-sim 1.0.0");

  CommonOpts sim_opts, cmp_opts, rep_opts, val_opts;
  std::string export_path, replay_file;

  CLI::App* sim = app.add_subcommand("simulate", "Run the configured scenario and log errors");
  add_common(sim, sim_opts);
  sim->add_option("--export-replay", export_path,
                  "Also write the first seed's measurement stream as a replay CSV");

  CLI::App* cmp = app.add_subcommand("compare", "Run >= 2 estimators over shared measurements");
  add_common(cmp, cmp_opts);

  CLI::App* rep = app.add_subcommand("replay", "Estimate offline from a recorded stream");
  add_common(rep, rep_opts);
  rep->add_option("file", replay_file, "Replay CSV: t,gx,gy,gz,p1x,p1y,p1z,...")->required();

  CLI::App* val = app.add_subcommand("validate-gains", "Check the gain robustness condition");
  add_common(val, val_opts);
  RobustnessBounds bounds;
  bounds.s_L_max = 5.0;
  bounds.y_max = 5.0;
  bounds.Psi_max = 10.0;
  bounds.Phi_max = 10.0;
  val->add_option("--eps-omega", bounds.eps_omega, "Angular velocity noise bound [rad/s]")
      ->required();
  val->add_option("--eps-upsilon", bounds.eps_upsilon,
                  "Translational velocity noise bound [m/s]")
      ->required();
  CLI::Option* qbar_opt =
      val->add_option("--q-bar-max", bounds.q_bar_max,
                      "Landmark centroid norm bound (default: from the feature set)");
  val->add_option("--s-max", bounds.s_L_max, "Attitude error vector bound");
  val->add_option("--y-max", bounds.y_max, "Translation residual bound");
  val->add_option("--psi-max", bounds.Psi_max, "Angular sliding-state bound");
  val->add_option("--phi-max", bounds.Phi_max, "Translational sliding-state bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_batch(sim_opts, false, export_path);
    if (cmp->parsed()) return run_batch(cmp_opts, true, "");
    if (rep->parsed()) return run_replay_cmd(rep_opts, replay_file);
    return run_validate_gains(val_opts, bounds, qbar_opt->count() > 0);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
