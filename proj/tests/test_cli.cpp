#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ftspe/measurements.hpp"
#include "ftspe/observer.hpp"

using namespace ftspe;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "ftspe_cli_tests";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  REQUIRE(bool(out));
  out << text;
  return p;
}

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

// Runs the simulator binary through the shell, captures all output, and
// decodes the exit status. `env_prefix` controls the FTSPE_SEED variable;
// by default it is scrubbed so ambient state cannot leak into a test.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "env -u FTSPE_SEED") {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("cmd_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      env_prefix + " " + FTSPE_SIM_PATH + " " + args + " > '" + out.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult res;
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  res.output = slurp(out);
  return res;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Gains well inside the stability region of the coarse grid used here, so
// CLI runs finish fast and produce finite logs.
fs::path mild_config(const std::string& name, const std::string& estimators) {
  return write_text(name, std::string("[run]\nestimators = ") + estimators +
                              "\n[trajectory]\ndt = 0.01\nT = 1\n[gains]\nk_p = 2\n"
                              "k_omega = 1.5\nk_upsilon = 1.2\nalpha1 = 1\nalpha2 = 0.8\n"
                              "[filter]\nlambda_c = 0.3\n");
}

std::string expected_margin_line(double eps_omega, double eps_upsilon, double q_bar_max) {
  RobustnessBounds b;
  b.eps_omega = eps_omega;
  b.eps_upsilon = eps_upsilon;
  b.q_bar_max = q_bar_max;
  b.s_L_max = 5.0;
  b.y_max = 5.0;
  b.Psi_max = 10.0;
  b.Phi_max = 10.0;
  const RobustnessResult r = check_gain_robustness(ObserverGains{}, b);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", r.margin);
  return std::string(r.satisfied ? "satisfied" : "violated") + " margin=" + buf + "\n";
}

}  // namespace

TEST_CASE("cli: help, version, and parse failures map to documented exit codes") {
  const CmdResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(contains(help.output, "simulate"));
  CHECK(contains(help.output, "compare"));
  CHECK(contains(help.output, "replay"));
  CHECK(contains(help.output, "validate-gains"));

  const CmdResult version = run_cli("--version");
  CHECK(version.exit_code == 0);
  CHECK(contains(version.output, "ftspe-sim 1.0.0"));

  CHECK(run_cli("").exit_code == 2);                        // a subcommand is required
  CHECK(run_cli("warp-drive").exit_code == 2);              // unknown subcommand
  CHECK(run_cli("simulate --bogus-flag").exit_code == 2);   // unknown option
  CHECK(run_cli("simulate --seeds 0").exit_code == 2);      // seeds must be positive
  CHECK(run_cli("simulate --preset nope").exit_code == 2);  // unknown preset
  CHECK(run_cli("simulate --config /definitely/missing.cfg").exit_code == 2);
  CHECK(run_cli("simulate --estimators fts,warp").exit_code == 2);
}

TEST_CASE("cli: validate-gains prints the certificate verdict") {
  const double q_bar_default = default_feature_set().mean().norm();

  const CmdResult ok = run_cli("validate-gains --eps-omega 0.16 --eps-upsilon 0.02");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output == expected_margin_line(0.16, 0.02, q_bar_default));

  // Exit 1 flags a violated condition, distinct from bad input (2).
  const CmdResult bad = run_cli("validate-gains --eps-omega 50 --eps-upsilon 0.02");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output == expected_margin_line(50.0, 0.02, q_bar_default));
  CHECK(contains(bad.output, "violated"));

  const CmdResult qbar = run_cli("validate-gains --eps-omega 0.16 --eps-upsilon 0.02 --q-bar-max 2.5");
  CHECK(qbar.exit_code == 0);
  CHECK(qbar.output == expected_margin_line(0.16, 0.02, 2.5));

  CHECK(run_cli("validate-gains --eps-upsilon 0.02").exit_code == 2);  // missing required
}

TEST_CASE("cli: simulate writes per-seed logs, a summary, and plots") {
  const fs::path cfg = mild_config("sim.cfg", "fts,vpe,dqmekf");
  const fs::path out = scratch_dir() / "sim_out";
  fs::remove_all(out);

  const CmdResult res =
      run_cli("simulate --config '" + cfg.string() + "' --seeds 2 --out '" + out.string() + "'");
  REQUIRE(res.exit_code == 0);
  CHECK(contains(res.output, "wall-clock (machine-specific, not logged)"));

  for (const char* name : {"sim_seed1.csv", "sim_seed2.csv", "summary.txt", "sim_seed1_phi.svg",
                           "sim_seed1_chi.svg", "sim_seed2_omega_err.svg",
                           "sim_seed2_upsilon_err.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }

  const std::string csv = slurp(out / "sim_seed1.csv");
  CHECK(csv.rfind("# seed=1 dt=0.01", 0) == 0);
  CHECK(contains(csv, "t,estimator,phi,chi_norm,wx,wy,wz,vx,vy,vz,V"));

  // The summary is a deterministic artifact: no wall-clock numbers inside.
  const std::string summary = slurp(out / "summary.txt");
  CHECK(contains(summary, "rms_phi[rad]"));
  CHECK(contains(summary, "fts"));
  CHECK(contains(summary, "vpe"));
  CHECK(contains(summary, "dqmekf"));
  CHECK_FALSE(contains(summary, "wall"));

  // --no-plot suppresses the SVGs.
  const fs::path out2 = scratch_dir() / "sim_out_noplot";
  fs::remove_all(out2);
  const CmdResult res2 = run_cli("simulate --config '" + cfg.string() + "' --no-plot --out '" +
                                 out2.string() + "'");
  REQUIRE(res2.exit_code == 0);
  CHECK(fs::exists(out2 / "sim_seed1.csv"));
  CHECK_FALSE(fs::exists(out2 / "sim_seed1_phi.svg"));
}

TEST_CASE("cli: simulate artifacts are identical across invocations") {
  const fs::path cfg = mild_config("det.cfg", "fts,dqmekf");
  const fs::path a = scratch_dir() / "det_a";
  const fs::path b = scratch_dir() / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);

  REQUIRE(run_cli("simulate --config '" + cfg.string() + "' --out '" + a.string() + "'").exit_code ==
          0);
  REQUIRE(run_cli("simulate --config '" + cfg.string() + "' --out '" + b.string() + "'").exit_code ==
          0);

  CHECK(slurp(a / "sim_seed1.csv") == slurp(b / "sim_seed1.csv"));
  CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
  CHECK(slurp(a / "sim_seed1_phi.svg") == slurp(b / "sim_seed1_phi.svg"));
}

TEST_CASE("cli: seed selection via environment and flag") {
  const fs::path cfg = mild_config("seed.cfg", "fts");
  const fs::path out = scratch_dir() / "seed_out";
  fs::remove_all(out);

  // FTSPE_SEED picks the seed when --seeds is absent.
  const CmdResult env_run = run_cli(
      "simulate --config '" + cfg.string() + "' --out '" + out.string() + "'", "env FTSPE_SEED=7");
  REQUIRE(env_run.exit_code == 0);
  CHECK(fs::exists(out / "sim_seed7.csv"));
  CHECK_FALSE(fs::exists(out / "sim_seed1.csv"));

  // --seeds N overrides the environment.
  const fs::path out2 = scratch_dir() / "seed_out_flag";
  fs::remove_all(out2);
  const CmdResult flag_run =
      run_cli("simulate --config '" + cfg.string() + "' --seeds 2 --out '" + out2.string() + "'",
              "env FTSPE_SEED=7");
  REQUIRE(flag_run.exit_code == 0);
  CHECK(fs::exists(out2 / "sim_seed1.csv"));
  CHECK(fs::exists(out2 / "sim_seed2.csv"));
  CHECK_FALSE(fs::exists(out2 / "sim_seed7.csv"));

  const CmdResult bad_env = run_cli("simulate --config '" + cfg.string() + "'", "env FTSPE_SEED=abc");
  CHECK(bad_env.exit_code == 2);
  CHECK(contains(bad_env.output, "FTSPE_SEED"));
}

TEST_CASE("cli: compare requires two estimators and writes comparison artifacts") {
  const fs::path single = mild_config("cmp_single.cfg", "fts");
  const CmdResult refused = run_cli("compare --config '" + single.string() + "'");
  CHECK(refused.exit_code == 2);
  CHECK(contains(refused.output, "at least two estimators"));

  const fs::path cfg = mild_config("cmp.cfg", "fts,vpe,dqmekf");
  const fs::path a = scratch_dir() / "cmp_a";
  const fs::path b = scratch_dir() / "cmp_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run_cli("compare --config '" + cfg.string() + "' --out '" + a.string() + "'").exit_code ==
          0);
  REQUIRE(run_cli("compare --config '" + cfg.string() + "' --out '" + b.string() + "'").exit_code ==
          0);

  CHECK(fs::exists(a / "cmp_seed1.csv"));
  CHECK(fs::exists(a / "comparison.txt"));
  const std::string table = slurp(a / "comparison.txt");
  CHECK(contains(table, "fts"));
  CHECK(contains(table, "vpe"));
  CHECK(contains(table, "dqmekf"));
  CHECK(table == slurp(b / "comparison.txt"));
  CHECK(slurp(a / "cmp_seed1.csv") == slurp(b / "cmp_seed1.csv"));

  // The estimator list can come from the command line instead of the config.
  const fs::path c = scratch_dir() / "cmp_c";
  fs::remove_all(c);
  CHECK(run_cli("compare --config '" + single.string() + "' --estimators fts,vpe --out '" +
                c.string() + "'")
            .exit_code == 0);
  CHECK(fs::exists(c / "comparison.txt"));
}

TEST_CASE("cli: replay runs end-to-end from an exported stream") {
  const fs::path cfg = mild_config("rep.cfg", "fts");
  const fs::path out = scratch_dir() / "rep_out";
  const fs::path stream = scratch_dir() / "rep_stream.csv";
  fs::remove_all(out);
  fs::remove(stream);

  const CmdResult sim = run_cli("simulate --config '" + cfg.string() + "' --no-plot --out '" +
                                out.string() + "' --export-replay '" + stream.string() + "'");
  REQUIRE(sim.exit_code == 0);
  CHECK(contains(sim.output, "exported replay stream"));
  REQUIRE(fs::exists(stream));
  CHECK(slurp(stream).rfind("t,gx,gy,gz,p1x,p1y,p1z", 0) == 0);

  const fs::path rep_out = scratch_dir() / "rep_estimates";
  fs::remove_all(rep_out);
  const CmdResult rep = run_cli("replay '" + stream.string() + "' --config '" + cfg.string() +
                                "' --out '" + rep_out.string() + "'");
  REQUIRE(rep.exit_code == 0);
  CHECK(contains(rep.output, "replayed 101 records"));
  const std::string est = slurp(rep_out / "replay_estimates.csv");
  CHECK(est.rfind("t,R11,R12,R13,R21,R22,R23,R31,R32,R33,bx,by,bz,Omx,Omy,Omz,nux,nuy,nuz", 0) ==
        0);

  // Malformed or missing recordings are input errors.
  const fs::path bad = write_text("bad_replay.csv", "t,gx,gy,gz,p1x,p1y,p1z\n0,0,zap,0,1,0,0\n");
  const CmdResult malformed = run_cli("replay '" + bad.string() + "'");
  CHECK(malformed.exit_code == 2);
  CHECK(contains(malformed.output, "bad numeric field"));
  CHECK(run_cli("replay /definitely/missing.csv").exit_code == 2);
}

TEST_CASE("cli: estimator failures at runtime exit with code 3") {
  // Collinear landmarks pass the config checks (the file exists and has four
  // points) but the weight computation rejects them once the run starts.
  const fs::path points = write_text("collinear.csv",
                                     "x,y,z\n0,0,0\n1,0,0\n2,0,0\n3,0,0\n");
  const fs::path cfg = write_text("runtime_fail.cfg",
                                  "[run]\nfeature_file = " + points.string() +
                                      "\n[trajectory]\ndt = 0.01\nT = 0.5\n");
  const CmdResult res = run_cli("simulate --config '" + cfg.string() + "'");
  CHECK(res.exit_code == 3);
  CHECK(contains(res.output, "runtime error"));
}
