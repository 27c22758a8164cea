#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ftspe/config.hpp"
#include "ftspe/io.hpp"

namespace py = pybind11;
using namespace ftspe;

namespace {

// Runs one preset scenario for a single seed and returns the logged error
// series per estimator as plain vectors.
py::dict simulate_preset(const std::string& preset, std::uint64_t seed, double dt_override,
                         double T_override) {
  RunConfig cfg = preset_config(preset);
  if (dt_override > 0.0) cfg.traj.dt = dt_override;
  if (T_override > 0.0) cfg.traj.T = T_override;
  cfg.validate();
  NoiseSpec noise = cfg.noise;
  noise.seed = seed;
  const ScenarioLog log =
      run_scenario(generate_truth(cfg.traj), cfg.features(), noise, cfg.estimators, cfg.est);

  py::dict out;
  for (const EstimatorRun& run : log.runs) {
    std::vector<double> t, phi, chi, V;
    t.reserve(run.records.size());
    for (const StepRecord& r : run.records) {
      t.push_back(r.t);
      phi.push_back(r.phi);
      chi.push_back(r.chi_norm);
      V.push_back(r.V);
    }
    py::dict series;
    series["t"] = std::move(t);
    series["phi"] = std::move(phi);
    series["chi"] = std::move(chi);
    series["V"] = std::move(V);
    out[py::str(run.name)] = std::move(series);
  }
  return out;
}

double settling_gain(double p, double kappa, double k_p, double k_omega, double k_upsilon,
                     double alpha1, double alpha2) {
  ObserverGains g;
  g.p = p;
  g.kappa = kappa;
  g.k_p = k_p;
  g.k_omega = k_omega;
  g.k_upsilon = k_upsilon;
  g.alpha1 = alpha1;
  g.alpha2 = alpha2;
  g.validate();
  return settling_gain_k0(g);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-time stable pose estimation on SE(3)";

  m.def("hat", &hat, py::arg("v"), "Cross-product matrix of a 3-vector");
  m.def("vee", &vee, py::arg("S"), py::arg("tol") = 1e-9, "Inverse of hat");
  m.def("exp_so3", &exp_so3, py::arg("v"), "Rotation exponential (Rodrigues)");
  m.def("principal_angle", &principal_angle, py::arg("Q"),
        "Principal rotation angle in [0, pi]");
  m.def("parse_scalar", &parse_scalar, py::arg("token"),
        "Config scalar literals: decimals, rationals like '13/11', pi-multiples like '0.9pi'");
  m.def("preset_names", &preset_names, "Available scenario presets");
  m.def("settling_gain", &settling_gain, py::arg("p"), py::arg("kappa"), py::arg("k_p"),
        py::arg("k_omega"), py::arg("k_upsilon"), py::arg("alpha1"), py::arg("alpha2"),
        "Settling-rate constant k0 of the finite-time observer");
  m.def("simulate_preset", &simulate_preset, py::arg("preset"), py::arg("seed") = 1,
        py::arg("dt_override") = 0.0, py::arg("T_override") = 0.0,
        "Run a preset scenario; returns {estimator: {t, phi, chi, V}}");
}
