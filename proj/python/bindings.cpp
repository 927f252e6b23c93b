#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "xsplice/cli.hpp"
#include "xsplice/compensator_design.hpp"
#include "xsplice/config.hpp"
#include "xsplice/counts_model.hpp"
#include "xsplice/errors.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/phasematch.hpp"
#include "xsplice/state_model.hpp"
#include "xsplice/tomography.hpp"

namespace py = pybind11;
using namespace xsplice;

namespace {

Config load(const std::optional<std::string>& path) {
  const MaterialDatabase db = MaterialDatabase::resolve();
  return path ? load_config(*path, db) : default_config(db);
}

py::dict metrics(const TwoQubitState& rho) {
  const auto best = best_bell_fidelity(rho);
  py::dict d;
  d["best_bell_state"] = to_string(best.state);
  d["best_bell_fidelity"] = best.fidelity;
  d["concurrence"] = concurrence(rho);
  d["tangle"] = tangle(rho);
  d["v_rect"] = visibility(rho, AnalyzerBasis::rectilinear);
  d["v_diag"] = visibility(rho, AnalyzerBasis::diagonal);
  return d;
}

py::dict comp_dict(const CompensatorDesign& d) {
  py::dict out;
  out["signal_mm"] = d.compensators.signal.length_mm;
  out["signal_orientation"] = to_string(d.compensators.signal.orientation);
  out["idler_mm"] = d.compensators.idler.length_mm;
  out["idler_orientation"] = to_string(d.compensators.idler.orientation);
  out["residual_deg"] = d.residual_deg;
  out["weighted_std_deg"] = d.weighted_std_deg;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-spliced fiber photon-pair source: phase matching, phase compensation, "
            "two-qubit states, count statistics and tomography";

  auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)base;

  m.def("idler_wavelength", &idler_wavelength, py::arg("signal_nm"), py::arg("pump_nm"));

  m.def(
      "calibrate_birefringence",
      [](double pump_nm, double signal_nm, const std::string& core) {
        return calibrate_birefringence(MaterialDatabase::resolve().model(core), pump_nm,
                                       signal_nm);
      },
      py::arg("pump_nm"), py::arg("signal_nm"), py::arg("core") = "fused_silica");

  m.def(
      "solve_signal_idler",
      [](double pump_nm, std::optional<std::string> config) {
        const Config c = load(config);
        const auto pt = solve_signal_idler(c.fiber, pump_nm, c.peak_power_W);
        return py::make_tuple(pt.lambda_s_nm, pt.lambda_i_nm);
      },
      py::arg("pump_nm"), py::arg("config") = py::none(),
      "Phase-matched (signal_nm, idler_nm) for the configured fiber.");

  m.def(
      "phase_map",
      [](bool compensated, int points, std::optional<std::string> config) {
        const Config c = load(config);
        const int n = points > 0 ? points : c.grid.points_per_axis;
        std::optional<CompensatorPair> comps;
        if (compensated) comps = c.compensators;
        const PhaseMap map = phase_map(c.fiber, comps, c.signal.window_axis(n, c.grid.n_sigma),
                                       c.pump.window_axis(n, c.grid.n_sigma), c.peak_power_W);
        py::array_t<double> grid({map.signal_axis_nm.size(), map.pump_axis_nm.size()});
        std::copy(map.phase_deg.begin(), map.phase_deg.end(), grid.mutable_data());
        return py::make_tuple(py::array_t<double>(py::cast(map.signal_axis_nm)),
                              py::array_t<double>(py::cast(map.pump_axis_nm)), grid);
      },
      py::arg("compensated") = false, py::arg("points") = 0, py::arg("config") = py::none(),
      "(signal_axis_nm, pump_axis_nm, phase_deg[signal, pump]).");

  m.def(
      "optimize_compensators",
      [](std::optional<std::string> config) {
        const Config c = load(config);
        return comp_dict(
            optimize_compensators(c.fiber, c.compensator_material, c.pump, c.signal, c.grid));
      },
      py::arg("config") = py::none());

  m.def(
      "state",
      [](bool compensated, std::optional<double> power_mW, std::optional<std::string> config) {
        const Config c = load(config);
        SourceModel src = c.source_model();
        if (!compensated) src.compensators.signal.length_mm = src.compensators.idler.length_mm = 0;
        if (power_mW) {
          const auto rho = modeled_state(c.noise, src, *power_mW);
          return py::make_tuple(Matrix4c(rho.matrix()), metrics(rho));
        }
        const auto rho = mixed_state_over_spectra(
            make_phase_function(c.fiber, src.compensators, c.peak_power_W, c.signal.center_nm,
                                c.pump.center_nm, c.state_phase_rad),
            c.signal, c.pump, c.mixture);
        return py::make_tuple(Matrix4c(rho.matrix()), metrics(rho));
      },
      py::arg("compensated") = true, py::arg("power_mW") = py::none(),
      py::arg("config") = py::none(), "(density_matrix, metrics) in the HH, HV, VH, VV basis.");

  m.def("werner_state", [](double p) { return Matrix4c(werner_state(p).matrix()); },
        py::arg("p"));
  m.def("metrics", [](const Matrix4c& rho) { return metrics(TwoQubitState(rho)); },
        py::arg("rho"));
  m.def(
      "state_fidelity",
      [](const Matrix4c& a, const Matrix4c& b) {
        return state_fidelity(TwoQubitState(a), TwoQubitState(b));
      },
      py::arg("rho"), py::arg("sigma"));

  m.def(
      "heralding_efficiencies",
      [](double signal_total, double signal_background, double idler_total,
         double idler_background, double coincidences_total, double coincidences_background) {
        CountRecord r{1.0,          signal_total,       signal_background,       idler_total,
                      idler_background, coincidences_total, coincidences_background, 0.0};
        const auto h = heralding_efficiencies(r);
        return py::make_tuple(h.signal, h.idler);
      },
      py::arg("signal_total"), py::arg("signal_background"), py::arg("idler_total"),
      py::arg("idler_background"), py::arg("coincidences_total"),
      py::arg("coincidences_background"));

  m.def(
      "car",
      [](double power_mW, std::optional<std::string> config) {
        return car(load(config).noise, power_mW);
      },
      py::arg("power_mW"), py::arg("config") = py::none());

  m.def(
      "simulate_tomography",
      [](const Matrix4c& rho, double counts_per_setting, std::uint64_t seed) {
        const auto data =
            simulate_counts(TwoQubitState(rho), standard_settings(), counts_per_setting, seed);
        std::vector<std::pair<std::string, double>> out;
        for (std::size_t k = 0; k < data.counts.size(); ++k) {
          out.emplace_back(data.settings[k].label, data.counts[k]);
        }
        return out;
      },
      py::arg("rho"), py::arg("counts_per_setting"), py::arg("seed"),
      "[(setting_label, count)] over the 36 product settings.");

  m.def(
      "reconstruct_mle",
      [](const std::vector<std::pair<std::string, double>>& counts, double counts_per_setting) {
        TomographyData data;
        data.total_per_setting = counts_per_setting;
        for (const auto& [label, n] : counts) {
          data.settings.push_back(setting_from_label(label));
          data.counts.push_back(n);
        }
        return Matrix4c(reconstruct_mle(data).state.matrix());
      },
      py::arg("counts"), py::arg("counts_per_setting"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line front end in-process: (exit_code, stdout, stderr).");
}
