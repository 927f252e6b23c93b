#include "xsplice/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xsplice/compensator_design.hpp"
#include "xsplice/config.hpp"
#include "xsplice/counts_model.hpp"
#include "xsplice/errors.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/phasematch.hpp"
#include "xsplice/state_model.hpp"
#include "xsplice/tomography.hpp"

namespace xsplice::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config_path;
  std::string materials_path;
  std::string out_dir;
};

struct Context {
  const Common& common;
  std::ostream& out;

  MaterialDatabase materials() const { return MaterialDatabase::resolve(common.materials_path); }

  Config config() const {
    const MaterialDatabase db = materials();
    return common.config_path.empty() ? default_config(db) : load_config(common.config_path, db);
  }

  // With --out the artifact goes to <dir>/<name>, otherwise to stdout.
  void emit(const std::string& name, const std::string& content) const {
    if (common.out_dir.empty()) {
      out << content;
      return;
    }
    std::error_code ec;
    fs::create_directories(common.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + common.out_dir + "'");
    const fs::path path = fs::path(common.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json compensator_json(const CompensatorSpec& c) {
  return {{"length_mm", c.length_mm},
          {"material", c.material.name},
          {"orientation", to_string(c.orientation)},
          {"arm", to_string(c.arm)}};
}

json fiber_json(const Config& c) {
  return {{"length_m", c.fiber.length_m},
          {"birefringence", c.fiber.birefringence},
          {"birefringence_calibrated", c.birefringence_calibrated},
          {"gamma_per_W_m", c.fiber.gamma_per_W_m},
          {"core", c.fiber.core.name()}};
}

json metrics_json(const TwoQubitState& rho) {
  const BellFidelity best = best_bell_fidelity(rho);
  return {{"best_bell_state", to_string(best.state)},
          {"best_bell_fidelity", best.fidelity},
          {"psi_minus_fidelity_after_flip",
           fidelity(relabel_signal_flip(rho), bell_vector(BellState::psi_minus))},
          {"concurrence", concurrence(rho)},
          {"tangle", tangle(rho)},
          {"v_rect", visibility(rho, AnalyzerBasis::rectilinear)},
          {"v_diag", visibility(rho, AnalyzerBasis::diagonal)}};
}

// --- subcommands ------------------------------------------------------------

struct TuningArgs {
  double from = 760.0;
  double to = 790.0;
  int steps = 31;
};

void tuning_curve_cmd(const Context& ctx, const TuningArgs& a) {
  const Config c = ctx.config();
  const auto samples = tuning_curve(c.fiber, a.from, a.to, a.steps, c.peak_power_W);
  std::ostringstream os;
  write_tuning_csv(os, samples);
  ctx.emit("tuning_curve.csv", os.str());
}

struct PhaseMapArgs {
  bool compensated = false;
  int points = 0;
};

void phase_map_cmd(const Context& ctx, const PhaseMapArgs& a) {
  const Config c = ctx.config();
  const int n = a.points > 0 ? a.points : c.grid.points_per_axis;
  const auto s_axis = c.signal.window_axis(n, c.grid.n_sigma);
  const auto p_axis = c.pump.window_axis(n, c.grid.n_sigma);
  std::optional<CompensatorPair> comps;
  if (a.compensated) comps = c.compensators;
  const PhaseMap map = phase_map(c.fiber, comps, s_axis, p_axis, c.peak_power_W);
  std::ostringstream os;
  write_phase_map_csv(os, map);
  ctx.emit("phase_map.csv", os.str());
  if (!ctx.common.out_dir.empty()) {
    json meta{{"grid",
               {{"points_per_axis", n},
                {"n_sigma", c.grid.n_sigma},
                {"signal_center_nm", c.signal.center_nm},
                {"signal_fwhm_nm", c.signal.fwhm_nm},
                {"pump_center_nm", c.pump.center_nm},
                {"pump_fwhm_nm", c.pump.fwhm_nm}}},
              {"fiber", fiber_json(c)},
              {"peak_power_W", c.peak_power_W},
              {"compensated", a.compensated},
              {"peak_to_peak_deg", map.peak_to_peak()}};
    if (comps) {
      meta["compensators"] = {compensator_json(comps->signal), compensator_json(comps->idler)};
    }
    ctx.emit("phase_map.json", dump(meta));
  }
}

void optimize_cmd(const Context& ctx) {
  const Config c = ctx.config();
  const CompensatorDesign d =
      optimize_compensators(c.fiber, c.compensator_material, c.pump, c.signal, c.grid);
  const json j{{"signal_mm", d.compensators.signal.length_mm},
               {"signal_orientation", to_string(d.compensators.signal.orientation)},
               {"idler_mm", d.compensators.idler.length_mm},
               {"idler_orientation", to_string(d.compensators.idler.orientation)},
               {"residual_deg", d.residual_deg},
               {"weighted_std_deg", d.weighted_std_deg}};
  ctx.emit("compensators.json", dump(j));
}

struct StateArgs {
  bool uncompensated = false;
  std::optional<double> power_mW;
};

void state_cmd(const Context& ctx, const StateArgs& a) {
  const Config c = ctx.config();
  SourceModel source = c.source_model();
  if (a.uncompensated) {
    source.compensators.signal.length_mm = 0.0;
    source.compensators.idler.length_mm = 0.0;
  }
  json doc;
  if (a.power_mW) {
    VisibilityPoint pt;
    const TwoQubitState rho = modeled_state(c.noise, source, *a.power_mW, &pt);
    doc = to_json(rho);
    doc["metrics"] = metrics_json(rho);
    doc["power_mW"] = pt.power_mW;
    doc["pump_fwhm_nm"] = pt.pump_fwhm_nm;
    doc["noise_weight"] = pt.noise_weight;
  } else {
    const PhaseFunction phase =
        make_phase_function(c.fiber, source.compensators, c.peak_power_W, c.signal.center_nm,
                            c.pump.center_nm, c.state_phase_rad);
    MixtureOptions opts = c.mixture;
    MixtureDiagnostics diag;
    const TwoQubitState rho = mixed_state_over_spectra(phase, c.signal, c.pump, opts, &diag);
    doc = to_json(rho);
    doc["metrics"] = metrics_json(rho);
    doc["coherence_abs"] = std::abs(diag.coherence);
    doc["quadrature_converged"] = diag.converged;
  }
  doc["compensated"] = !a.uncompensated;
  ctx.emit("state.json", dump(doc));
}

struct SweepArgs {
  std::optional<double> min_mW, max_mW, duration_s;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::string mode = "poisson";
};

void power_sweep_cmd(const Context& ctx, const SweepArgs& a) {
  const Config c = ctx.config();
  const double lo = a.min_mW.value_or(c.sweep.min_mW);
  const double hi = a.max_mW.value_or(c.sweep.max_mW);
  const int steps = a.steps.value_or(c.sweep.steps);
  if (steps < 1 || !(lo >= 0.0) || !(hi >= lo)) {
    throw DomainError("power sweep needs 0 <= min <= max and steps >= 1");
  }
  std::vector<double> powers;
  for (int k = 0; k < steps; ++k) {
    powers.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
  }
  const SamplingMode mode =
      a.mode == "expectation" ? SamplingMode::expectation : SamplingMode::poisson;
  const auto rows = power_sweep(c.noise, c.source_model(), powers,
                                a.duration_s.value_or(c.sweep.duration_s), mode,
                                a.seed.value_or(c.sweep.seed));
  std::ostringstream os;
  write_power_sweep_csv(os, rows);
  ctx.emit("power_sweep.csv", os.str());
}

struct TomoArgs {
  std::string state = "werner";
  std::optional<double> counts;
  std::optional<std::uint64_t> seed;
  std::optional<int> bootstrap;
};

TwoQubitState demo_state(const Config& c, const std::string& spec) {
  if (spec == "werner") return werner_state(c.tomography.werner_p);
  for (BellState b : {BellState::phi_plus, BellState::phi_minus, BellState::psi_plus,
                      BellState::psi_minus}) {
    if (spec == to_string(b)) return TwoQubitState::from_pure(bell_vector(b));
  }
  if (spec == "model") {
    return modeled_state(c.noise, c.source_model(),
                         diagonal_visibility_optimum(c.noise, c.source_model()).power_mW);
  }
  std::ifstream in(spec);
  if (!in) {
    throw ConfigError("state '" + spec +
                      "' is neither a builtin (werner, model, phi_plus, phi_minus, psi_plus, "
                      "psi_minus) nor a readable file");
  }
  try {
    return state_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse state file '" + spec + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("state file '" + spec + "': " + e.what());
  }
}

void tomography_cmd(const Context& ctx, const TomoArgs& a) {
  const Config c = ctx.config();
  const TwoQubitState truth = demo_state(c, a.state);
  const double n = a.counts.value_or(c.tomography.counts_per_setting);
  const std::uint64_t seed = a.seed.value_or(c.tomography.seed);
  const int rounds = a.bootstrap.value_or(c.tomography.bootstrap);
  if (!(n > 0.0)) throw DomainError("counts per setting must be > 0");

  const TomographyData data = simulate_counts(truth, standard_settings(), n, seed);
  const MleResult fit = reconstruct_mle(data);

  json summary{{"counts_per_setting", n},
               {"seed", seed},
               {"converged", fit.converged},
               {"log_likelihood", fit.log_likelihood},
               {"fidelity_to_truth", state_fidelity(fit.state, truth)},
               {"metrics", metrics_json(fit.state)}};
  if (rounds > 0) {
    const ErrorBars eb = error_bars(data, rounds, seed + 1);
    summary["bootstrap"] = {{"rounds", eb.rounds},
                            {"fidelity_std", eb.fidelity_std},
                            {"tangle_std", eb.tangle_std},
                            {"degenerate", eb.degenerate}};
  }
  if (ctx.common.out_dir.empty()) {
    ctx.out << dump(summary);
    return;
  }
  std::ostringstream csv;
  write_tomography_csv(csv, data);
  ctx.emit("tomography_counts.csv", csv.str());
  ctx.emit("reconstructed_state.json", dump(to_json(fit.state)));
  ctx.emit("tomography_summary.json", dump(summary));
}

struct CalibrateArgs {
  std::optional<double> pump, signal;
};

void calibrate_cmd(const Context& ctx, const CalibrateArgs& a) {
  const MaterialDatabase db = ctx.materials();
  double pump = 0.0;
  double signal = 0.0;
  SellmeierModel core;
  if (a.pump && a.signal && ctx.common.config_path.empty()) {
    core = db.model("fused_silica");
    pump = *a.pump;
    signal = *a.signal;
  } else {
    const Config c = ctx.config();
    core = c.fiber.core;
    pump = a.pump.value_or(c.pump_nm);
    signal = a.signal.value_or(c.signal_nm);
  }
  const double b = calibrate_birefringence(core, pump, signal);
  FiberSpec fiber{1.0, b, 0.0, core};
  const PhaseMatchPoint pt = solve_signal_idler(fiber, pump);
  const json j{{"birefringence", b},
               {"core", core.name()},
               {"pump_nm", pump},
               {"signal_nm", pt.lambda_s_nm},
               {"idler_nm", pt.lambda_i_nm}};
  ctx.emit("calibration.json", dump(j));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and design tools for cross-spliced fiber photon-pair sources",
               "xsplice"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "INI config (default: built-in example)");
  app.add_option("--materials", common.materials_path,
                 "material database JSON (else $XSPLICE_MATERIALS, else built-in)");
  app.add_option("--out", common.out_dir, "write artifacts into this directory");

  TuningArgs tuning;
  auto* tc = app.add_subcommand("tuning-curve", "phase-matched signal/idler versus pump");
  tc->add_option("--from", tuning.from, "first pump wavelength (nm)")->capture_default_str();
  tc->add_option("--to", tuning.to, "last pump wavelength (nm)")->capture_default_str();
  tc->add_option("--steps", tuning.steps, "number of pump samples")->capture_default_str();

  PhaseMapArgs pm;
  auto* pmc = app.add_subcommand("phase-map", "entanglement phase over the spectral grid");
  pmc->add_flag("--compensated", pm.compensated, "include the configured compensators");
  pmc->add_option("--points", pm.points, "grid points per axis (default from config)");

  auto* oc = app.add_subcommand("optimize-compensators", "optimal compensator lengths");

  StateArgs st;
  auto* sc = app.add_subcommand("state", "two-qubit state and its metrics");
  sc->add_flag("--uncompensated", st.uncompensated, "drop the compensators");
  sc->add_option("--power", st.power_mW, "average pump power (mW); adds the noise model");

  SweepArgs sw;
  auto* pc = app.add_subcommand("power-sweep", "counts and visibilities versus pump power");
  pc->add_option("--min", sw.min_mW, "lowest power (mW)");
  pc->add_option("--max", sw.max_mW, "highest power (mW)");
  pc->add_option("--steps", sw.steps, "number of powers");
  pc->add_option("--duration", sw.duration_s, "integration time per power (s)");
  pc->add_option("--seed", sw.seed, "sampler seed");
  pc->add_option("--mode", sw.mode, "poisson or expectation")
      ->check(CLI::IsMember({"poisson", "expectation"}))
      ->capture_default_str();

  TomoArgs tomo;
  auto* tdc = app.add_subcommand("tomography-demo", "simulate and reconstruct tomography data");
  tdc->add_option("--state", tomo.state,
                  "werner, model, a Bell state name, or a state JSON file")
      ->capture_default_str();
  tdc->add_option("--counts-per-setting", tomo.counts, "mean counts per setting");
  tdc->add_option("--seed", tomo.seed, "sampler seed");
  tdc->add_option("--bootstrap", tomo.bootstrap, "bootstrap rounds (0 disables)");

  CalibrateArgs cal;
  auto* cc = app.add_subcommand("calibrate", "fiber birefringence for a target signal");
  cc->add_option("--pump", cal.pump, "pump wavelength (nm)");
  cc->add_option("--signal", cal.signal, "target signal wavelength (nm)");

  std::vector<std::string> argv_store{"xsplice"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  const Context ctx{common, out};
  try {
    if (*tc) tuning_curve_cmd(ctx, tuning);
    else if (*pmc) phase_map_cmd(ctx, pm);
    else if (*oc) optimize_cmd(ctx);
    else if (*sc) state_cmd(ctx, st);
    else if (*pc) power_sweep_cmd(ctx, sw);
    else if (*tdc) tomography_cmd(ctx, tomo);
    else if (*cc) calibrate_cmd(ctx, cal);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}

}  // namespace xsplice::cli
