#include "xsplice/compensator_design.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xsplice/errors.hpp"
#include "xsplice/optim.hpp"
#include "xsplice/phasematch.hpp"

namespace xsplice {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

struct Grid {
  std::vector<double> signal;
  std::vector<double> pump;
  std::vector<double> weight;  // row-major, signal outermost, sums to 1
};

Grid make_grid(const GaussianSpectrum& pump, const GaussianSpectrum& signal,
               const DesignGrid& spec) {
  Grid g{signal.window_axis(spec.points_per_axis, spec.n_sigma),
         pump.window_axis(spec.points_per_axis, spec.n_sigma),
         {}};
  g.weight.reserve(g.signal.size() * g.pump.size());
  double total = 0.0;
  for (double s : g.signal) {
    for (double p : g.pump) {
      const double w = signal.density(s) * pump.density(p);
      g.weight.push_back(w);
      total += w;
    }
  }
  for (double& w : g.weight) w /= total;
  return g;
}

// Weighted second moments of the fiber phase T and the per-millimetre
// compensator phases a (signal arm) and b (idler arm). For signed lengths
// x, y the compensated variance is the quadratic form below.
struct Moments {
  double tt = 0, aa = 0, bb = 0, ta = 0, tb = 0, ab = 0;

  double variance(double x, double y) const {
    const double v = tt + x * x * aa + y * y * bb + 2.0 * x * ta + 2.0 * y * tb +
                     2.0 * x * y * ab;
    return std::max(v, 0.0);
  }
};

Moments compute_moments(const FiberSpec& fiber, const CompensatorMaterial& material,
                        const Grid& g, double peak_power_W) {
  const CompensatorSpec unit_signal{1.0, material, Orientation::slow_vertical, Arm::signal};
  const CompensatorSpec unit_idler{1.0, material, Orientation::slow_vertical, Arm::idler};
  const std::size_t n = g.weight.size();
  std::vector<double> t(n), a(n), b(n);
  const double reference = total_phase(fiber, g.signal.front(), g.pump.front(), peak_power_W);
  std::size_t k = 0;
  for (double s : g.signal) {
    const double a_s = compensator_phase(unit_signal, s);
    for (double p : g.pump) {
      t[k] = total_phase(fiber, s, p, peak_power_W) - reference;
      a[k] = a_s;
      b[k] = compensator_phase(unit_idler, idler_wavelength(s, p));
      ++k;
    }
  }
  double mt = 0, ma = 0, mb = 0;
  for (k = 0; k < n; ++k) {
    mt += g.weight[k] * t[k];
    ma += g.weight[k] * a[k];
    mb += g.weight[k] * b[k];
  }
  Moments m;
  for (k = 0; k < n; ++k) {
    const double dt = t[k] - mt, da = a[k] - ma, db = b[k] - mb;
    const double w = g.weight[k];
    m.tt += w * dt * dt;
    m.aa += w * da * da;
    m.bb += w * db * db;
    m.ta += w * dt * da;
    m.tb += w * dt * db;
    m.ab += w * da * db;
  }
  return m;
}

}  // namespace

double weighted_phase_variance(const FiberSpec& fiber,
                               const std::optional<CompensatorPair>& comps,
                               const GaussianSpectrum& pump, const GaussianSpectrum& signal,
                               const DesignGrid& grid, double peak_power_W) {
  const Grid g = make_grid(pump, signal, grid);
  auto phase = [&](double s, double p) {
    return comps ? compensated_phase(fiber, *comps, s, p, peak_power_W)
                 : total_phase(fiber, s, p, peak_power_W);
  };
  const double reference = phase(g.signal.front(), g.pump.front());
  std::vector<double> values;
  values.reserve(g.weight.size());
  for (double s : g.signal) {
    for (double p : g.pump) values.push_back(phase(s, p) - reference);
  }
  double mean = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) mean += g.weight[k] * values[k];
  double var = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double d = values[k] - mean;
    var += g.weight[k] * d * d;
  }
  return var;
}

CompensatorDesign optimize_compensators(const FiberSpec& fiber,
                                        const CompensatorMaterial& material,
                                        const GaussianSpectrum& pump,
                                        const GaussianSpectrum& signal,
                                        const DesignGrid& grid,
                                        const CompensatorSearch& search) {
  fiber.validate();
  pump.validate();
  signal.validate();
  const Grid g = make_grid(pump, signal, grid);
  const Moments m = compute_moments(fiber, material, g, 0.0);

  constexpr std::array<std::pair<Orientation, Orientation>, 4> kCombos{{
      {Orientation::slow_vertical, Orientation::slow_horizontal},
      {Orientation::slow_vertical, Orientation::slow_vertical},
      {Orientation::slow_horizontal, Orientation::slow_horizontal},
      {Orientation::slow_horizontal, Orientation::slow_vertical},
  }};

  const int n_steps = static_cast<int>(std::lround(search.max_length_mm / search.coarse_step_mm));

  struct Candidate {
    double signal_mm = 0, idler_mm = 0, value = std::numeric_limits<double>::infinity();
    std::pair<Orientation, Orientation> combo;
    bool converged = true;
  };
  Candidate best;

  for (const auto& combo : kCombos) {
    const double ss = sign_of(combo.first);
    const double si = sign_of(combo.second);
    auto objective = [&](double ls, double li) { return m.variance(ss * ls, si * li); };

    Candidate local{0, 0, std::numeric_limits<double>::infinity(), combo, true};
    for (int i = 0; i <= n_steps; ++i) {
      for (int j = 0; j <= n_steps; ++j) {
        const double ls = i * search.coarse_step_mm;
        const double li = j * search.coarse_step_mm;
        const double v = objective(ls, li);
        if (v < local.value) {
          local.signal_mm = ls;
          local.idler_mm = li;
          local.value = v;
        }
      }
    }

    NelderMeadOptions nm;
    nm.initial_step = search.coarse_step_mm;
    nm.x_tolerance = 0.1 * search.resolution_mm;
    nm.max_iterations = search.max_iterations;
    auto penalized = [&](const std::vector<double>& x) {
      const double ls = std::max(x[0], 0.0);
      const double li = std::max(x[1], 0.0);
      const double excess = std::min(x[0], 0.0) * std::min(x[0], 0.0) +
                            std::min(x[1], 0.0) * std::min(x[1], 0.0);
      return objective(ls, li) + 1e3 * excess;
    };
    const auto refined = nelder_mead(penalized, {local.signal_mm, local.idler_mm}, nm);
    const double ls = std::max(refined.x[0], 0.0);
    const double li = std::max(refined.x[1], 0.0);
    const double v = objective(ls, li);
    if (v <= local.value) {
      local.signal_mm = ls;
      local.idler_mm = li;
      local.value = v;
    }
    local.converged = refined.converged;
    if (local.value < best.value) best = local;
  }

  CompensatorDesign design;
  design.compensators.signal = {best.signal_mm, material, best.combo.first, Arm::signal};
  design.compensators.idler = {best.idler_mm, material, best.combo.second, Arm::idler};
  design.objective_rad2 = best.value;
  design.weighted_std_deg = std::sqrt(best.value) * kDegPerRad;
  design.residual_deg = phase_map(fiber, design.compensators, g.signal, g.pump).peak_to_peak();
  if (!best.converged) {
    throw OptimizationError("compensator refinement did not converge", design);
  }
  return design;
}

double calibrate_birefringence(const SellmeierModel& core, double pump_nm,
                               double signal_target_nm, const CalibrationOptions& options) {
  if (signal_target_nm == pump_nm) return 0.0;
  auto signal_for = [&](double b) {
    FiberSpec fiber{1.0, b, 0.0, core};
    return solve_signal_idler(fiber, pump_nm).lambda_s_nm;
  };
  // Larger B pushes the signal further from the pump.
  auto g = [&](double b) { return signal_for(b) - signal_target_nm; };

  double lo = options.b_min;
  double hi = options.b_max;
  double g_lo = 0.0;
  double g_hi = 0.0;
  try {
    g_lo = g(lo);
    g_hi = g(hi);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("birefringence calibration: ") + e.what() +
                         "; try widening the B search range");
  }
  if ((g_lo < 0.0) == (g_hi < 0.0)) {
    std::ostringstream os;
    os << "target signal " << signal_target_nm << " nm not bracketed by B in [" << lo
       << ", " << hi << "]; widen the B search range";
    throw NumericalError(os.str());
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (std::abs(g_mid) < options.tolerance_nm || mid <= lo || mid >= hi) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace xsplice
