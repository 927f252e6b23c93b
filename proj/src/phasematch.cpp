#include "xsplice/phasematch.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "xsplice/errors.hpp"

namespace xsplice {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// sin(x)/x = 1/sqrt(2)
constexpr double kSincHalfMax = 1.3915573782515795;

bool evaluable(const FiberSpec& fiber, double pump_nm, double signal_nm) {
  if (!(2.0 * signal_nm > pump_nm)) return false;
  const double idler = signal_nm * pump_nm / (2.0 * signal_nm - pump_nm);
  return fiber.core.contains(signal_nm) && fiber.core.contains(idler) &&
         fiber.core.contains(pump_nm);
}

PhaseMatchPoint make_point(const FiberSpec& fiber, double pump_nm, double signal_nm,
                           double peak_power_W) {
  return {pump_nm, signal_nm, idler_wavelength(signal_nm, pump_nm),
          phase_mismatch(fiber, pump_nm, signal_nm, peak_power_W)};
}

// Bisection on [lo, hi] where f(lo), f(hi) have opposite signs.
template <class F>
double bisect(F&& f, double lo, double hi, double tolerance) {
  double f_lo = f(lo);
  double best = std::abs(f_lo) < std::abs(f(hi)) ? lo : hi;
  double best_abs = std::abs(f(best));
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (std::abs(f_mid) < best_abs) {
      best = mid;
      best_abs = std::abs(f_mid);
    }
    if (best_abs < tolerance) break;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace

double idler_wavelength(double signal_nm, double pump_nm) {
  if (!(signal_nm > 0.0) || !(pump_nm > 0.0)) {
    throw DomainError("wavelengths must be positive");
  }
  const double denom = 2.0 * signal_nm - pump_nm;
  if (denom == 0.0) {
    throw DomainError("degenerate idler: 2 * signal == pump");
  }
  return signal_nm * pump_nm / denom;
}

double phase_mismatch(const FiberSpec& fiber, double pump_nm, double signal_nm,
                      double peak_power_W) {
  const double idler_nm = idler_wavelength(signal_nm, pump_nm);
  const double pump_term = 2.0 * slow_axis_index(fiber, pump_nm) / pump_nm;
  const double signal_term = fast_axis_index(fiber, signal_nm) / signal_nm;
  const double idler_term = fast_axis_index(fiber, idler_nm) / idler_nm;
  // nm^-1 -> m^-1
  return kTwoPi * (pump_term - signal_term - idler_term) * 1e9 +
         2.0 * fiber.gamma_per_W_m * peak_power_W;
}

PhaseMatchPoint solve_signal_idler(const FiberSpec& fiber, double pump_nm,
                                   double peak_power_W, const SolverOptions& options) {
  fiber.validate();
  if (options.scan_points < 2) throw DomainError("scan_points must be >= 2");
  const double lo = options.window_min_nm;
  const double hi = options.window_max_nm.value_or(pump_nm);
  if (!(hi > lo)) throw DomainError("empty signal search window");

  auto dk = [&](double s) { return phase_mismatch(fiber, pump_nm, s, peak_power_W); };

  const double step = (hi - lo) / options.scan_points;
  bool have_prev = false;
  double prev_s = 0.0;
  double prev_f = 0.0;
  std::optional<std::pair<double, double>> bracket;
  for (int k = 0; k < options.scan_points; ++k) {
    const double s = lo + step * k;
    if (s >= pump_nm || !evaluable(fiber, pump_nm, s)) {
      have_prev = false;
      continue;
    }
    const double f = dk(s);
    if (have_prev && ((f < 0.0) != (prev_f < 0.0))) {
      bracket = {prev_s, s};  // keeps the sign change closest to the pump
    }
    if (f == 0.0) bracket = {s, s};
    have_prev = true;
    prev_s = s;
    prev_f = f;
  }

  if (bracket) {
    const double root = bracket->first == bracket->second
                            ? bracket->first
                            : bisect(dk, bracket->first, bracket->second,
                                     options.tolerance_rad_per_m);
    return make_point(fiber, pump_nm, root, peak_power_W);
  }

  if (fiber.core.contains(pump_nm) &&
      std::abs(dk(pump_nm)) < options.tolerance_rad_per_m) {
    return {pump_nm, pump_nm, pump_nm, dk(pump_nm)};
  }
  std::ostringstream os;
  os << "no phase-matched solution in window [" << lo << ", " << hi
     << "] nm for pump " << pump_nm << " nm";
  throw NumericalError(os.str());
}

std::vector<TuningSample> tuning_curve(const FiberSpec& fiber, double pump_from_nm,
                                       double pump_to_nm, int steps,
                                       double peak_power_W) {
  if (steps < 2) throw DomainError("tuning curve needs at least 2 steps");
  std::vector<TuningSample> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double pump =
        pump_from_nm + (pump_to_nm - pump_from_nm) * k / static_cast<double>(steps - 1);
    TuningSample sample{pump, std::nullopt};
    try {
      sample.point = solve_signal_idler(fiber, pump, peak_power_W);
    } catch (const NumericalError&) {
    } catch (const DomainError&) {
    }
    out.push_back(sample);
  }
  return out;
}

OutputBandwidths output_bandwidths(const FiberSpec& fiber, const PhaseMatchPoint& point,
                                   double pump_fwhm_nm, double peak_power_W) {
  if (point.degenerate()) throw DomainError("bandwidths undefined at the degenerate point");
  if (!(pump_fwhm_nm >= 0.0)) throw DomainError("pump FWHM must be >= 0");
  if (!(fiber.length_m > 0.0)) throw NumericalError("profile too flat: zero fiber length");

  const double pump = point.lambda_p_nm;
  const double root = point.lambda_s_nm;
  const double target = 2.0 * kSincHalfMax / fiber.length_m;
  auto excess = [&](double s) {
    return std::abs(phase_mismatch(fiber, pump, s, peak_power_W)) - target;
  };

  auto half_max_edge = [&](double direction) {
    double inner = root;
    double h = 1e-4;
    while (h < 50.0) {
      const double outer = root + direction * h;
      if (!evaluable(fiber, pump, outer) || outer >= pump) break;
      if (excess(outer) >= 0.0) {
        return bisect(excess, std::min(inner, outer), std::max(inner, outer), 1e-9);
      }
      inner = outer;
      h *= 2.0;
    }
    throw NumericalError("profile too flat: half maximum not bracketed");
  };

  OutputBandwidths out;
  out.phase_matching_fwhm_nm = half_max_edge(+1.0) - half_max_edge(-1.0);

  SolverOptions local;
  local.window_min_nm = root - 2.0;
  local.window_max_nm = std::min(root + 2.0, pump);
  local.scan_points = 400;
  const double h = 0.01;
  const double s_plus = solve_signal_idler(fiber, pump + h, peak_power_W, local).lambda_s_nm;
  const double s_minus = solve_signal_idler(fiber, pump - h, peak_power_W, local).lambda_s_nm;
  out.pump_slope = (s_plus - s_minus) / (2.0 * h);

  out.signal_fwhm_nm = std::hypot(out.phase_matching_fwhm_nm, out.pump_slope * pump_fwhm_nm);
  const double ratio = point.lambda_i_nm / point.lambda_s_nm;
  out.idler_fwhm_nm = out.signal_fwhm_nm * ratio * ratio;
  return out;
}

void write_tuning_csv(std::ostream& os, const std::vector<TuningSample>& samples) {
  const auto old_precision = os.precision(12);
  os << "lambda_p_nm,lambda_s_nm,lambda_i_nm,residual_mismatch\n";
  for (const auto& s : samples) {
    if (!s.point) continue;
    os << s.point->lambda_p_nm << ',' << s.point->lambda_s_nm << ','
       << s.point->lambda_i_nm << ',' << s.point->residual_mismatch << '\n';
  }
  os.precision(old_precision);
}

}  // namespace xsplice
