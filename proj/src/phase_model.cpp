#include "xsplice/phase_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "xsplice/errors.hpp"
#include "xsplice/phasematch.hpp"

namespace xsplice {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
}  // namespace

std::string to_string(Orientation o) {
  return o == Orientation::slow_vertical ? "slow_vertical" : "slow_horizontal";
}

std::string to_string(Arm a) { return a == Arm::signal ? "signal" : "idler"; }

Orientation parse_orientation(const std::string& text) {
  if (text == "slow_vertical" || text == "+1" || text == "1") return Orientation::slow_vertical;
  if (text == "slow_horizontal" || text == "-1") return Orientation::slow_horizontal;
  throw DomainError("unknown compensator orientation '" + text + "'");
}

void CompensatorSpec::validate() const {
  if (!(length_mm >= 0.0)) throw DomainError("compensator length must be >= 0");
}

double phi1(const FiberSpec& fiber, double signal_nm, double pump_nm) {
  const double idler_nm = idler_wavelength(signal_nm, pump_nm);
  const double l_nm = fiber.length_m * 1e9;
  return kTwoPi * l_nm *
         (slow_axis_index(fiber, signal_nm) / signal_nm +
          slow_axis_index(fiber, idler_nm) / idler_nm);
}

double phi2(const FiberSpec& fiber, double pump_nm) {
  const double l_nm = fiber.length_m * 1e9;
  return 2.0 * kTwoPi * l_nm * fast_axis_index(fiber, pump_nm) / pump_nm;
}

double phi_nl(const FiberSpec& fiber, double peak_power_W) {
  if (!(peak_power_W >= 0.0)) throw DomainError("peak power must be >= 0");
  return (1.0 + 2.0 / 3.0) * fiber.gamma_per_W_m * peak_power_W * fiber.length_m;
}

double total_phase(const FiberSpec& fiber, double signal_nm, double pump_nm,
                   double peak_power_W) {
  return phi2(fiber, pump_nm) + phi_nl(fiber, peak_power_W) -
         phi1(fiber, signal_nm, pump_nm);
}

double compensator_phase(const CompensatorSpec& comp, double lambda_nm) {
  comp.validate();
  const double length_nm = comp.length_mm * 1e6;
  return sign_of(comp.orientation) * kTwoPi * length_nm *
         crystal_birefringence(comp.material, lambda_nm) / lambda_nm;
}

double compensated_phase(const FiberSpec& fiber, const CompensatorPair& comps,
                         double signal_nm, double pump_nm, double peak_power_W) {
  const double idler_nm = idler_wavelength(signal_nm, pump_nm);
  return total_phase(fiber, signal_nm, pump_nm, peak_power_W) +
         compensator_phase(comps.signal, signal_nm) +
         compensator_phase(comps.idler, idler_nm);
}

PhaseFunction make_phase_function(const FiberSpec& fiber,
                                  const std::optional<CompensatorPair>& comps,
                                  double peak_power_W, double ref_signal_nm,
                                  double ref_pump_nm, double offset_rad) {
  auto raw = [fiber, comps, peak_power_W](double s, double p) {
    return comps ? compensated_phase(fiber, *comps, s, p, peak_power_W)
                 : total_phase(fiber, s, p, peak_power_W);
  };
  const double reference = raw(ref_signal_nm, ref_pump_nm);
  return [raw, reference, offset_rad](double s, double p) {
    return raw(s, p) - reference + offset_rad;
  };
}

double PhaseMap::peak_to_peak() const {
  if (phase_deg.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(phase_deg.begin(), phase_deg.end());
  return *hi - *lo;
}

double PhaseMap::mean() const {
  if (phase_deg.empty()) return 0.0;
  double sum = 0.0;
  for (double v : phase_deg) sum += v;
  return sum / static_cast<double>(phase_deg.size());
}

PhaseMap phase_map(const FiberSpec& fiber, const std::optional<CompensatorPair>& comps,
                   const std::vector<double>& signal_axis_nm,
                   const std::vector<double>& pump_axis_nm, double peak_power_W) {
  if (signal_axis_nm.empty() || pump_axis_nm.empty()) {
    throw DomainError("phase map axes must be nonempty");
  }
  if (!std::is_sorted(signal_axis_nm.begin(), signal_axis_nm.end()) ||
      !std::is_sorted(pump_axis_nm.begin(), pump_axis_nm.end())) {
    throw DomainError("phase map axes must be sorted");
  }
  PhaseMap map{signal_axis_nm, pump_axis_nm, {}};
  map.phase_deg.reserve(signal_axis_nm.size() * pump_axis_nm.size());

  // Reference at the grid's first point keeps the subtraction well
  // conditioned; absolute phases are ~1e6 rad.
  const double reference =
      comps ? compensated_phase(fiber, *comps, signal_axis_nm.front(),
                                pump_axis_nm.front(), peak_power_W)
            : total_phase(fiber, signal_axis_nm.front(), pump_axis_nm.front(),
                          peak_power_W);
  for (double s : signal_axis_nm) {
    for (double p : pump_axis_nm) {
      const double phase = comps ? compensated_phase(fiber, *comps, s, p, peak_power_W)
                                 : total_phase(fiber, s, p, peak_power_W);
      map.phase_deg.push_back((phase - reference) * kDegPerRad);
    }
  }
  const double mean = map.mean();
  for (double& v : map.phase_deg) v -= mean;
  return map;
}

void write_phase_map_csv(std::ostream& os, const PhaseMap& map) {
  const auto old_precision = os.precision(12);
  os << "lambda_s,lambda_p,phase_deg\n";
  for (std::size_t i = 0; i < map.signal_axis_nm.size(); ++i) {
    for (std::size_t j = 0; j < map.pump_axis_nm.size(); ++j) {
      os << map.signal_axis_nm[i] << ',' << map.pump_axis_nm[j] << ',' << map.at(i, j)
         << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace xsplice
