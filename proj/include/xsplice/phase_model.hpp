#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xsplice/dispersion.hpp"

namespace xsplice {

enum class Arm { signal, idler };

// Sign of the compensator phase. slow_vertical adds, slow_horizontal subtracts.
enum class Orientation : int { slow_vertical = +1, slow_horizontal = -1 };

inline double sign_of(Orientation o) { return static_cast<double>(static_cast<int>(o)); }
std::string to_string(Orientation o);
std::string to_string(Arm a);
Orientation parse_orientation(const std::string& text);

struct CompensatorSpec {
  double length_mm = 0.0;
  CompensatorMaterial material;
  Orientation orientation = Orientation::slow_vertical;
  Arm arm = Arm::signal;

  void validate() const;
};

struct CompensatorPair {
  CompensatorSpec signal;
  CompensatorSpec idler;
};

// Phase picked up in the second fiber by |HH> pairs born in the first one.
double phi1(const FiberSpec& fiber, double signal_nm, double pump_nm);
// Phase of the |VV> term carried by the two pump photons through fiber 1.
double phi2(const FiberSpec& fiber, double pump_nm);
// Self- plus cross-phase modulation offset, (5/3) gamma P L.
double phi_nl(const FiberSpec& fiber, double peak_power_W);
// phi2 + phi_nl - phi1, in radians.
double total_phase(const FiberSpec& fiber, double signal_nm, double pump_nm,
                   double peak_power_W = 0.0);

double compensator_phase(const CompensatorSpec& comp, double lambda_nm);

// total_phase plus the signal compensator at ls and the idler one at li.
double compensated_phase(const FiberSpec& fiber, const CompensatorPair& comps,
                         double signal_nm, double pump_nm, double peak_power_W = 0.0);

using PhaseFunction = std::function<double(double signal_nm, double pump_nm)>;

/// Phase function referenced to its value at (ref_signal, ref_pump), plus a
/// constant offset. Without compensators it wraps total_phase.
PhaseFunction make_phase_function(const FiberSpec& fiber,
                                  const std::optional<CompensatorPair>& comps,
                                  double peak_power_W, double ref_signal_nm,
                                  double ref_pump_nm, double offset_rad = 0.0);

/// Phase deviation around the grid mean, in degrees. phase_deg is stored
/// row-major with the signal index outermost.
struct PhaseMap {
  std::vector<double> signal_axis_nm;
  std::vector<double> pump_axis_nm;
  std::vector<double> phase_deg;

  double at(std::size_t signal_index, std::size_t pump_index) const {
    return phase_deg[signal_index * pump_axis_nm.size() + pump_index];
  }
  double peak_to_peak() const;
  double mean() const;
};

PhaseMap phase_map(const FiberSpec& fiber, const std::optional<CompensatorPair>& comps,
                   const std::vector<double>& signal_axis_nm,
                   const std::vector<double>& pump_axis_nm, double peak_power_W = 0.0);

// Long form: lambda_s,lambda_p,phase_deg.
void write_phase_map_csv(std::ostream& os, const PhaseMap& map);

}  // namespace xsplice
