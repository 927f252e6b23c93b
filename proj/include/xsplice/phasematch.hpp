#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "xsplice/dispersion.hpp"

namespace xsplice {

struct PhaseMatchPoint {
  double lambda_p_nm = 0.0;
  double lambda_s_nm = 0.0;
  double lambda_i_nm = 0.0;
  double residual_mismatch = 0.0;  // rad/m at the returned root

  bool degenerate() const { return lambda_s_nm == lambda_p_nm; }
};

/// Idler wavelength from energy conservation for two pump photons:
/// 2/lp = 1/ls + 1/li. Throws DomainError when 2 ls == lp.
double idler_wavelength(double signal_nm, double pump_nm);

/// Vector phase mismatch in rad/m with the pump on the slow axis and both
/// daughter photons on the fast axis:
///   dk = 2 pi [2 (n(lp) + B)/lp - n(ls)/ls - n(li)/li] + 2 gamma P.
double phase_mismatch(const FiberSpec& fiber, double pump_nm, double signal_nm,
                      double peak_power_W = 0.0);

struct SolverOptions {
  double window_min_nm = 400.0;
  // Defaults to the pump wavelength.
  std::optional<double> window_max_nm;
  int scan_points = 2000;
  double tolerance_rad_per_m = 1e-6;
};

/// Finds the phase-matched signal/idler pair for a given pump.
///
/// The signal window is sampled on a uniform coarse grid; samples whose idler
/// falls outside the core model's validity range are skipped. The sign change
/// closest to the pump is refined by bisection until |dk| drops below the
/// tolerance (or the bracket collapses to adjacent doubles). When no
/// non-degenerate bracket exists but dk vanishes at ls = lp, the degenerate
/// point ls = li = lp is returned. Otherwise throws NumericalError.
PhaseMatchPoint solve_signal_idler(const FiberSpec& fiber, double pump_nm,
                                   double peak_power_W = 0.0,
                                   const SolverOptions& options = {});

struct TuningSample {
  double pump_nm = 0.0;
  std::optional<PhaseMatchPoint> point;  // empty when no solution was found
};

std::vector<TuningSample> tuning_curve(const FiberSpec& fiber, double pump_from_nm,
                                       double pump_to_nm, int steps,
                                       double peak_power_W = 0.0);

struct OutputBandwidths {
  double signal_fwhm_nm = 0.0;
  double idler_fwhm_nm = 0.0;
  double phase_matching_fwhm_nm = 0.0;  // sinc^2 width alone
  double pump_slope = 0.0;              // d ls / d lp at the root
};

/// FWHM of the sinc^2(dk L / 2) profile in the signal wavelength at fixed
/// pump, added in quadrature with the pump bandwidth mapped through the local
/// tuning slope. The idler width follows from |d li / d ls| = (li/ls)^2.
OutputBandwidths output_bandwidths(const FiberSpec& fiber, const PhaseMatchPoint& point,
                                   double pump_fwhm_nm, double peak_power_W = 0.0);

// Columns: lambda_p_nm,lambda_s_nm,lambda_i_nm,residual_mismatch. Unsolved
// samples are omitted.
void write_tuning_csv(std::ostream& os, const std::vector<TuningSample>& samples);

}  // namespace xsplice
