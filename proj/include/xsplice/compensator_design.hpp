#pragma once

#include <optional>

#include "xsplice/errors.hpp"

#include "xsplice/dispersion.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/spectrum.hpp"

namespace xsplice {

struct DesignGrid {
  int points_per_axis = 101;
  double n_sigma = 3.0;
};

struct CompensatorDesign {
  CompensatorPair compensators;
  double residual_deg = 0.0;       // peak-to-peak of the mean-subtracted map
  double weighted_std_deg = 0.0;   // sqrt of the minimized objective
  double objective_rad2 = 0.0;     // spectrum-weighted phase variance
};

/// Spectrum-weighted variance (rad^2) of the phase over the design grid,
/// evaluated point by point. Weights are p_s(ls) p_p(lp) normalized on the grid.
double weighted_phase_variance(const FiberSpec& fiber,
                               const std::optional<CompensatorPair>& comps,
                               const GaussianSpectrum& pump, const GaussianSpectrum& signal,
                               const DesignGrid& grid = {}, double peak_power_W = 0.0);

struct CompensatorSearch {
  double max_length_mm = 100.0;
  double coarse_step_mm = 0.5;
  double resolution_mm = 1e-3;
  int max_iterations = 5000;
};

class OptimizationError : public NumericalError {
 public:
  OptimizationError(const std::string& what, CompensatorDesign best)
      : NumericalError(what), best_(std::move(best)) {}
  const CompensatorDesign& best_so_far() const { return best_; }

 private:
  CompensatorDesign best_;
};

/// Chooses both compensator lengths and orientations minimizing the weighted
/// phase variance: a coarse scan over all four orientation combinations,
/// then simplex refinement from each combination's best grid point.
CompensatorDesign optimize_compensators(const FiberSpec& fiber,
                                        const CompensatorMaterial& material,
                                        const GaussianSpectrum& pump,
                                        const GaussianSpectrum& signal,
                                        const DesignGrid& grid = {},
                                        const CompensatorSearch& search = {});

struct CalibrationOptions {
  double b_min = 1e-5;
  double b_max = 1e-3;
  double tolerance_nm = 1e-6;
};

/// Birefringence B for which the phase-matched signal at `pump_nm` lands on
/// `signal_target_nm`. Returns 0 for a degenerate target.
double calibrate_birefringence(const SellmeierModel& core, double pump_nm,
                               double signal_target_nm, const CalibrationOptions& options = {});

}  // namespace xsplice
