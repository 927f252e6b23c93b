#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xsplice/phase_model.hpp"
#include "xsplice/spectrum.hpp"
#include "xsplice/state_model.hpp"

namespace xsplice {

/// Counts collected over one integration interval. Counts are stored as
/// doubles so that expectation-mode predictions can use the same record.
struct CountRecord {
  double duration_s = 0.0;
  double signal_total = 0.0;
  double signal_background = 0.0;
  double idler_total = 0.0;
  double idler_background = 0.0;
  double coincidences_total = 0.0;
  double coincidences_background = 0.0;
  // Accidental part of coincidences_background (the rest is Raman-driven).
  double accidentals = 0.0;

  void validate() const;
};

/// Phenomenological source and detection parameters. Powers are average
/// pump powers in mW.
struct NoiseParams {
  double pair_rate_coeff = 0.0;    // pairs / (s mW^2)
  double raman_s = 0.0;            // detected signal-arm Raman counts / (s mW)
  double raman_i = 0.0;            // detected idler-arm Raman counts / (s mW)
  double dark_s = 0.0;             // counts / s
  double dark_i = 0.0;             // counts / s
  double eta_s = 1.0;              // signal detection-path efficiency
  double eta_i = 1.0;              // idler detection-path efficiency
  double rep_rate_hz = 76e6;
  double window_s = 1e-9;
  double spm_broadening = 0.0;     // 1/mW, pump FWHM grows as (1 + k P)
  double raman_coincidence = 0.0;  // unpolarized noise coincidences / (s mW)

  void validate() const;
};

struct HeraldingEfficiencies {
  double signal = 0.0;  // P(detect signal | idler detected)
  double idler = 0.0;   // P(detect idler | signal detected)
};

HeraldingEfficiencies heralding_efficiencies(const CountRecord& record);

/// Lower bound on splice transmission at one arm's wavelength: pairs born in
/// the first fiber cross the splice, pairs from the second do not, so the
/// ratio of their heralding efficiencies (clamped to [0, 1]) bounds it.
double splice_transmission_bound(const CountRecord& first_fiber_pairs,
                                 const CountRecord& second_fiber_pairs, Arm arm);

struct ExpectedRates {
  double pair_rate = 0.0;
  double singles_s = 0.0;
  double singles_i = 0.0;
  double background_s = 0.0;
  double background_i = 0.0;
  double true_coincidences = 0.0;
  double accidentals = 0.0;
  double raman_coincidences = 0.0;
};

ExpectedRates expected_rates(const NoiseParams& params, double power_mW);

enum class SamplingMode { expectation, poisson };

CountRecord predict_counts(const NoiseParams& params, double power_mW, double duration_s,
                           SamplingMode mode = SamplingMode::expectation,
                           std::uint64_t seed = 0);

// True coincidences over accidentals; +inf when there are no accidentals.
double car(const NoiseParams& params, double power_mW);

/// Everything the state-level observables need besides NoiseParams.
struct SourceModel {
  FiberSpec fiber;
  CompensatorPair compensators;
  GaussianSpectrum pump;
  GaussianSpectrum signal;
  // Constant phase of the emitted state; pi gives |Phi->, which the signal
  // half-wave plate turns into |Psi->.
  double state_phase_rad = 3.14159265358979323846;
  MixtureOptions mixture{64, 6.0, false, 1e-6};
};

struct VisibilityPoint {
  double power_mW = 0.0;
  double pump_fwhm_nm = 0.0;
  double noise_weight = 0.0;
  double v_rect = 0.0;
  double v_diag = 0.0;
  double fidelity_psi_minus = 0.0;  // after the signal flip
};

/// Effective state at a given power: spectral mixture with an SPM-broadened
/// pump, then white noise weighted by the noise fraction of coincidences.
TwoQubitState modeled_state(const NoiseParams& params, const SourceModel& source,
                            double power_mW, VisibilityPoint* summary = nullptr);

std::vector<VisibilityPoint> visibility_vs_power(const NoiseParams& params,
                                                 const SourceModel& source,
                                                 std::span<const double> powers_mW);

// Power maximizing the diagonal visibility over [lo, hi] mW.
VisibilityPoint diagonal_visibility_optimum(const NoiseParams& params,
                                            const SourceModel& source, double lo_mW = 1.0,
                                            double hi_mW = 100.0);

enum class Observable {
  car,
  pair_rate,
  coincidence_rate,  // background-subtracted coincidences / s
  singles_s,
  singles_i,
  background_s,
  background_i,
  v_rect,
  v_diag,
  fidelity,             // |Psi-> fidelity after the signal flip
  v_diag_peak_power,    // power (mW) of the diagonal-visibility maximum
  fidelity_at_peak,     // fidelity at that maximum
};

enum class FitParameter {
  pair_rate_coeff,
  raman_s,
  raman_i,
  dark_s,
  dark_i,
  eta_s,
  eta_i,
  spm_broadening,
  raman_coincidence,
};

std::string to_string(Observable o);
std::string to_string(FitParameter p);
Observable parse_observable(const std::string& text);
FitParameter parse_fit_parameter(const std::string& text);

struct FitTarget {
  double power_mW = 0.0;  // ignored by the *_peak observables
  Observable observable = Observable::car;
  double value = 0.0;
};

struct FitResult {
  NoiseParams params;
  std::vector<double> model_values;
  std::vector<double> relative_residuals;  // model / target - 1
  int evaluations = 0;
};

double evaluate_observable(const NoiseParams& params, const FitTarget& target,
                           const SourceModel* source = nullptr);

/// Least-squares fit of the selected parameters in log space of the
/// observables (log-ratio residuals). Parameters are optimized as logs
/// (efficiencies as logits), so free parameters must start strictly inside
/// their domain. Throws DomainError when fewer targets than free parameters
/// are given, and NumericalError on non-convergence.
FitResult fit_params(std::span<const FitTarget> targets, const NoiseParams& initial,
                     std::span<const FitParameter> free,
                     const SourceModel* source = nullptr);

// power_mW,singles_s,singles_i,coincidences,accidentals,car,v_rect,v_diag
struct SweepRow {
  double power_mW;
  CountRecord counts;
  double car;
  double v_rect;
  double v_diag;
};

std::vector<SweepRow> power_sweep(const NoiseParams& params, const SourceModel& source,
                                  std::span<const double> powers_mW, double duration_s,
                                  SamplingMode mode, std::uint64_t seed);

void write_power_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace xsplice
