#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xsplice/state_model.hpp"

namespace xsplice {

/// Product projector |a><a| (signal) x |b><b| (idler).
struct MeasurementSetting {
  Eigen::Vector2cd signal;
  Eigen::Vector2cd idler;
  std::string label;

  void validate() const;
  Matrix4c projector() const;
};

// Single-qubit analyzer states by letter: H V D A R L.
Eigen::Vector2cd polarization_state(char letter);

// All 36 pairs from {H, V, D, A, R, L}, signal letter first.
std::vector<MeasurementSetting> standard_settings();

// Two-letter label ("HV", "DR", ...) to setting.
MeasurementSetting setting_from_label(const std::string& label);

struct TomographyData {
  std::vector<MeasurementSetting> settings;
  std::vector<double> counts;  // non-negative; integral for sampled data
  double total_per_setting = 0.0;

  void validate() const;
};

// Born probabilities Tr(rho Pi) per setting.
std::vector<double> born_probabilities(const TwoQubitState& rho,
                                       const std::vector<MeasurementSetting>& settings);

// Noise-free data: counts equal their means.
TomographyData expected_counts(const TwoQubitState& rho,
                               const std::vector<MeasurementSetting>& settings,
                               double n_per_setting);

TomographyData simulate_counts(const TwoQubitState& rho,
                               const std::vector<MeasurementSetting>& settings,
                               double n_per_setting, std::uint64_t seed);

// Rank of the linear map rho -> (Tr rho Pi_k); 16 means informationally complete.
int measurement_rank(const std::vector<MeasurementSetting>& settings);

// Poisson log-likelihood with means total_per_setting * Tr(rho Pi_k).
double log_likelihood(const TwoQubitState& rho, const TomographyData& data);

struct MleOptions {
  int max_iterations = 2000;
  int random_starts = 2;
  std::uint64_t seed = 12345;
};

struct MleResult {
  TwoQubitState state = TwoQubitState::maximally_mixed();
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;  // false: best state found, iteration cap hit
};

/// Maximum-likelihood state over the Cholesky parameterization
/// rho = T T^dag / Tr(T T^dag). Throws DomainError for incomplete settings.
MleResult reconstruct_mle(const TomographyData& data, const MleOptions& options = {});

struct ErrorBars {
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  double tangle_mean = 0.0;
  double tangle_std = 0.0;
  int rounds = 0;
  bool degenerate = false;  // a single round carries no spread
};

/// Parametric bootstrap: Poisson resamples of the reconstructed means,
/// re-reconstructed; spread of best-Bell fidelity and tangle.
ErrorBars error_bars(const TomographyData& data, int n_bootstrap, std::uint64_t seed);

// setting_label,count
void write_tomography_csv(std::ostream& os, const TomographyData& data);
TomographyData read_tomography_csv(std::istream& is, double total_per_setting);

}  // namespace xsplice
