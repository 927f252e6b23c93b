#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "xsplice/phase_model.hpp"
#include "xsplice/spectrum.hpp"

namespace xsplice {

using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

/// Two-qubit density matrix in the (HH, HV, VH, VV) basis; the first qubit
/// is the signal photon. Construction checks Hermiticity and unit trace to
/// 1e-12 and eigenvalues >= -1e-10.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Matrix4c& matrix);

  const Matrix4c& matrix() const { return rho_; }
  std::complex<double> operator()(int row, int col) const { return rho_(row, col); }

  static TwoQubitState maximally_mixed();
  static TwoQubitState from_pure(const Vector4c& psi);

 private:
  Matrix4c rho_;
};

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };

Vector4c bell_vector(BellState which);
std::string to_string(BellState which);
BellState parse_bell_state(const std::string& text);

// p |Bell><Bell| + (1 - p) I/4
TwoQubitState werner_state(double p, BellState which = BellState::psi_minus);

// Projector onto (|HH> + e^{i phi} |VV>)/sqrt(2).
TwoQubitState pure_phi_state(double phi);

struct MixtureOptions {
  int nodes = 64;           // Gauss-Legendre nodes per axis
  // Integration half-width in units of sigma. At 6 sigma the truncated tail
  // (~2e-9) is below the 1e-6 accuracy target; 4 sigma leaves ~6e-5.
  double n_sigma = 6.0;
  bool check_convergence = true;
  double convergence_tolerance = 1e-6;
};

struct MixtureDiagnostics {
  std::complex<double> coherence;  // rho_{HH,VV}
  double convergence_delta = 0.0;  // | |c(2N)| - |c(N)| |, when checked
  bool converged = true;
};

/// Effective state of the spectral mixture: populations 1/2 on HH and VV,
/// coherence (1/2) * integral of exp(-i phi) p_s p_p over both wavelengths.
TwoQubitState mixed_state_over_spectra(const PhaseFunction& phase,
                                       const GaussianSpectrum& signal,
                                       const GaussianSpectrum& pump,
                                       const MixtureOptions& options = {},
                                       MixtureDiagnostics* diagnostics = nullptr);

// Supported node counts for the tensor-product quadrature.
bool supported_quadrature_nodes(int nodes);

// <psi| rho |psi>; throws DomainError unless |psi| == 1 to 1e-9.
double fidelity(const TwoQubitState& rho, const Vector4c& target);

struct BellFidelity {
  BellState state;
  double fidelity;
};
BellFidelity best_bell_fidelity(const TwoQubitState& rho);

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double state_fidelity(const TwoQubitState& rho, const TwoQubitState& sigma);

double concurrence(const TwoQubitState& rho);
inline double tangle(const TwoQubitState& rho) {
  const double c = concurrence(rho);
  return c * c;
}

enum class AnalyzerBasis { rectilinear, diagonal };

/// Two-photon polarization visibility: analyzer 1 fixed on the first basis
/// vector (H or D), analyzer 2 switched between the two basis vectors.
double visibility(const TwoQubitState& rho, AnalyzerBasis basis);

// Conjugation by sigma_x on the signal qubit (half-wave plate at 45 deg).
TwoQubitState relabel_signal_flip(const TwoQubitState& rho);

// {"basis": ["HH","HV","VH","VV"], "matrix": [[[re, im], ...], ...]}
nlohmann::json to_json(const TwoQubitState& rho);
TwoQubitState state_from_json(const nlohmann::json& doc);

}  // namespace xsplice
