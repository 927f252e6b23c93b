#include "xsplice/spectrum.hpp"

#include <cmath>
#include <numbers>

#include "xsplice/errors.hpp"

namespace xsplice {

namespace {
// FWHM = 2 sqrt(2 ln 2) sigma
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);
}  // namespace

void GaussianSpectrum::validate() const {
  if (!(fwhm_nm > 0.0)) throw DomainError("spectrum FWHM must be > 0");
  if (!(center_nm > 0.0)) throw DomainError("spectrum center must be > 0");
}

double GaussianSpectrum::sigma_nm() const { return fwhm_nm / kFwhmPerSigma; }

double GaussianSpectrum::density(double lambda_nm) const {
  const double s = sigma_nm();
  const double z = (lambda_nm - center_nm) / s;
  return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

std::vector<double> GaussianSpectrum::window_axis(int n_points, double n_sigma) const {
  validate();
  if (n_points < 1) throw DomainError("axis needs at least one point");
  if (n_points == 1) return {center_nm};
  const double half = n_sigma * sigma_nm();
  std::vector<double> axis(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    axis[static_cast<std::size_t>(k)] =
        center_nm - half + 2.0 * half * k / static_cast<double>(n_points - 1);
  }
  return axis;
}

}  // namespace xsplice
