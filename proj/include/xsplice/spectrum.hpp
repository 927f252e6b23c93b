#pragma once

#include <vector>

namespace xsplice {

/// Normalized Gaussian marginal spectrum, parameterized by center and FWHM.
struct GaussianSpectrum {
  double center_nm = 0.0;
  double fwhm_nm = 0.0;

  void validate() const;
  double sigma_nm() const;
  double density(double lambda_nm) const;

  // n_points equally spaced samples over center +- n_sigma * sigma.
  std::vector<double> window_axis(int n_points, double n_sigma = 3.0) const;
};

}  // namespace xsplice
