#pragma once

#include <functional>
#include <vector>

namespace xsplice {

struct NelderMeadOptions {
  double initial_step = 1.0;
  // Stop when every vertex lies within x_tolerance of the best one (per
  // coordinate) and, if f_tolerance > 0, the spread of values is below it.
  double x_tolerance = 1e-6;
  double f_tolerance = 0.0;
  int max_iterations = 5000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Standard reflection/expansion/contraction/shrink simplex minimizer.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace xsplice
