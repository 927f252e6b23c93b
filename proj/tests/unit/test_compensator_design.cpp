#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "xsplice/compensator_design.hpp"
#include "xsplice/errors.hpp"
#include "xsplice/optim.hpp"
#include "xsplice/phasematch.hpp"

using namespace xsplice;

namespace {

const CompensatorDesign& design() {
  static const CompensatorDesign d =
      optimize_compensators(testing::paper_fiber(), testing::db().compensator("quartz"),
                            testing::pump_spectrum(), testing::signal_spectrum());
  return d;
}

double objective(const CompensatorPair& comps) {
  return weighted_phase_variance(testing::paper_fiber(), comps, testing::pump_spectrum(),
                                 testing::signal_spectrum());
}

}  // namespace

TEST_SUITE("compensator_design") {

TEST_CASE("simplex minimizer on Rosenbrock") {
  auto rosen = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  NelderMeadOptions opt;
  opt.initial_step = 0.5;
  opt.x_tolerance = 1e-9;
  opt.max_iterations = 20000;
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, opt);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimum is close to the built design") {
  const auto& d = design();
  CHECK(d.compensators.signal.orientation == Orientation::slow_vertical);
  CHECK(d.compensators.idler.orientation == Orientation::slow_horizontal);
  CHECK(std::abs(d.compensators.signal.length_mm - 67.3) <= 0.15 * 67.3);
  CHECK(std::abs(d.compensators.idler.length_mm - 47.6) <= 0.15 * 47.6);
  CHECK(d.residual_deg <= 10.0);
  CHECK(d.weighted_std_deg == doctest::Approx(std::sqrt(d.objective_rad2) * 180 / M_PI));
}

TEST_CASE("moment objective agrees with direct evaluation") {
  const auto& d = design();
  CHECK(objective(d.compensators) ==
        doctest::Approx(d.objective_rad2).epsilon(1e-6).scale(1e-12));
}

TEST_CASE("one millimetre perturbations increase the objective") {
  const auto& d = design();
  const double best = objective(d.compensators);
  for (int arm = 0; arm < 2; ++arm) {
    for (double delta : {-1.0, 1.0}) {
      CompensatorPair p = d.compensators;
      (arm == 0 ? p.signal : p.idler).length_mm += delta;
      CHECK(objective(p) > best);
    }
  }
}

TEST_CASE("compensation beats no compensation by orders of magnitude") {
  const double bare = weighted_phase_variance(testing::paper_fiber(), std::nullopt,
                                              testing::pump_spectrum(),
                                              testing::signal_spectrum());
  CHECK(bare > 1e4 * design().objective_rad2);
}

TEST_CASE("birefringence calibration") {
  const auto& silica = testing::db().model("fused_silica");
  const double b = calibrate_birefringence(silica, 771.0, 670.0);
  const auto pt = solve_signal_idler({1.0, b, 0.0, silica}, 771.0);
  CHECK(pt.lambda_s_nm == doctest::Approx(670.0).epsilon(1e-8));
  CHECK(calibrate_birefringence(silica, 771.0, 771.0) == 0.0);
  CHECK_THROWS_AS(calibrate_birefringence(silica, 771.0, 300.0), NumericalError);
  // Other pump, same signal offset: B moves accordingly.
  const double b2 = calibrate_birefringence(silica, 771.0, 660.0);
  CHECK(b2 > b);
}

}  // TEST_SUITE
