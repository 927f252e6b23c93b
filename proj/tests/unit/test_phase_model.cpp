#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "xsplice/errors.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/phasematch.hpp"

using namespace xsplice;

namespace {

PhaseMap paper_map(const std::optional<CompensatorPair>& comps) {
  return phase_map(testing::paper_fiber(), comps,
                   testing::signal_spectrum().window_axis(101, 3.0),
                   testing::pump_spectrum().window_axis(101, 3.0));
}

}  // namespace

TEST_SUITE("phase_model") {

TEST_CASE("phi1 by hand") {
  const FiberSpec f = testing::paper_fiber();
  const double ls = 670.0, lp = 771.0, li = idler_wavelength(ls, lp);
  const double expected = 2 * M_PI * f.length_m / (ls * 1e-9) * (f.core.index(ls) + f.birefringence) +
                          2 * M_PI * f.length_m / (li * 1e-9) * (f.core.index(li) + f.birefringence);
  CHECK(phi1(f, ls, lp) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nonlinear offset") {
  const FiberSpec f = testing::paper_fiber();
  CHECK(phi_nl(f, 100.0) == doctest::Approx(0.2167).epsilon(1e-3));
  CHECK(phi_nl(f, 0.0) == 0.0);
  CHECK_THROWS_AS(phi_nl(f, -1.0), DomainError);
  CHECK(total_phase(f, 670.0, 771.0, 100.0) - total_phase(f, 670.0, 771.0) ==
        doctest::Approx(phi_nl(f, 100.0)));
}

TEST_CASE("compensator phase") {
  const auto quartz = testing::db().compensator("quartz");
  CompensatorSpec c{47.6, quartz, Orientation::slow_vertical, Arm::idler};
  const double dn = crystal_birefringence(quartz, 905.0);
  CHECK(compensator_phase(c, 905.0) ==
        doctest::Approx(2 * M_PI * 0.0476 * dn / 905e-9).epsilon(1e-12));
  c.orientation = Orientation::slow_horizontal;
  CHECK(compensator_phase(c, 905.0) ==
        doctest::Approx(-2 * M_PI * 0.0476 * dn / 905e-9).epsilon(1e-12));
  c.length_mm = 0.0;
  CHECK(compensator_phase(c, 905.0) == 0.0);
  c.length_mm = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("zero-length compensators leave the phase unchanged") {
  auto comps = testing::paper_compensators();
  comps.signal.length_mm = comps.idler.length_mm = 0.0;
  const FiberSpec f = testing::paper_fiber();
  CHECK(compensated_phase(f, comps, 670.1, 771.05) == total_phase(f, 670.1, 771.05));
}

TEST_CASE("orientation parsing") {
  CHECK(parse_orientation("slow_vertical") == Orientation::slow_vertical);
  CHECK(parse_orientation("slow_horizontal") == Orientation::slow_horizontal);
  CHECK(parse_orientation(to_string(Orientation::slow_horizontal)) ==
        Orientation::slow_horizontal);
  CHECK_THROWS_AS(parse_orientation("diagonal"), DomainError);
}

TEST_CASE("referenced phase function") {
  const FiberSpec f = testing::paper_fiber();
  const auto fn = make_phase_function(f, testing::paper_compensators(), 0.0, 670.0, 771.0, 0.5);
  CHECK(fn(670.0, 771.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto raw = make_phase_function(f, std::nullopt, 0.0, 670.0, 771.0);
  CHECK(raw(670.2, 771.1) ==
        doctest::Approx(total_phase(f, 670.2, 771.1) - total_phase(f, 670.0, 771.0)));
}

TEST_CASE("phase map spans about 800 degrees uncompensated") {
  const PhaseMap m = paper_map(std::nullopt);
  CHECK(m.signal_axis_nm.size() == 101);
  CHECK(m.phase_deg.size() == 101 * 101);
  CHECK(m.peak_to_peak() > 600.0);
  CHECK(m.peak_to_peak() < 1000.0);
  CHECK(std::abs(m.mean()) < 1e-9);
}

TEST_CASE("compensated map is nearly flat") {
  const PhaseMap m = paper_map(testing::paper_compensators());
  CHECK(m.peak_to_peak() <= 10.0);
  auto flipped = testing::paper_compensators();
  flipped.signal.orientation = Orientation::slow_horizontal;
  CHECK(paper_map(flipped).peak_to_peak() > m.peak_to_peak());
}

TEST_CASE("phase map CSV") {
  const PhaseMap m = phase_map(testing::paper_fiber(), std::nullopt, {669.9, 670.0, 670.1},
                               {770.9, 771.0});
  std::ostringstream os;
  write_phase_map_csv(os, m);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "lambda_s,lambda_p,phase_deg");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
  CHECK_THROWS_AS(phase_map(testing::paper_fiber(), std::nullopt, {}, {771.0}), DomainError);
}

}  // TEST_SUITE
