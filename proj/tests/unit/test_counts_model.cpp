#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "xsplice/config.hpp"
#include "xsplice/counts_model.hpp"
#include "xsplice/errors.hpp"

using namespace xsplice;

namespace {

const Config& setup() {
  static const Config c = default_config(testing::db());
  return c;
}

CountRecord paper_record() {
  CountRecord r;
  r.duration_s = 30.0;
  r.signal_total = 488350;
  r.signal_background = 146901;
  r.idler_total = 1657630;
  r.idler_background = 1435459;
  r.coincidences_total = 53256;
  r.coincidences_background = 55;
  return r;
}

NoiseParams toy_params() {
  NoiseParams p;
  p.pair_rate_coeff = 40.0;
  p.raman_s = 200.0;
  p.raman_i = 1500.0;
  p.dark_s = 250.0;
  p.dark_i = 250.0;
  p.eta_s = 0.22;
  p.eta_i = 0.21;
  return p;
}

}  // namespace

TEST_SUITE("counts_model") {

TEST_CASE("heralding efficiencies from the measured record") {
  const auto h = heralding_efficiencies(paper_record());
  CHECK(std::round(h.signal * 100) / 100 == doctest::Approx(0.24));
  CHECK(std::round(h.idler * 100) / 100 == doctest::Approx(0.16));
  CHECK(h.signal == doctest::Approx(0.239).epsilon(2e-3));
  CHECK(h.idler == doctest::Approx(0.156).epsilon(2e-3));
}

TEST_CASE("heralding: lossless toy, linearity, errors") {
  CountRecord r{1.0, 1000, 0, 1000, 0, 1000, 0, 0};
  const auto h = heralding_efficiencies(r);
  CHECK(h.signal == 1.0);
  CHECK(h.idler == 1.0);
  CountRecord half = paper_record();
  const auto full = heralding_efficiencies(half);
  half.coincidences_total = (half.coincidences_total - half.coincidences_background) / 2 +
                            half.coincidences_background;
  const auto hh = heralding_efficiencies(half);
  CHECK(hh.signal == doctest::Approx(full.signal / 2));
  CHECK(hh.idler == doctest::Approx(full.idler / 2));
  CountRecord empty{1.0, 10, 10, 10, 0, 5, 0, 0};
  CHECK_THROWS_AS(heralding_efficiencies(empty), DomainError);
  CountRecord bad{1.0, 10, 20, 10, 0, 5, 0, 0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("splice transmission bound") {
  const auto r = paper_record();
  CHECK(splice_transmission_bound(r, r, Arm::signal) == doctest::Approx(1.0));
  CHECK(splice_transmission_bound(r, r, Arm::idler) == doctest::Approx(1.0));

  // Fiber-1 pairs lose a fraction 1 - t of their signal photons at the splice.
  const double t = 0.93;
  NoiseParams second = toy_params();
  NoiseParams first = second;
  first.eta_s *= t;
  const auto exact = splice_transmission_bound(
      predict_counts(first, 30.0, 30.0), predict_counts(second, 30.0, 30.0), Arm::signal);
  CHECK(exact == doctest::Approx(t).epsilon(1e-12));

  // Sampled: enough time for ~1e7 coincidences per record.
  const auto a = predict_counts(first, 30.0, 6000.0, SamplingMode::poisson, 1);
  const auto b = predict_counts(second, 30.0, 6000.0, SamplingMode::poisson, 2);
  CHECK(std::abs(splice_transmission_bound(a, b, Arm::signal) - t) < 1e-3);
  CHECK(splice_transmission_bound(b, a, Arm::signal) == 1.0);
}

TEST_CASE("expectation mode equals the rate formulas") {
  const NoiseParams p = toy_params();
  const double P = 20.0, T = 30.0;
  const auto rec = predict_counts(p, P, T);
  const double pairs = p.pair_rate_coeff * P * P;
  const double ss = p.eta_s * pairs + p.raman_s * P + p.dark_s;
  const double si = p.eta_i * pairs + p.raman_i * P + p.dark_i;
  CHECK(rec.signal_total == doctest::Approx(ss * T).epsilon(1e-14));
  CHECK(rec.idler_total == doctest::Approx(si * T).epsilon(1e-14));
  CHECK(rec.accidentals == doctest::Approx(ss * si / p.rep_rate_hz * T).epsilon(1e-14));
  CHECK(rec.coincidences_total - rec.coincidences_background ==
        doctest::Approx(p.eta_s * p.eta_i * pairs * T).epsilon(1e-12));
}

TEST_CASE("limits: no pump, no pairs") {
  const NoiseParams p = toy_params();
  const auto dark = predict_counts(p, 0.0, 10.0);
  CHECK(dark.signal_total == p.dark_s * 10.0);
  CHECK(dark.idler_total == p.dark_i * 10.0);
  CHECK(dark.signal_background == dark.signal_total);
  NoiseParams none = p;
  none.pair_rate_coeff = 0.0;
  const auto acc = predict_counts(none, 30.0, 10.0);
  CHECK(acc.coincidences_total == doctest::Approx(acc.accidentals));
  CHECK(car(none, 30.0) == 0.0);
  CHECK_THROWS_AS(predict_counts(p, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(car(p, 0.0), DomainError);
  NoiseParams silent = p;
  silent.raman_s = silent.raman_i = silent.dark_s = silent.dark_i = 0.0;
  silent.pair_rate_coeff = 0.0;
  CHECK(std::isinf(car(silent, 10.0)));
}

TEST_CASE("CAR without background scales as 1/P^2") {
  NoiseParams p = toy_params();
  p.raman_s = p.raman_i = p.dark_s = p.dark_i = 0.0;
  CHECK(car(p, 10.0) / car(p, 20.0) == doctest::Approx(4.0));
  CHECK(car(p, 10.0) == doctest::Approx(p.rep_rate_hz / (p.pair_rate_coeff * 100.0)));
}

TEST_CASE("CAR two ways") {
  const NoiseParams& p = setup().noise;
  for (double P : {5.0, 30.0, 60.0}) {
    const auto r = predict_counts(p, P, 1.0);
    const double from_record = (r.coincidences_total - r.coincidences_background) / r.accidentals;
    CHECK(std::abs(from_record / car(p, P) - 1.0) < 1e-9);
  }
}

TEST_CASE("Poisson sampling is seeded and unbiased") {
  const NoiseParams p = toy_params();
  const auto a = predict_counts(p, 10.0, 1.0, SamplingMode::poisson, 42);
  const auto b = predict_counts(p, 10.0, 1.0, SamplingMode::poisson, 42);
  CHECK(a.coincidences_total == b.coincidences_total);
  CHECK(a.signal_total == b.signal_total);
  CHECK(a.signal_total == std::floor(a.signal_total));
  const auto c = predict_counts(p, 10.0, 1.0, SamplingMode::poisson, 43);
  CHECK(a.signal_total != c.signal_total);

  const auto expect = predict_counts(p, 10.0, 1.0);
  double sum = 0.0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    sum += predict_counts(p, 10.0, 1.0, SamplingMode::poisson, 1000 + k).coincidences_total;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - expect.coincidences_total) < 3.0 * std::sqrt(expect.coincidences_total / n));
}

TEST_CASE("fit recovers synthetic parameters") {
  const NoiseParams truth = toy_params();
  std::vector<FitTarget> targets;
  for (double P : {10.0, 30.0, 50.0}) {
    targets.push_back({P, Observable::car, car(truth, P)});
    targets.push_back({P, Observable::singles_s, expected_rates(truth, P).singles_s});
    targets.push_back({P, Observable::singles_i, expected_rates(truth, P).singles_i});
  }
  targets.push_back({20.0, Observable::coincidence_rate,
                     expected_rates(truth, 20.0).true_coincidences});
  NoiseParams start = truth;
  start.pair_rate_coeff = 20.0;
  start.raman_s = 500.0;
  start.raman_i = 800.0;
  start.eta_s = 0.5;
  start.eta_i = 0.1;
  const std::vector<FitParameter> free{FitParameter::pair_rate_coeff, FitParameter::raman_s,
                                       FitParameter::raman_i, FitParameter::eta_s,
                                       FitParameter::eta_i};
  const auto fit = fit_params(targets, start, free);
  CHECK(fit.params.pair_rate_coeff == doctest::Approx(truth.pair_rate_coeff).epsilon(0.01));
  CHECK(fit.params.raman_s == doctest::Approx(truth.raman_s).epsilon(0.01));
  CHECK(fit.params.raman_i == doctest::Approx(truth.raman_i).epsilon(0.01));
  CHECK(fit.params.eta_s == doctest::Approx(truth.eta_s).epsilon(0.01));
  CHECK(fit.params.eta_i == doctest::Approx(truth.eta_i).epsilon(0.01));
}

TEST_CASE("fit against the measured source numbers") {
  const std::vector<FitTarget> targets{
      {50.0, Observable::car, 110.0},
      {10.0, Observable::car, 260.0},
      {33.0, Observable::pair_rate, 45000.0},
      {30.0, Observable::coincidence_rate, 53201.0 / 30.0},
      {30.0, Observable::singles_s, 488350.0 / 30.0},
      {30.0, Observable::singles_i, 1657630.0 / 30.0},
  };
  NoiseParams start = toy_params();
  start.pair_rate_coeff = 10.0;
  const std::vector<FitParameter> free{FitParameter::pair_rate_coeff, FitParameter::raman_s,
                                       FitParameter::raman_i, FitParameter::eta_s,
                                       FitParameter::eta_i};
  const auto fit = fit_params(targets, start, free);
  for (double r : fit.relative_residuals) CHECK(std::abs(r) < 0.1);
  // The shipped config pins these values.
  const NoiseParams& pinned = setup().noise;
  CHECK(fit.params.pair_rate_coeff == doctest::Approx(pinned.pair_rate_coeff).epsilon(0.005));
  CHECK(fit.params.raman_s == doctest::Approx(pinned.raman_s).epsilon(0.005));
  CHECK(fit.params.raman_i == doctest::Approx(pinned.raman_i).epsilon(0.005));
  CHECK(fit.params.eta_s == doctest::Approx(pinned.eta_s).epsilon(0.005));
  CHECK(fit.params.eta_i == doctest::Approx(pinned.eta_i).epsilon(0.005));
  // Expected coincidences at 30 mW over 30 s.
  const auto rec = predict_counts(fit.params, 30.0, 30.0);
  CHECK(std::abs((rec.coincidences_total - rec.coincidences_background) / 53201.0 - 1.0) < 0.2);
}

TEST_CASE("fit input errors") {
  const std::vector<FitTarget> one{{50.0, Observable::car, 110.0}};
  const std::vector<FitParameter> two{FitParameter::pair_rate_coeff, FitParameter::raman_s};
  CHECK_THROWS_AS(fit_params(one, toy_params(), two), DomainError);
  const std::vector<FitTarget> vis{{30.0, Observable::v_diag, 0.9}};
  const std::vector<FitParameter> k{FitParameter::spm_broadening};
  NoiseParams p = toy_params();
  p.spm_broadening = 0.1;
  CHECK_THROWS_AS(fit_params(vis, p, k), DomainError);  // needs a source model
  CHECK(parse_fit_parameter("eta_s") == FitParameter::eta_s);
  CHECK(parse_observable("v_diag_peak_power") == Observable::v_diag_peak_power);
  CHECK_THROWS_AS(parse_observable("nope"), DomainError);
}

TEST_CASE("CAR decreases with power for fitted parameters") {
  const NoiseParams& p = setup().noise;
  CHECK(car(p, 50.0) == doctest::Approx(110.0).epsilon(0.1));
  CHECK(car(p, 10.0) == doctest::Approx(260.0).epsilon(0.1));
  double prev = car(p, 5.0);
  for (double P = 6.0; P <= 60.0; P += 1.0) {
    const double c = car(p, P);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("no noise and no broadening: flat diagonal visibility") {
  NoiseParams p;
  p.pair_rate_coeff = 40.0;
  p.eta_s = p.eta_i = 0.2;
  // Pair-driven accidentals vanish when pulse slots are effectively infinite.
  p.rep_rate_hz = 1e20;
  p.window_s = 1e-21;
  const SourceModel src = setup().source_model();
  const std::vector<double> powers{5.0, 20.0, 60.0};
  const auto pts = visibility_vs_power(p, src, powers);
  CHECK(pts[0].v_diag == doctest::Approx(pts[1].v_diag).epsilon(1e-12));
  CHECK(pts[0].v_diag == doctest::Approx(pts[2].v_diag).epsilon(1e-12));
  CHECK(pts[2].noise_weight < 1e-12);
}

TEST_CASE("visibility falls with white-noise admixture") {
  NoiseParams p = setup().noise;
  const SourceModel src = setup().source_model();
  double prev = 2.0;
  for (double zeta : {0.0, 2.0, 5.0, 20.0, 100.0}) {
    p.raman_coincidence = zeta;
    VisibilityPoint pt;
    modeled_state(p, src, 30.0, &pt);
    CHECK(pt.v_rect <= prev);
    prev = pt.v_rect;
  }
}

TEST_CASE("visibility versus power for the fitted source") {
  const NoiseParams& p = setup().noise;
  const SourceModel src = setup().source_model();
  std::vector<double> powers;
  for (double P = 2.0; P <= 80.0; P += 2.0) powers.push_back(P);
  const auto pts = visibility_vs_power(p, src, powers);
  for (const auto& pt : pts) CHECK(pt.v_rect >= pt.v_diag);
  const auto best = diagonal_visibility_optimum(p, src);
  CHECK(best.power_mW > 5.0);
  CHECK(best.power_mW < 60.0);
  CHECK(best.v_diag > pts.front().v_diag);
  CHECK(best.v_diag > pts.back().v_diag);
  CHECK(std::abs(best.fidelity_psi_minus - 0.922) <= 0.03);
}

TEST_CASE("broadening and coincidence noise reproduce the pinned values") {
  const SourceModel src = setup().source_model();
  const std::vector<FitTarget> targets{{0.0, Observable::v_diag_peak_power, 30.0},
                                       {0.0, Observable::fidelity_at_peak, 0.922}};
  const std::vector<FitParameter> free{FitParameter::spm_broadening,
                                       FitParameter::raman_coincidence};
  NoiseParams start = setup().noise;
  start.spm_broadening = 0.2;
  start.raman_coincidence = 3.0;
  const auto fit = fit_params(targets, start, free, &src);
  for (double r : fit.relative_residuals) CHECK(std::abs(r) < 1e-3);
  CHECK(fit.params.spm_broadening ==
        doctest::Approx(setup().noise.spm_broadening).epsilon(0.01));
  CHECK(fit.params.raman_coincidence ==
        doctest::Approx(setup().noise.raman_coincidence).epsilon(0.01));
}

TEST_CASE("power sweep CSV and determinism") {
  const NoiseParams& p = setup().noise;
  const SourceModel src = setup().source_model();
  const std::vector<double> powers{10.0, 30.0};
  auto render = [&](std::uint64_t seed) {
    std::ostringstream os;
    write_power_sweep_csv(os, power_sweep(p, src, powers, 30.0, SamplingMode::poisson, seed));
    return os.str();
  };
  CHECK(render(5) == render(5));
  CHECK(render(5) != render(6));
  CHECK(render(5).rfind("power_mW,singles_s,singles_i,coincidences,accidentals,car,v_rect,v_diag\n",
                        0) == 0);
}

}  // TEST_SUITE
