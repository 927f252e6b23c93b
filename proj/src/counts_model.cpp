#include "xsplice/counts_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "xsplice/errors.hpp"

namespace xsplice {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double draw(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

}  // namespace

void CountRecord::validate() const {
  for (double v : {duration_s, signal_total, signal_background, idler_total, idler_background,
                   coincidences_total, coincidences_background, accidentals}) {
    if (!(v >= 0.0)) throw DomainError("count record entries must be >= 0");
  }
  if (signal_background > signal_total || idler_background > idler_total ||
      coincidences_background > coincidences_total) {
    throw DomainError("count record background exceeds total");
  }
}

void NoiseParams::validate() const {
  for (double v : {pair_rate_coeff, raman_s, raman_i, dark_s, dark_i, eta_s, eta_i,
                   rep_rate_hz, window_s, spm_broadening, raman_coincidence}) {
    if (!(v >= 0.0)) throw DomainError("noise parameters must be >= 0");
  }
  if (eta_s > 1.0 || eta_i > 1.0) throw DomainError("efficiencies must be <= 1");
  if (window_s * rep_rate_hz > 1.0) {
    throw DomainError("coincidence window exceeds the pulse period");
  }
}

HeraldingEfficiencies heralding_efficiencies(const CountRecord& record) {
  record.validate();
  const double coincidences = record.coincidences_total - record.coincidences_background;
  const double signal = record.signal_total - record.signal_background;
  const double idler = record.idler_total - record.idler_background;
  if (!(signal > 0.0) || !(idler > 0.0)) {
    throw DomainError("heralding efficiency undefined: no background-subtracted singles");
  }
  return {coincidences / idler, coincidences / signal};
}

double splice_transmission_bound(const CountRecord& first_fiber_pairs,
                                 const CountRecord& second_fiber_pairs, Arm arm) {
  const auto first = heralding_efficiencies(first_fiber_pairs);
  const auto second = heralding_efficiencies(second_fiber_pairs);
  const double num = arm == Arm::signal ? first.signal : first.idler;
  const double den = arm == Arm::signal ? second.signal : second.idler;
  if (!(den > 0.0)) throw DomainError("splice bound undefined: zero reference efficiency");
  return std::clamp(num / den, 0.0, 1.0);
}

ExpectedRates expected_rates(const NoiseParams& params, double power_mW) {
  params.validate();
  if (!(power_mW >= 0.0)) throw DomainError("pump power must be >= 0");
  ExpectedRates r;
  r.pair_rate = params.pair_rate_coeff * power_mW * power_mW;
  r.background_s = params.raman_s * power_mW + params.dark_s;
  r.background_i = params.raman_i * power_mW + params.dark_i;
  r.singles_s = params.eta_s * r.pair_rate + r.background_s;
  r.singles_i = params.eta_i * r.pair_rate + r.background_i;
  r.true_coincidences = params.eta_s * params.eta_i * r.pair_rate;
  // One pulse slot per window: uncorrelated clicks coincide with probability
  // (S_s / R)(S_i / R) per pulse.
  r.accidentals = r.singles_s * r.singles_i / params.rep_rate_hz;
  r.raman_coincidences = params.raman_coincidence * power_mW;
  return r;
}

CountRecord predict_counts(const NoiseParams& params, double power_mW, double duration_s,
                           SamplingMode mode, std::uint64_t seed) {
  if (!(duration_s >= 0.0)) throw DomainError("duration must be >= 0");
  const ExpectedRates r = expected_rates(params, power_mW);
  const double t = duration_s;

  double pair_s = params.eta_s * r.pair_rate * t;
  double pair_i = params.eta_i * r.pair_rate * t;
  double bg_s = r.background_s * t;
  double bg_i = r.background_i * t;
  double coinc_true = r.true_coincidences * t;
  double acc = r.accidentals * t;
  double raman_c = r.raman_coincidences * t;

  if (mode == SamplingMode::poisson) {
    std::mt19937_64 rng(splitmix64(seed));
    pair_s = draw(rng, pair_s);
    bg_s = draw(rng, bg_s);
    pair_i = draw(rng, pair_i);
    bg_i = draw(rng, bg_i);
    coinc_true = draw(rng, coinc_true);
    acc = draw(rng, acc);
    raman_c = draw(rng, raman_c);
  }

  CountRecord rec;
  rec.duration_s = duration_s;
  rec.signal_total = pair_s + bg_s;
  rec.signal_background = bg_s;
  rec.idler_total = pair_i + bg_i;
  rec.idler_background = bg_i;
  rec.coincidences_total = coinc_true + acc + raman_c;
  rec.coincidences_background = acc + raman_c;
  rec.accidentals = acc;
  return rec;
}

double car(const NoiseParams& params, double power_mW) {
  if (!(power_mW > 0.0)) throw DomainError("CAR needs a positive pump power");
  const ExpectedRates r = expected_rates(params, power_mW);
  if (r.accidentals == 0.0) return std::numeric_limits<double>::infinity();
  return r.true_coincidences / r.accidentals;
}

// --- state-level model ----------------------------------------------------

TwoQubitState modeled_state(const NoiseParams& params, const SourceModel& source,
                            double power_mW, VisibilityPoint* summary) {
  const ExpectedRates r = expected_rates(params, power_mW);
  GaussianSpectrum pump = source.pump;
  pump.fwhm_nm *= 1.0 + params.spm_broadening * power_mW;

  const PhaseFunction phase =
      make_phase_function(source.fiber, source.compensators, 0.0, source.signal.center_nm,
                          source.pump.center_nm, source.state_phase_rad);
  const TwoQubitState spectral =
      mixed_state_over_spectra(phase, source.signal, pump, source.mixture);

  const double noise = r.accidentals + r.raman_coincidences;
  const double total = r.true_coincidences + noise;
  const double w = total > 0.0 ? noise / total : 0.0;
  const TwoQubitState rho(
      (1.0 - w) * spectral.matrix() + w / 4.0 * Matrix4c::Identity());

  if (summary) {
    summary->power_mW = power_mW;
    summary->pump_fwhm_nm = pump.fwhm_nm;
    summary->noise_weight = w;
    summary->v_rect = visibility(rho, AnalyzerBasis::rectilinear);
    summary->v_diag = visibility(rho, AnalyzerBasis::diagonal);
    summary->fidelity_psi_minus =
        fidelity(relabel_signal_flip(rho), bell_vector(BellState::psi_minus));
  }
  return rho;
}

std::vector<VisibilityPoint> visibility_vs_power(const NoiseParams& params,
                                                 const SourceModel& source,
                                                 std::span<const double> powers_mW) {
  std::vector<VisibilityPoint> out;
  out.reserve(powers_mW.size());
  for (double p : powers_mW) {
    VisibilityPoint pt;
    modeled_state(params, source, p, &pt);
    out.push_back(pt);
  }
  return out;
}

VisibilityPoint diagonal_visibility_optimum(const NoiseParams& params,
                                            const SourceModel& source, double lo_mW,
                                            double hi_mW) {
  if (!(lo_mW > 0.0) || !(hi_mW > lo_mW)) throw DomainError("invalid power search range");
  auto v_diag = [&](double p) {
    VisibilityPoint pt;
    modeled_state(params, source, p, &pt);
    return pt.v_diag;
  };
  // Coarse geometric scan, then Brent inside the neighbouring cells.
  constexpr int kScan = 25;
  std::array<double, kScan> grid{};
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kScan; ++k) {
    grid[k] = lo_mW * std::pow(hi_mW / lo_mW, k / static_cast<double>(kScan - 1));
    const double v = v_diag(grid[k]);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  const double a = grid[std::max(best - 1, 0)];
  const double b = grid[std::min(best + 1, kScan - 1)];
  const auto found = boost::math::tools::brent_find_minima(
      [&](double p) { return -v_diag(p); }, a, b, 40);
  const double p_opt = -found.second > best_v ? found.first : grid[best];
  VisibilityPoint pt;
  modeled_state(params, source, p_opt, &pt);
  return pt;
}

// --- fitting ----------------------------------------------------------------

std::string to_string(Observable o) {
  switch (o) {
    case Observable::car: return "car";
    case Observable::pair_rate: return "pair_rate";
    case Observable::coincidence_rate: return "coincidence_rate";
    case Observable::singles_s: return "singles_s";
    case Observable::singles_i: return "singles_i";
    case Observable::background_s: return "background_s";
    case Observable::background_i: return "background_i";
    case Observable::v_rect: return "v_rect";
    case Observable::v_diag: return "v_diag";
    case Observable::fidelity: return "fidelity";
    case Observable::v_diag_peak_power: return "v_diag_peak_power";
    case Observable::fidelity_at_peak: return "fidelity_at_peak";
  }
  return "?";
}

std::string to_string(FitParameter p) {
  switch (p) {
    case FitParameter::pair_rate_coeff: return "pair_rate_coeff";
    case FitParameter::raman_s: return "raman_s";
    case FitParameter::raman_i: return "raman_i";
    case FitParameter::dark_s: return "dark_s";
    case FitParameter::dark_i: return "dark_i";
    case FitParameter::eta_s: return "eta_s";
    case FitParameter::eta_i: return "eta_i";
    case FitParameter::spm_broadening: return "spm_broadening";
    case FitParameter::raman_coincidence: return "raman_coincidence";
  }
  return "?";
}

Observable parse_observable(const std::string& text) {
  for (int k = 0; k <= static_cast<int>(Observable::fidelity_at_peak); ++k) {
    if (to_string(static_cast<Observable>(k)) == text) return static_cast<Observable>(k);
  }
  throw DomainError("unknown observable '" + text + "'");
}

FitParameter parse_fit_parameter(const std::string& text) {
  for (int k = 0; k <= static_cast<int>(FitParameter::raman_coincidence); ++k) {
    if (to_string(static_cast<FitParameter>(k)) == text) return static_cast<FitParameter>(k);
  }
  throw DomainError("unknown fit parameter '" + text + "'");
}

namespace {

double& slot(NoiseParams& p, FitParameter which) {
  switch (which) {
    case FitParameter::pair_rate_coeff: return p.pair_rate_coeff;
    case FitParameter::raman_s: return p.raman_s;
    case FitParameter::raman_i: return p.raman_i;
    case FitParameter::dark_s: return p.dark_s;
    case FitParameter::dark_i: return p.dark_i;
    case FitParameter::eta_s: return p.eta_s;
    case FitParameter::eta_i: return p.eta_i;
    case FitParameter::spm_broadening: return p.spm_broadening;
    case FitParameter::raman_coincidence: return p.raman_coincidence;
  }
  throw DomainError("unknown fit parameter");
}

bool is_efficiency(FitParameter p) {
  return p == FitParameter::eta_s || p == FitParameter::eta_i;
}

double to_free(FitParameter p, double v) {
  return is_efficiency(p) ? std::log(v / (1.0 - v)) : std::log(v);
}

double from_free(FitParameter p, double x) {
  return is_efficiency(p) ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x);
}

bool needs_source(Observable o) {
  return o == Observable::v_rect || o == Observable::v_diag || o == Observable::fidelity ||
         o == Observable::v_diag_peak_power || o == Observable::fidelity_at_peak;
}

double evaluate(const NoiseParams& params, const FitTarget& target, const SourceModel* source,
                std::optional<VisibilityPoint>& peak_cache) {
  if (needs_source(target.observable) && !source) {
    throw DomainError("observable '" + to_string(target.observable) +
                      "' needs a source model");
  }
  switch (target.observable) {
    case Observable::car: return car(params, target.power_mW);
    case Observable::v_rect:
    case Observable::v_diag:
    case Observable::fidelity: {
      VisibilityPoint pt;
      modeled_state(params, *source, target.power_mW, &pt);
      if (target.observable == Observable::v_rect) return pt.v_rect;
      if (target.observable == Observable::v_diag) return pt.v_diag;
      return pt.fidelity_psi_minus;
    }
    case Observable::v_diag_peak_power:
    case Observable::fidelity_at_peak:
      if (!peak_cache) peak_cache = diagonal_visibility_optimum(params, *source);
      return target.observable == Observable::v_diag_peak_power
                 ? peak_cache->power_mW
                 : peak_cache->fidelity_psi_minus;
    default: break;
  }
  const ExpectedRates r = expected_rates(params, target.power_mW);
  switch (target.observable) {
    case Observable::pair_rate: return r.pair_rate;
    case Observable::coincidence_rate: return r.true_coincidences;
    case Observable::singles_s: return r.singles_s;
    case Observable::singles_i: return r.singles_i;
    case Observable::background_s: return r.background_s;
    case Observable::background_i: return r.background_i;
    default: break;
  }
  throw DomainError("unhandled observable");
}

struct FitFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::span<const FitTarget> targets;
  NoiseParams base;
  std::span<const FitParameter> free;
  const SourceModel* source;
  mutable int evaluations = 0;

  int inputs() const { return static_cast<int>(free.size()); }
  int values() const { return static_cast<int>(targets.size()); }

  NoiseParams params_at(const Eigen::VectorXd& x) const {
    NoiseParams p = base;
    for (std::size_t k = 0; k < free.size(); ++k) {
      slot(p, free[k]) = from_free(free[k], x[static_cast<Eigen::Index>(k)]);
    }
    return p;
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    ++evaluations;
    const NoiseParams p = params_at(x);
    std::optional<VisibilityPoint> peak;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      double r = 1e3;
      try {
        const double model = evaluate(p, targets[k], source, peak);
        if (model > 0.0 && std::isfinite(model)) r = std::log(model / targets[k].value);
      } catch (const DomainError&) {
      }
      fvec[static_cast<Eigen::Index>(k)] = r;
    }
    return 0;
  }
};

}  // namespace

double evaluate_observable(const NoiseParams& params, const FitTarget& target,
                           const SourceModel* source) {
  std::optional<VisibilityPoint> peak;
  return evaluate(params, target, source, peak);
}

FitResult fit_params(std::span<const FitTarget> targets, const NoiseParams& initial,
                     std::span<const FitParameter> free, const SourceModel* source) {
  initial.validate();
  if (free.empty()) throw DomainError("no free parameters to fit");
  if (targets.size() < free.size()) {
    throw DomainError("underdetermined fit: " + std::to_string(targets.size()) +
                      " targets for " + std::to_string(free.size()) + " free parameters");
  }
  for (const auto& t : targets) {
    if (!(t.value > 0.0)) throw DomainError("fit targets must be positive");
  }
  for (std::size_t i = 0; i < free.size(); ++i) {
    for (std::size_t j = i + 1; j < free.size(); ++j) {
      if (free[i] == free[j]) throw DomainError("duplicate free parameter");
    }
  }

  NoiseParams base = initial;
  Eigen::VectorXd x(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) {
    const double v = slot(base, free[k]);
    if (!(v > 0.0) || (is_efficiency(free[k]) && !(v < 1.0))) {
      throw DomainError("free parameter '" + to_string(free[k]) +
                        "' must start strictly inside its domain");
    }
    x[static_cast<Eigen::Index>(k)] = to_free(free[k], v);
  }

  FitFunctor functor{targets, base, free, source};
  Eigen::NumericalDiff<FitFunctor, Eigen::Central> diff(functor, 1e-10);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<FitFunctor, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = 400 * static_cast<int>(free.size() + 1);
  lm.parameters.xtol = 1e-10;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(x);
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  if (status == Status::ImproperInputParameters || status == Status::TooManyFunctionEvaluation) {
    throw NumericalError("parameter fit did not converge");
  }

  FitResult result;
  result.params = functor.params_at(x);
  result.evaluations = diff.evaluations;
  std::optional<VisibilityPoint> peak;
  for (const auto& t : targets) {
    const double model = evaluate(result.params, t, source, peak);
    result.model_values.push_back(model);
    result.relative_residuals.push_back(model / t.value - 1.0);
  }
  return result;
}

// --- sweeps -------------------------------------------------------------------

std::vector<SweepRow> power_sweep(const NoiseParams& params, const SourceModel& source,
                                  std::span<const double> powers_mW, double duration_s,
                                  SamplingMode mode, std::uint64_t seed) {
  std::vector<SweepRow> rows;
  rows.reserve(powers_mW.size());
  for (std::size_t k = 0; k < powers_mW.size(); ++k) {
    const double p = powers_mW[k];
    VisibilityPoint pt;
    modeled_state(params, source, p, &pt);
    rows.push_back({p,
                    predict_counts(params, p, duration_s, mode, splitmix64(seed) ^ k),
                    p > 0.0 ? car(params, p) : 0.0, pt.v_rect, pt.v_diag});
  }
  return rows;
}

void write_power_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto old_precision = os.precision(12);
  os << "power_mW,singles_s,singles_i,coincidences,accidentals,car,v_rect,v_diag\n";
  for (const auto& r : rows) {
    os << r.power_mW << ',' << r.counts.signal_total << ',' << r.counts.idler_total << ','
       << r.counts.coincidences_total << ',' << r.counts.accidentals << ',' << r.car << ','
       << r.v_rect << ',' << r.v_diag << '\n';
  }
  os.precision(old_precision);
}

}  // namespace xsplice
