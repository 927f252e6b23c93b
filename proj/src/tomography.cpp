#include "xsplice/tomography.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "xsplice/errors.hpp"

namespace xsplice {

namespace {

using cd = std::complex<double>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kParams = 16;
constexpr int kLower[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};

Matrix4c unpack(const double* x) {
  Matrix4c t = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) t(i, i) = x[i];
  for (int k = 0; k < 6; ++k) t(kLower[k][0], kLower[k][1]) = cd(x[4 + 2 * k], x[5 + 2 * k]);
  return t;
}

void pack(const Matrix4c& t, double* x) {
  for (int i = 0; i < 4; ++i) x[i] = t(i, i).real();
  for (int k = 0; k < 6; ++k) {
    const cd v = t(kLower[k][0], kLower[k][1]);
    x[4 + 2 * k] = v.real();
    x[5 + 2 * k] = v.imag();
  }
}

Matrix4c hermitize(const Matrix4c& m) { return 0.5 * (m + m.adjoint()); }

Matrix4c normalized_density(const Matrix4c& t) {
  const Matrix4c a = t * t.adjoint();
  return hermitize(a / a.trace().real());
}

// Poisson deviance residuals: sum r_k^2 = 2 (L_sat - L), so the least-squares
// minimum is the likelihood maximum.
struct DevianceResiduals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::vector<Matrix4c> projectors;
  std::vector<double> counts;
  double n = 0.0;

  int inputs() const { return kParams; }
  int values() const { return static_cast<int>(projectors.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const Matrix4c rho = normalized_density(unpack(x.data()));
    for (std::size_t k = 0; k < projectors.size(); ++k) {
      const double mu = std::max(n * (rho * projectors[k]).trace().real(), 1e-300);
      const double c = counts[k];
      const double d = c > 0.0 ? mu - c + c * std::log(c / mu) : mu;
      const double mag = std::sqrt(2.0 * std::max(d, 0.0));
      r[static_cast<Eigen::Index>(k)] = mu >= c ? mag : -mag;
    }
    return 0;
  }
};

// Least-squares linear inversion, clipped to the nearest PSD matrix.
Matrix4c linear_inversion(const TomographyData& data) {
  // Real parametrization of a Hermitian matrix: 4 diagonal + 6 re + 6 im.
  const int m = static_cast<int>(data.settings.size());
  Eigen::MatrixXd design(m, 16);
  Eigen::VectorXd freq(m);
  for (int k = 0; k < m; ++k) {
    const Matrix4c pi = data.settings[k].projector();
    for (int i = 0; i < 4; ++i) design(k, i) = pi(i, i).real();
    for (int j = 0; j < 6; ++j) {
      const cd v = pi(kLower[j][1], kLower[j][0]);  // Tr(rho Pi) picks Pi(c, r)
      design(k, 4 + 2 * j) = 2.0 * v.real();
      design(k, 5 + 2 * j) = -2.0 * v.imag();
    }
    freq[k] = data.counts[k] / data.total_per_setting;
  }
  const Eigen::VectorXd h = design.colPivHouseholderQr().solve(freq);
  Matrix4c rho = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) rho(i, i) = h[i];
  for (int j = 0; j < 6; ++j) {
    const cd v(h[4 + 2 * j], h[5 + 2 * j]);
    rho(kLower[j][0], kLower[j][1]) = v;
    rho(kLower[j][1], kLower[j][0]) = std::conj(v);
  }
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(1e-6);
  Matrix4c clipped = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  return hermitize(clipped / clipped.trace().real());
}

Matrix4c cholesky_start(const Matrix4c& rho) {
  Eigen::LLT<Matrix4c> llt(hermitize(rho) + 1e-9 * Matrix4c::Identity());
  if (llt.info() != Eigen::Success) return 0.5 * Matrix4c::Identity();
  return llt.matrixL();
}

struct Run {
  Matrix4c rho;
  double cost;
  int iterations;
  bool converged;
};

Run minimize(const TomographyData& data, const Matrix4c& t0, int max_iterations) {
  DevianceResiduals f;
  for (const auto& s : data.settings) f.projectors.push_back(s.projector());
  f.counts = data.counts;
  f.n = data.total_per_setting;
  Eigen::VectorXd x(kParams);
  pack(t0, x.data());
  Eigen::NumericalDiff<DevianceResiduals, Eigen::Central> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<DevianceResiduals, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = max_iterations;
  lm.parameters.xtol = 1e-15;
  lm.parameters.ftol = 1e-15;
  const auto status = lm.minimize(x);
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  Eigen::VectorXd r(f.values());
  f(x, r);
  return {normalized_density(unpack(x.data())), 0.5 * r.squaredNorm(),
          static_cast<int>(lm.iter),
          status != Status::TooManyFunctionEvaluation && status != Status::ImproperInputParameters};
}

}  // namespace

void MeasurementSetting::validate() const {
  if (std::abs(signal.norm() - 1.0) > 1e-12 || std::abs(idler.norm() - 1.0) > 1e-12) {
    throw DomainError("measurement setting '" + label + "' is not normalized");
  }
}

Matrix4c MeasurementSetting::projector() const {
  Vector4c v;
  v << signal[0] * idler[0], signal[0] * idler[1], signal[1] * idler[0], signal[1] * idler[1];
  return v * v.adjoint();
}

Eigen::Vector2cd polarization_state(char letter) {
  const double r = std::numbers::sqrt2 / 2.0;
  switch (letter) {
    case 'H': return {1.0, 0.0};
    case 'V': return {0.0, 1.0};
    case 'D': return {r, r};
    case 'A': return {r, -r};
    case 'R': return {cd(r, 0.0), cd(0.0, -r)};
    case 'L': return {cd(r, 0.0), cd(0.0, r)};
    default: break;
  }
  throw DomainError(std::string("unknown polarization '") + letter + "'");
}

MeasurementSetting setting_from_label(const std::string& label) {
  if (label.size() != 2) throw DomainError("setting label must have two letters: '" + label + "'");
  return {polarization_state(label[0]), polarization_state(label[1]), label};
}

std::vector<MeasurementSetting> standard_settings() {
  static constexpr char kLetters[] = {'H', 'V', 'D', 'A', 'R', 'L'};
  std::vector<MeasurementSetting> out;
  out.reserve(36);
  for (char a : kLetters) {
    for (char b : kLetters) out.push_back(setting_from_label(std::string{a, b}));
  }
  return out;
}

void TomographyData::validate() const {
  if (settings.size() != counts.size()) throw DomainError("settings and counts differ in length");
  if (settings.empty()) throw DomainError("no tomography settings");
  for (const auto& s : settings) s.validate();
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("counts must be finite and >= 0");
  }
  if (!(total_per_setting > 0.0)) throw DomainError("total_per_setting must be > 0");
}

std::vector<double> born_probabilities(const TwoQubitState& rho,
                                       const std::vector<MeasurementSetting>& settings) {
  std::vector<double> p;
  p.reserve(settings.size());
  for (const auto& s : settings) {
    p.push_back(std::max((rho.matrix() * s.projector()).trace().real(), 0.0));
  }
  return p;
}

TomographyData expected_counts(const TwoQubitState& rho,
                               const std::vector<MeasurementSetting>& settings,
                               double n_per_setting) {
  TomographyData data{settings, born_probabilities(rho, settings), n_per_setting};
  for (double& c : data.counts) c *= n_per_setting;
  data.validate();
  return data;
}

TomographyData simulate_counts(const TwoQubitState& rho,
                               const std::vector<MeasurementSetting>& settings,
                               double n_per_setting, std::uint64_t seed) {
  TomographyData data = expected_counts(rho, settings, n_per_setting);
  std::mt19937_64 rng(splitmix64(seed));
  for (double& c : data.counts) {
    if (c > 0.0) {
      std::poisson_distribution<long long> dist(c);
      c = static_cast<double>(dist(rng));
    }
  }
  return data;
}

int measurement_rank(const std::vector<MeasurementSetting>& settings) {
  Eigen::MatrixXcd map(static_cast<Eigen::Index>(settings.size()), 16);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const Matrix4c pi = settings[k].projector();
    for (int i = 0; i < 16; ++i) map(static_cast<Eigen::Index>(k), i) = pi(i % 4, i / 4);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(map);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

double log_likelihood(const TwoQubitState& rho, const TomographyData& data) {
  data.validate();
  const auto p = born_probabilities(rho, data.settings);
  double ll = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double mu = data.total_per_setting * p[k];
    const double n = data.counts[k];
    if (n > 0.0) {
      if (mu <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += n * std::log(mu);
    }
    ll -= mu + std::lgamma(n + 1.0);
  }
  return ll;
}

MleResult reconstruct_mle(const TomographyData& data, const MleOptions& options) {
  data.validate();
  const int rank = measurement_rank(data.settings);
  if (rank < 16) {
    throw DomainError("settings are informationally incomplete (rank " + std::to_string(rank) +
                      " of 16)");
  }

  std::vector<Matrix4c> starts;
  starts.push_back(cholesky_start(linear_inversion(data)));
  starts.push_back(0.5 * Matrix4c::Identity());
  std::mt19937_64 rng(splitmix64(options.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < options.random_starts; ++r) {
    Matrix4c t = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) {
      t(i, i) = std::abs(normal(rng)) + 0.1;
      for (int j = 0; j < i; ++j) t(i, j) = cd(normal(rng), normal(rng));
    }
    starts.push_back(t);
  }

  MleResult best;
  double best_cost = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (const auto& t0 : starts) {
    Run run = minimize(data, t0, options.max_iterations);
    // Restart from where it stopped; the fit can stall near the PSD boundary.
    if (!run.converged) {
      Run again = minimize(data, cholesky_start(run.rho), options.max_iterations);
      if (again.cost <= run.cost) run = again;
    }
    total_iterations += run.iterations;
    if (run.cost < best_cost) {
      best_cost = run.cost;
      best.state = TwoQubitState(run.rho);
      best.converged = run.converged;
    }
  }
  best.iterations = total_iterations;
  best.log_likelihood = log_likelihood(best.state, data);
  return best;
}

ErrorBars error_bars(const TomographyData& data, int n_bootstrap, std::uint64_t seed) {
  if (n_bootstrap < 1) throw DomainError("need at least one bootstrap round");
  MleOptions fast;
  fast.random_starts = 0;
  const MleResult fit = reconstruct_mle(data, fast);

  std::vector<double> fids;
  std::vector<double> tangles;
  for (int r = 0; r < n_bootstrap; ++r) {
    const std::uint64_t round_seed = splitmix64(seed ^ (0x632be59bd9b4e019ULL * (r + 1)));
    const TomographyData resampled =
        simulate_counts(fit.state, data.settings, data.total_per_setting, round_seed);
    const MleResult again = reconstruct_mle(resampled, fast);
    fids.push_back(best_bell_fidelity(again.state).fidelity);
    tangles.push_back(tangle(again.state));
  }

  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return std::pair{m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };
  ErrorBars out;
  std::tie(out.fidelity_mean, out.fidelity_std) = mean_std(fids);
  std::tie(out.tangle_mean, out.tangle_std) = mean_std(tangles);
  out.rounds = n_bootstrap;
  out.degenerate = n_bootstrap == 1;
  return out;
}

void write_tomography_csv(std::ostream& os, const TomographyData& data) {
  data.validate();
  const auto old_precision = os.precision(17);
  os << "setting_label,count\n";
  for (std::size_t k = 0; k < data.settings.size(); ++k) {
    os << data.settings[k].label << ',' << data.counts[k] << '\n';
  }
  os.precision(old_precision);
}

TomographyData read_tomography_csv(std::istream& is, double total_per_setting) {
  TomographyData data;
  data.total_per_setting = total_per_setting;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("setting_label", 0) == 0)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError("line " + std::to_string(line_no) + ": expected 'label,count'");
    }
    data.settings.push_back(setting_from_label(line.substr(0, comma)));
    try {
      data.counts.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("line " + std::to_string(line_no) + ": bad count");
    }
  }
  data.validate();
  return data;
}

}  // namespace xsplice
