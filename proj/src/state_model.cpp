#include "xsplice/state_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "xsplice/errors.hpp"

namespace xsplice {

namespace {

using cd = std::complex<double>;

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

template <unsigned N>
Rule gauss_legendre() {
  static_assert(N % 2 == 0);
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  for (std::size_t k = 0; k < x.size(); ++k) {
    r.nodes.push_back(-x[k]);
    r.weights.push_back(w[k]);
    r.nodes.push_back(x[k]);
    r.weights.push_back(w[k]);
  }
  return r;
}

const Rule& rule_for(int nodes) {
  static const Rule r16 = gauss_legendre<16>();
  static const Rule r32 = gauss_legendre<32>();
  static const Rule r64 = gauss_legendre<64>();
  static const Rule r128 = gauss_legendre<128>();
  static const Rule r256 = gauss_legendre<256>();
  switch (nodes) {
    case 16: return r16;
    case 32: return r32;
    case 64: return r64;
    case 128: return r128;
    case 256: return r256;
    default: break;
  }
  throw DomainError("unsupported quadrature node count " + std::to_string(nodes) +
                    " (use 16, 32, 64, 128 or 256)");
}

void check_state(const Matrix4c& m) {
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw DomainError("density matrix is not Hermitian");
  const cd tr = m.trace();
  if (std::abs(tr.real() - 1.0) > 1e-12 || std::abs(tr.imag()) > 1e-12) {
    throw DomainError("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failure");
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw DomainError("density matrix is not positive semidefinite");
  }
}

Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failure");
  Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

std::complex<double> coherence_integral(const PhaseFunction& phase,
                                        const GaussianSpectrum& signal,
                                        const GaussianSpectrum& pump, int nodes,
                                        double n_sigma) {
  const Rule& rule = rule_for(nodes);
  const double hs = n_sigma * signal.sigma_nm();
  const double hp = n_sigma * pump.sigma_nm();
  std::vector<double> s(rule.nodes.size()), ws(rule.nodes.size());
  std::vector<double> p(rule.nodes.size()), wp(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    s[k] = signal.center_nm + hs * rule.nodes[k];
    ws[k] = rule.weights[k] * hs * signal.density(s[k]);
    p[k] = pump.center_nm + hp * rule.nodes[k];
    wp[k] = rule.weights[k] * hp * pump.density(p[k]);
  }
  cd sum = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cd row = 0.0;
    double row_mass = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      row += wp[j] * std::polar(1.0, -phase(s[i], p[j]));
      row_mass += wp[j];
    }
    sum += ws[i] * row;
    mass += ws[i] * row_mass;
  }
  // Normalizing by the quadrature mass keeps the truncated window a proper
  // average, so a constant phase yields a pure state.
  return 0.5 * sum / mass;
}

}  // namespace

TwoQubitState::TwoQubitState(const Matrix4c& matrix) : rho_(matrix) { check_state(rho_); }

TwoQubitState TwoQubitState::maximally_mixed() {
  return TwoQubitState(Matrix4c::Identity() / 4.0);
}

TwoQubitState TwoQubitState::from_pure(const Vector4c& psi) {
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-9) throw DomainError("state vector is not normalized");
  Matrix4c rho = psi * psi.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return TwoQubitState(rho);
}

Vector4c bell_vector(BellState which) {
  const double r = 1.0 / std::numbers::sqrt2;
  Vector4c v = Vector4c::Zero();
  switch (which) {
    case BellState::phi_plus: v << r, 0, 0, r; break;
    case BellState::phi_minus: v << r, 0, 0, -r; break;
    case BellState::psi_plus: v << 0, r, r, 0; break;
    case BellState::psi_minus: v << 0, r, -r, 0; break;
  }
  return v;
}

std::string to_string(BellState which) {
  switch (which) {
    case BellState::phi_plus: return "phi_plus";
    case BellState::phi_minus: return "phi_minus";
    case BellState::psi_plus: return "psi_plus";
    case BellState::psi_minus: return "psi_minus";
  }
  return "?";
}

BellState parse_bell_state(const std::string& text) {
  for (auto b : {BellState::phi_plus, BellState::phi_minus, BellState::psi_plus,
                 BellState::psi_minus}) {
    if (to_string(b) == text) return b;
  }
  throw DomainError("unknown Bell state '" + text + "'");
}

TwoQubitState werner_state(double p, BellState which) {
  if (!(p >= -1.0 / 3.0) || !(p <= 1.0)) throw DomainError("Werner weight out of range");
  const Vector4c v = bell_vector(which);
  Matrix4c rho = p * (v * v.adjoint()) + (1.0 - p) / 4.0 * Matrix4c::Identity();
  return TwoQubitState(rho);
}

TwoQubitState pure_phi_state(double phi) {
  const double r = 1.0 / std::numbers::sqrt2;
  Vector4c v;
  v << r, 0, 0, r * std::polar(1.0, phi);
  return TwoQubitState::from_pure(v);
}

bool supported_quadrature_nodes(int nodes) {
  return nodes == 16 || nodes == 32 || nodes == 64 || nodes == 128 || nodes == 256;
}

TwoQubitState mixed_state_over_spectra(const PhaseFunction& phase,
                                       const GaussianSpectrum& signal,
                                       const GaussianSpectrum& pump,
                                       const MixtureOptions& options,
                                       MixtureDiagnostics* diagnostics) {
  signal.validate();
  pump.validate();
  if (!(options.n_sigma > 0.0)) throw DomainError("integration half-width must be > 0");
  const cd c = coherence_integral(phase, signal, pump, options.nodes, options.n_sigma);

  MixtureDiagnostics diag;
  diag.coherence = c;
  if (options.check_convergence && supported_quadrature_nodes(2 * options.nodes)) {
    const cd c2 = coherence_integral(phase, signal, pump, 2 * options.nodes, options.n_sigma);
    diag.convergence_delta = std::abs(std::abs(c2) - std::abs(c));
    diag.converged = diag.convergence_delta <= options.convergence_tolerance;
  }
  if (diagnostics) *diagnostics = diag;

  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 3) = c;
  rho(3, 0) = std::conj(c);
  return TwoQubitState(rho);
}

double fidelity(const TwoQubitState& rho, const Vector4c& target) {
  if (std::abs(target.norm() - 1.0) > 1e-9) {
    throw DomainError("fidelity target is not normalized");
  }
  return (target.adjoint() * rho.matrix() * target)(0, 0).real();
}

BellFidelity best_bell_fidelity(const TwoQubitState& rho) {
  BellFidelity best{BellState::phi_plus, -1.0};
  for (auto b : {BellState::phi_plus, BellState::phi_minus, BellState::psi_plus,
                 BellState::psi_minus}) {
    const double f = fidelity(rho, bell_vector(b));
    if (f > best.fidelity) best = {b, f};
  }
  return best;
}

double state_fidelity(const TwoQubitState& rho, const TwoQubitState& sigma) {
  const Matrix4c root = psd_sqrt(rho.matrix());
  Matrix4c inner = root * sigma.matrix() * root;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(inner, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failure");
  const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(tr * tr, 1.0);
}

double concurrence(const TwoQubitState& rho) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c& m = rho.matrix();
  const Matrix4c flipped = yy * m.conjugate() * yy;
  const Matrix4c root = psd_sqrt(m);
  Matrix4c r = root * flipped * root;
  r = 0.5 * (r + r.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(r, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failure");
  Eigen::Vector4d ev = es.eigenvalues();
  // Eigenvalues at rounding level are zeros; their square roots would
  // otherwise leak ~1e-8 into the concurrence.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::array<double, 4> mu{};
  for (int k = 0; k < 4; ++k) mu[k] = ev[k] > floor ? std::sqrt(ev[k]) : 0.0;
  std::sort(mu.begin(), mu.end(), std::greater<>());
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

double visibility(const TwoQubitState& rho, AnalyzerBasis basis) {
  const double r = 1.0 / std::numbers::sqrt2;
  Eigen::Vector2cd first, second;
  if (basis == AnalyzerBasis::rectilinear) {
    first << 1, 0;
    second << 0, 1;
  } else {
    first << r, r;
    second << r, -r;
  }
  auto prob = [&](const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
    Vector4c v;
    v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return (v.adjoint() * rho.matrix() * v)(0, 0).real();
  };
  const double c1 = prob(first, first);
  const double c2 = prob(first, second);
  const double hi = std::max(c1, c2);
  const double lo = std::min(c1, c2);
  if (!(hi + lo > 0.0)) throw DomainError("undefined visibility: no coincidences");
  return (hi - lo) / (hi + lo);
}

TwoQubitState relabel_signal_flip(const TwoQubitState& rho) {
  Eigen::Matrix4d perm = Eigen::Matrix4d::Zero();
  perm(0, 2) = perm(2, 0) = perm(1, 3) = perm(3, 1) = 1.0;
  const Matrix4c p = perm.cast<cd>();
  return TwoQubitState(p * rho.matrix() * p);
}

nlohmann::json to_json(const TwoQubitState& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back({rho(i, j).real(), rho(i, j).imag()});
    rows.push_back(row);
  }
  return {{"basis", {"HH", "HV", "VH", "VV"}}, {"matrix", rows}};
}

TwoQubitState state_from_json(const nlohmann::json& doc) {
  try {
    if (doc.contains("basis") &&
        doc.at("basis") != nlohmann::json({"HH", "HV", "VH", "VV"})) {
      throw DomainError("unsupported basis label in state JSON");
    }
    const auto& rows = doc.at("matrix");
    if (rows.size() != 4) throw DomainError("state JSON must hold a 4x4 matrix");
    Matrix4c m;
    for (int i = 0; i < 4; ++i) {
      if (rows.at(i).size() != 4) throw DomainError("state JSON must hold a 4x4 matrix");
      for (int j = 0; j < 4; ++j) {
        const auto& e = rows.at(i).at(j);
        m(i, j) = cd(e.at(0).get<double>(), e.at(1).get<double>());
      }
    }
    return TwoQubitState(m);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed state JSON: ") + e.what());
  }
}

}  // namespace xsplice
