#include "xsplice/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "builtin_config.hpp"
#include "xsplice/errors.hpp"

namespace xsplice {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"fiber", {"length_m", "birefringence", "gamma_per_W_m", "core"}},
      {"operating_point",
       {"pump_nm", "signal_nm", "pump_fwhm_nm", "signal_fwhm_nm", "peak_power_W"}},
      {"compensators",
       {"material", "signal_mm", "signal_orientation", "idler_mm", "idler_orientation"}},
      {"grid", {"points", "n_sigma"}},
      {"state", {"nodes", "n_sigma", "phase_rad"}},
      {"noise",
       {"pair_rate_coeff", "raman_s", "raman_i", "dark_s", "dark_i", "eta_s", "eta_i",
        "rep_rate_hz", "window_s", "spm_broadening", "raman_coincidence"}},
      {"sweep", {"min_mW", "max_mW", "steps", "duration_s", "seed"}},
      {"tomography", {"werner_p", "counts_per_setting", "bootstrap", "seed"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::string text(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key));
    if (!v) throw ConfigError("missing key [" + section + "] " + key);
    return *v;
  }

  template <typename T>
  T number(const std::string& section, const std::string& key, T fallback) const {
    const auto raw = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key));
    if (!raw) return fallback;
    return parse<T>(section, key, *raw);
  }

  template <typename T>
  T number(const std::string& section, const std::string& key) const {
    return parse<T>(section, key, text(section, key));
  }

 private:
  template <typename T>
  static T parse(const std::string& section, const std::string& key, const std::string& raw) {
    std::istringstream is(raw);
    is.imbue(std::locale::classic());
    T value{};
    is >> value;
    if (is.fail() || !(is >> std::ws).eof()) {
      throw ConfigError("[" + section + "] " + key + ": cannot parse '" + raw + "'");
    }
    return value;
  }

  const pt::ptree& tree_;
};

template <typename F>
void checked(const std::string& what, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

SourceModel Config::source_model() const {
  SourceModel m;
  m.fiber = fiber;
  m.compensators = compensators;
  m.pump = pump;
  m.signal = signal;
  m.state_phase_rad = state_phase_rad;
  m.mixture = mixture;
  m.mixture.check_convergence = false;
  return m;
}

Config parse_config(const std::string& ini_text, const MaterialDatabase& db) {
  pt::ptree tree;
  try {
    std::istringstream is(ini_text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("key outside of a section: " + section);
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError("unknown key [" + section + "] " + key);
      }
    }
  }
  const Reader r(tree);
  Config c;

  try {
    c.fiber.core = db.model(r.text("fiber", "core"));
    c.compensator_material = db.compensator(r.text("compensators", "material"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.fiber.length_m = r.number<double>("fiber", "length_m");
  c.fiber.gamma_per_W_m = r.number<double>("fiber", "gamma_per_W_m", 0.0);

  c.pump_nm = r.number<double>("operating_point", "pump_nm");
  c.signal_nm = r.number<double>("operating_point", "signal_nm");
  c.pump = {c.pump_nm, r.number<double>("operating_point", "pump_fwhm_nm")};
  c.signal = {c.signal_nm, r.number<double>("operating_point", "signal_fwhm_nm")};
  c.peak_power_W = r.number<double>("operating_point", "peak_power_W", 0.0);
  checked("[operating_point]", [&] {
    c.pump.validate();
    c.signal.validate();
  });
  if (!(c.peak_power_W >= 0.0)) throw ConfigError("[operating_point] peak_power_W must be >= 0");

  const std::string b = r.text("fiber", "birefringence");
  if (b == "calibrate") {
    c.birefringence_calibrated = true;
    try {
      c.fiber.birefringence = calibrate_birefringence(c.fiber.core, c.pump_nm, c.signal_nm);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("birefringence calibration: ") + e.what());
    }
  } else {
    c.fiber.birefringence = r.number<double>("fiber", "birefringence");
  }
  checked("[fiber]", [&] { c.fiber.validate(); });

  auto comp = [&](const std::string& prefix, Arm arm) {
    CompensatorSpec s;
    s.length_mm = r.number<double>("compensators", prefix + "_mm");
    s.material = c.compensator_material;
    s.arm = arm;
    checked("[compensators] " + prefix + "_orientation", [&] {
      s.orientation = parse_orientation(r.text("compensators", prefix + "_orientation"));
    });
    checked("[compensators] " + prefix, [&] { s.validate(); });
    return s;
  };
  c.compensators.signal = comp("signal", Arm::signal);
  c.compensators.idler = comp("idler", Arm::idler);

  c.grid.points_per_axis = r.number<int>("grid", "points", c.grid.points_per_axis);
  c.grid.n_sigma = r.number<double>("grid", "n_sigma", c.grid.n_sigma);
  if (c.grid.points_per_axis < 2 || !(c.grid.n_sigma > 0.0)) {
    throw ConfigError("[grid] needs points >= 2 and n_sigma > 0");
  }

  c.mixture.nodes = r.number<int>("state", "nodes", c.mixture.nodes);
  c.mixture.n_sigma = r.number<double>("state", "n_sigma", c.mixture.n_sigma);
  c.state_phase_rad = r.number<double>("state", "phase_rad", c.state_phase_rad);
  if (!supported_quadrature_nodes(c.mixture.nodes)) {
    throw ConfigError("[state] unsupported number of quadrature nodes");
  }
  if (!(c.mixture.n_sigma > 0.0)) throw ConfigError("[state] n_sigma must be > 0");

  NoiseParams& n = c.noise;
  n.pair_rate_coeff = r.number<double>("noise", "pair_rate_coeff", 0.0);
  n.raman_s = r.number<double>("noise", "raman_s", 0.0);
  n.raman_i = r.number<double>("noise", "raman_i", 0.0);
  n.dark_s = r.number<double>("noise", "dark_s", 0.0);
  n.dark_i = r.number<double>("noise", "dark_i", 0.0);
  n.eta_s = r.number<double>("noise", "eta_s", 1.0);
  n.eta_i = r.number<double>("noise", "eta_i", 1.0);
  n.rep_rate_hz = r.number<double>("noise", "rep_rate_hz", n.rep_rate_hz);
  n.window_s = r.number<double>("noise", "window_s", n.window_s);
  n.spm_broadening = r.number<double>("noise", "spm_broadening", 0.0);
  n.raman_coincidence = r.number<double>("noise", "raman_coincidence", 0.0);
  checked("[noise]", [&] { n.validate(); });

  SweepSettings& s = c.sweep;
  s.min_mW = r.number<double>("sweep", "min_mW", s.min_mW);
  s.max_mW = r.number<double>("sweep", "max_mW", s.max_mW);
  s.steps = r.number<int>("sweep", "steps", s.steps);
  s.duration_s = r.number<double>("sweep", "duration_s", s.duration_s);
  s.seed = r.number<std::uint64_t>("sweep", "seed", s.seed);
  if (!(s.min_mW >= 0.0) || !(s.max_mW >= s.min_mW) || s.steps < 1 || !(s.duration_s > 0.0)) {
    throw ConfigError("[sweep] needs 0 <= min_mW <= max_mW, steps >= 1, duration_s > 0");
  }

  TomographySettings& t = c.tomography;
  t.werner_p = r.number<double>("tomography", "werner_p", t.werner_p);
  t.counts_per_setting = r.number<double>("tomography", "counts_per_setting", t.counts_per_setting);
  t.bootstrap = r.number<int>("tomography", "bootstrap", t.bootstrap);
  t.seed = r.number<std::uint64_t>("tomography", "seed", t.seed);
  if (!(t.werner_p >= 0.0 && t.werner_p <= 1.0) || !(t.counts_per_setting > 0.0) ||
      t.bootstrap < 0) {
    throw ConfigError("[tomography] needs 0 <= werner_p <= 1, counts_per_setting > 0, "
                      "bootstrap >= 0");
  }
  return c;
}

Config load_config(const std::filesystem::path& path, const MaterialDatabase& db) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), db);
}

const std::string& default_config_text() {
  static const std::string text{detail::kBuiltinConfigIni};
  return text;
}

Config default_config(const MaterialDatabase& db) {
  return parse_config(default_config_text(), db);
}

}  // namespace xsplice
