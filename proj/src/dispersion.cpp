#include "xsplice/dispersion.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xsplice/errors.hpp"
#include "builtin_materials.hpp"

namespace xsplice {

namespace {

std::string format_nm(double v) {
  std::ostringstream os;
  os << v << " nm";
  return os.str();
}

double sellmeier_sum(const std::vector<SellmeierTerm>& terms, double lambda_nm) {
  const double l_um = lambda_nm * 1e-3;
  const double l2 = l_um * l_um;
  double n2 = 1.0;
  for (const auto& t : terms) n2 += t.b * l2 / (l2 - t.c_um2);
  return n2;
}

}  // namespace

SellmeierModel::SellmeierModel(std::string name, std::vector<SellmeierTerm> terms,
                               WavelengthRange range, std::string citation)
    : name_(std::move(name)),
      terms_(std::move(terms)),
      range_(range),
      citation_(std::move(citation)) {
  if (!(range_.min_nm > 0.0) || !(range_.max_nm > range_.min_nm)) {
    throw DomainError("sellmeier model '" + name_ + "': invalid validity range");
  }
  if (terms_.empty()) {
    throw DomainError("sellmeier model '" + name_ + "': no terms");
  }
  for (double edge : {range_.min_nm, range_.max_nm}) {
    const double n2 = sellmeier_sum(terms_, edge);
    if (!std::isfinite(n2) || n2 <= 1.0) {
      throw DomainError("sellmeier model '" + name_ +
                        "': index not real and > 1 at " + format_nm(edge));
    }
  }
}

double SellmeierModel::index(double lambda_nm) const {
  if (!(lambda_nm >= range_.min_nm)) {
    throw DomainError("wavelength " + format_nm(lambda_nm) + " below minimum " +
                      format_nm(range_.min_nm) + " of model '" + name_ + "'");
  }
  if (!(lambda_nm <= range_.max_nm)) {
    throw DomainError("wavelength " + format_nm(lambda_nm) + " above maximum " +
                      format_nm(range_.max_nm) + " of model '" + name_ + "'");
  }
  return std::sqrt(sellmeier_sum(terms_, lambda_nm));
}

void FiberSpec::validate() const {
  if (!(length_m >= 0.0)) throw DomainError("fiber length must be >= 0");
  if (!(birefringence >= 0.0)) throw DomainError("fiber birefringence must be >= 0");
  if (!(gamma_per_W_m >= 0.0)) throw DomainError("fiber gamma must be >= 0");
}

double fast_axis_index(const FiberSpec& fiber, double lambda_nm) {
  return fiber.core.index(lambda_nm);
}

double slow_axis_index(const FiberSpec& fiber, double lambda_nm) {
  return fiber.core.index(lambda_nm) + fiber.birefringence;
}

double crystal_birefringence(const CompensatorMaterial& material, double lambda_nm) {
  return material.extraordinary.index(lambda_nm) - material.ordinary.index(lambda_nm);
}

// --- database -------------------------------------------------------------

const std::string& MaterialDatabase::builtin_json() {
  static const std::string text{detail::kBuiltinMaterialsJson};
  return text;
}

MaterialDatabase MaterialDatabase::builtin() {
  static const MaterialDatabase db = from_json_string(builtin_json());
  return db;
}

MaterialDatabase MaterialDatabase::from_json_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("material database: ") + e.what());
  }
  MaterialDatabase db;
  try {
    for (const auto& [key, entry] : doc.at("models").items()) {
      std::vector<SellmeierTerm> terms;
      for (const auto& t : entry.at("terms")) {
        terms.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
      }
      const auto& r = entry.at("range_nm");
      WavelengthRange range{r.at(0).get<double>(), r.at(1).get<double>()};
      std::string citation = entry.value("citation", std::string{});
      db.models_.emplace(key, SellmeierModel(key, std::move(terms), range,
                                             std::move(citation)));
    }
    if (doc.contains("compensators")) {
      for (const auto& [key, entry] : doc.at("compensators").items()) {
        db.compensators_[key] = {entry.at("ordinary").get<std::string>(),
                                 entry.at("extraordinary").get<std::string>()};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("material database: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("material database: ") + e.what());
  }
  for (const auto& [key, pair] : db.compensators_) {
    if (!db.models_.count(pair.first) || !db.models_.count(pair.second)) {
      throw ConfigError("material database: compensator '" + key +
                        "' references an unknown model");
    }
  }
  return db;
}

MaterialDatabase MaterialDatabase::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open material database " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

MaterialDatabase MaterialDatabase::resolve(const std::filesystem::path& explicit_path) {
  if (!explicit_path.empty()) return from_file(explicit_path);
  if (const char* env = std::getenv("XSPLICE_MATERIALS"); env && *env) {
    return from_file(env);
  }
  return builtin();
}

const SellmeierModel& MaterialDatabase::model(const std::string& key) const {
  auto it = models_.find(key);
  if (it == models_.end()) throw ConfigError("unknown material model '" + key + "'");
  return it->second;
}

CompensatorMaterial MaterialDatabase::compensator(const std::string& key) const {
  auto it = compensators_.find(key);
  if (it == compensators_.end()) {
    throw ConfigError("unknown compensator material '" + key + "'");
  }
  return {key, model(it->second.first), model(it->second.second)};
}

std::vector<std::string> MaterialDatabase::model_names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : models_) out.push_back(k);
  return out;
}

std::vector<std::string> MaterialDatabase::compensator_names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : compensators_) out.push_back(k);
  return out;
}

}  // namespace xsplice
