#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xsplice {

// One Sellmeier resonance: contributes b * l^2 / (l^2 - c) with l in micrometres.
struct SellmeierTerm {
  double b = 0.0;
  double c_um2 = 0.0;
};

struct WavelengthRange {
  double min_nm = 0.0;
  double max_nm = 0.0;

  bool contains(double lambda_nm) const {
    return lambda_nm >= min_nm && lambda_nm <= max_nm;
  }
};

/// Refractive index model n(lambda) = sqrt(1 + sum_j B_j l^2 / (l^2 - C_j)).
///
/// Evaluation outside the declared validity range throws DomainError; the
/// constructor rejects models whose index is not real and > 1 at the range
/// endpoints.
class SellmeierModel {
 public:
  SellmeierModel() = default;
  SellmeierModel(std::string name, std::vector<SellmeierTerm> terms,
                 WavelengthRange range, std::string citation = {});

  double index(double lambda_nm) const;

  const std::string& name() const { return name_; }
  const std::vector<SellmeierTerm>& terms() const { return terms_; }
  const WavelengthRange& range() const { return range_; }
  const std::string& citation() const { return citation_; }
  bool contains(double lambda_nm) const { return range_.contains(lambda_nm); }

 private:
  std::string name_;
  std::vector<SellmeierTerm> terms_;
  WavelengthRange range_;
  std::string citation_;
};

/// One polarization-maintaining fiber segment. The core model gives the
/// fast-axis index; the slow axis sits a constant `birefringence` above it.
struct FiberSpec {
  double length_m = 0.0;
  double birefringence = 0.0;
  double gamma_per_W_m = 0.0;
  SellmeierModel core;

  void validate() const;
};

/// Uniaxial crystal used for the compensators.
struct CompensatorMaterial {
  std::string name;
  SellmeierModel ordinary;
  SellmeierModel extraordinary;
};

inline double index(const SellmeierModel& model, double lambda_nm) {
  return model.index(lambda_nm);
}

double fast_axis_index(const FiberSpec& fiber, double lambda_nm);
double slow_axis_index(const FiberSpec& fiber, double lambda_nm);

// n_e - n_o at lambda.
double crystal_birefringence(const CompensatorMaterial& material,
                             double lambda_nm);

/// Named Sellmeier models and compensator materials.
///
/// JSON layout:
///   { "models": { "<key>": { "terms": [[B, C_um2], ...],
///                            "range_nm": [min, max],
///                            "citation": "..." } },
///     "compensators": { "<key>": { "ordinary": "<model key>",
///                                  "extraordinary": "<model key>" } } }
class MaterialDatabase {
 public:
  static MaterialDatabase builtin();
  static MaterialDatabase from_json_string(const std::string& text);
  static MaterialDatabase from_file(const std::filesystem::path& path);

  // Resolution order: explicit path, $XSPLICE_MATERIALS, built-ins.
  static MaterialDatabase resolve(const std::filesystem::path& explicit_path = {});

  const SellmeierModel& model(const std::string& key) const;
  CompensatorMaterial compensator(const std::string& key) const;

  std::vector<std::string> model_names() const;
  std::vector<std::string> compensator_names() const;

  // Returns the JSON text of the shipped database.
  static const std::string& builtin_json();

 private:
  std::map<std::string, SellmeierModel> models_;
  std::map<std::string, std::pair<std::string, std::string>> compensators_;
};

}  // namespace xsplice
