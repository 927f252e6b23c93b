#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "xsplice/compensator_design.hpp"
#include "xsplice/counts_model.hpp"
#include "xsplice/dispersion.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/spectrum.hpp"
#include "xsplice/state_model.hpp"

namespace xsplice {

struct SweepSettings {
  double min_mW = 1.0;
  double max_mW = 100.0;
  int steps = 34;
  double duration_s = 30.0;
  std::uint64_t seed = 1;
};

struct TomographySettings {
  double werner_p = 0.896;
  double counts_per_setting = 1e5;
  int bootstrap = 50;
  std::uint64_t seed = 7;
};

/// Everything a run needs, read from an INI file with sections [fiber],
/// [operating_point], [compensators], [grid], [state], [noise], [sweep] and
/// [tomography]. Unknown sections or keys are rejected.
struct Config {
  FiberSpec fiber;
  bool birefringence_calibrated = false;
  double pump_nm = 0.0;
  double signal_nm = 0.0;
  GaussianSpectrum pump;
  GaussianSpectrum signal;
  double peak_power_W = 0.0;
  CompensatorMaterial compensator_material;
  CompensatorPair compensators;
  DesignGrid grid;
  MixtureOptions mixture;
  double state_phase_rad = 3.14159265358979323846;
  NoiseParams noise;
  SweepSettings sweep;
  TomographySettings tomography;

  SourceModel source_model() const;
};

// Throws ConfigError on syntax, missing keys or invalid values.
Config parse_config(const std::string& ini_text, const MaterialDatabase& db);
Config load_config(const std::filesystem::path& path, const MaterialDatabase& db);

// The shipped example setup.
Config default_config(const MaterialDatabase& db);
const std::string& default_config_text();

}  // namespace xsplice
