#pragma once

#include <filesystem>
#include <string>

#include "xsplice/compensator_design.hpp"
#include "xsplice/dispersion.hpp"
#include "xsplice/phase_model.hpp"
#include "xsplice/spectrum.hpp"

namespace testing {

inline const xsplice::MaterialDatabase& db() {
  static const auto d = xsplice::MaterialDatabase::builtin();
  return d;
}

inline double calibrated_b() {
  static const double b =
      xsplice::calibrate_birefringence(db().model("fused_silica"), 771.0, 670.0);
  return b;
}

// 13 cm PM fiber, 771 nm pump, 670 nm signal.
inline xsplice::FiberSpec paper_fiber() {
  return {0.13, calibrated_b(), 0.01, db().model("fused_silica")};
}

inline xsplice::GaussianSpectrum pump_spectrum() { return {771.0, 0.3}; }
inline xsplice::GaussianSpectrum signal_spectrum() { return {670.0, 0.23}; }

inline xsplice::CompensatorPair paper_compensators() {
  const auto quartz = db().compensator("quartz");
  return {{67.3, quartz, xsplice::Orientation::slow_vertical, xsplice::Arm::signal},
          {47.6, quartz, xsplice::Orientation::slow_horizontal, xsplice::Arm::idler}};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("xsplice_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
