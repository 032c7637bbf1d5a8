#pragma once

#include "eitnsim/spectrum.hpp"

#include <string>
#include <vector>

namespace eitnsim {

enum class SweepParameter { None, ModulationFrequency, FieldMagnitude };

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& name);

/// Outer loop: one scan per value.
struct Sweep {
  SweepParameter parameter = SweepParameter::None;
  std::vector<double> values;
};

/// A complete run description. Laser-1 carrier detuning is measured from the
/// centre of its transition group; laser-2 detuning (and the scan axis) from
/// the Raman point when the origin is Raman.
struct Scenario {
  std::string name = "custom";
  LevelSchemeConfig scheme;
  DopplerConfig doppler;
  ScanConfig scan;
  Sweep sweep;
};

std::vector<std::string> scenario_names();
/// Preset by name; throws ConfigError for an unknown name.
Scenario scenario(const std::string& name);

/// The scan configuration for one sweep value.
ScanConfig apply_sweep(const ScanConfig& config, SweepParameter parameter,
                       double value);

} // namespace eitnsim
