#pragma once

// Experiment configuration: a strict JSON schema (unknown keys are rejected
// everywhere) covering the platform, targets, pulse grid, optimizer, and
// evaluation protocol, plus the translation into a validated SystemModel.

#include "pargate/grape.hpp"
#include "pargate/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pargate {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PlatformConfig {
  Platform type = Platform::custom;
  // nv_chain
  int n_qubits = 0;
  double coupling = 0.0;             // in coupling_unit
  std::string coupling_unit = "gT";  // gT | hz | rad_per_s
  // nmr
  NmrSpinSystem spins;
  // transmon_array
  int q = 0;
  double g_max_hz = 0.0;
  // custom (explicit operators; carries its own targets)
  SystemModel custom_model;
};

struct PulseConfig {
  double total_time = 0.0;              // seconds
  int n_slices = 0;
  double amplitude_bound = 0.0;         // rad/s, handed to the platform builder
  std::string synthesis = "geometric";  // geometric | grape | primitive
};

struct SweepConfig {
  bool enabled = false;
  std::vector<double> axis;  // in unit
  std::string unit = "gT";   // gT | hz | rad_per_s | scale
  int n_seeds = 1;           // evaluation seeds derived as seed + i
};

struct RepeatConfig {
  bool enabled = false;
  std::vector<int> m_values;
  // Coupling point the repetition runs at (same units as the sweep); NaN or
  // omitted keeps the model as built.
  bool has_at = false;
  double at = 0.0;
  std::string unit = "gT";
};

struct EvalConfig {
  SweepConfig sweep;
  RepeatConfig repeat;
  bool blocks = false;  // tiled evaluation instead of the full space
  long long dim_cap = kDefaultDimCap;
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 defers to the CLI flag / environment / hardware
  std::string output_dir = "out";
  PlatformConfig platform;
  // One gate name applied to every subsystem, or one per subsystem; empty
  // keeps the targets the platform builder (or custom model) installed.
  std::vector<std::string> target_gates;
  PulseConfig pulse;
  OptimizerConfig optimizer;
  bool optimize = false;      // run the weighted GRAPE stage
  double perturbation = 0.0;  // seeded relative perturbation of the start pulses
  EvalConfig evaluation;
  std::string raw;  // original document bytes, hashed into the summary
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

// gT is divided by total_time, hz multiplied by 2 pi, rad_per_s passed
// through.  "scale" has no absolute meaning and is rejected here.
double coupling_to_rad_s(double value, const std::string& unit, double total_time);

// Instantiates the platform and assigns named-gate targets.  For the
// transmon platform the sampled parameter set is also returned when
// `transmon_out` is given, so callers can resample couplings later.
SystemModel build_model(const ExperimentConfig& config, TransmonParams* transmon_out = nullptr);

}  // namespace pargate
