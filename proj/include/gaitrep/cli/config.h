#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gaitrep/dynamics.h"
#include "gaitrep/gait.h"
#include "gaitrep/param_control.h"
#include "gaitrep/sdre_control.h"
#include "json.hpp"

namespace gaitrep::cli {

enum class ReferenceSource { kSdre, kHuman };

/// Everything one invocation needs. Defaults reproduce the reference setup
/// (leg constants, Q, R, W) of the tool.
struct RunConfig {
  LegParams leg = LegParams::Reference();
  ControlGains gains = ControlGains::Reference();
  Eigen::Vector2d W = Eigen::Vector2d(10, 10);
  double dt_sim = 1e-3;
  int care_every = 1;
  double divergence_bound = 1e3;
  JointVector init_error = JointVector::Zero();
  int smoothing_window = 1;
  NodeOptions nodes;
  OptimizerOptions optimizer;
  PlanBounds bounds;
  ReferenceSource reference = ReferenceSource::kSdre;
  std::optional<std::filesystem::path> reference_plan;
  std::filesystem::path profile;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  int check_points = 100;

  /// Throws ValidationError (or InfeasibleBounds) on inconsistent values.
  void Validate() const;

  SimulationOptions Simulation() const;
};

/// Overlays the keys present in `j` on `config`. Unknown keys are rejected.
void ApplyJson(RunConfig& config, const nlohmann::json& j);
RunConfig LoadConfigFile(const std::filesystem::path& path, RunConfig base = {});
nlohmann::json ToJson(const RunConfig& config);

/// FNV-1a of the canonical JSON dump of the effective configuration, as 16
/// hex digits.
std::string ConfigHash(const RunConfig& config);

/// Parses "w_min,w_max,a_min,a_max".
PlanBounds ParseBounds(const std::string& text);

}  // namespace gaitrep::cli
