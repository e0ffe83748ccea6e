#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaitrep/gait.h"
#include "gaitrep/param_control.h"
#include "gaitrep/sdre_control.h"
#include "json.hpp"

namespace gaitrep::cli {

struct ErrorStats {
  JointVector angle_rmse_deg = JointVector::Zero();
  JointVector torque_rmse = JointVector::Zero();  // N·m
};

/// The human motion as a trajectory: θ = θ_d from the profile, τ = τ_d from
/// inverse dynamics.
TrackingResult HumanTrajectory(const LegParams& p, const GaitProfile& profile);

DesiredTrajectory FromProfile(const GaitProfile& profile);

/// RMSE of `candidate` against `reference` at the reference sample times,
/// the candidate linearly interpolated. Throws DomainMismatch when the two
/// horizons differ.
ErrorStats CompareTrajectories(const TrackingResult& reference,
                               const TrackingResult& candidate);

/// Candidate angle and torque at arbitrary time (linear interpolation).
JointVector InterpolateTheta(const TrackingResult& r, double t);
JointVector InterpolateTau(const TrackingResult& r, double t);

nlohmann::json PlanToJson(const LegPlan& plan);
LegPlan PlanFromJson(const nlohmann::json& j);
LegPlan ReadPlanJson(const std::filesystem::path& path);

/// Fixed plan used for planted-solution runs: five nodes over 1.2 s.
LegPlan PlantedPlan();

/// Node sequence at given times, each snapped to the nearest profile sample.
NodeSequence NodesAtTimes(const GaitProfile& profile, const std::vector<double>& times);

inline double Degrees(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace gaitrep::cli
