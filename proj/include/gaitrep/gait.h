#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gaitrep/dynamics.h"

namespace gaitrep {

/// Desired joint-angle profile of one leg sampled on [0, T], with
/// finite-difference velocities and accelerations.
struct GaitProfile {
  std::vector<double> t;
  std::vector<JointVector> theta;
  std::vector<JointVector> theta_dot;
  std::vector<JointVector> theta_ddot;
  std::string label;
  /// Moving-average window applied to θ before differentiating (1 = none).
  int smoothing_window = 1;

  std::size_t size() const { return t.size(); }
  double Duration() const { return t.empty() ? 0.0 : t.back(); }

  /// Linear interpolation of θ, θ̇, θ̈ at time t. Throws OutOfDomain for t
  /// outside [0, T].
  JointKinematics At(double time) const;
};

/// Validates samples and computes derivatives. Time is shifted so the
/// first sample sits at t = 0.
///
/// Throws ValidationError for non-increasing time, mismatched lengths,
/// non-finite values, |θ| >= π or zero duration, and TooFewSamples when
/// fewer than three samples remain.
GaitProfile MakeProfile(std::vector<double> t, std::vector<JointVector> theta,
                        std::string label = {}, int smoothing_window = 1);

/// Recomputes θ̇ and θ̈: three-point central differences inside, one-sided
/// second-order stencils at both ends, θ̈ obtained by differentiating θ̇.
GaitProfile Differentiate(GaitProfile profile, int smoothing_window = 1);

/// Linear interpolation onto a uniform grid of spacing dt (T is always the
/// last sample); derivatives recomputed.
GaitProfile Resample(const GaitProfile& profile, double dt);

/// Reads `t,hip,knee` (one leg) or `t,hip_l,knee_l,hip_r,knee_r` (two
/// legs, returned left then right). Angles in radians.
std::vector<GaitProfile> LoadProfiles(const std::filesystem::path& path,
                                      int smoothing_window = 1);
std::vector<GaitProfile> ParseProfiles(const std::string& csv_text,
                                       const std::string& source = "<string>",
                                       int smoothing_window = 1);

/// Writes one or two legs in the format accepted by LoadProfiles. Two-leg
/// output requires identical time grids.
void WriteProfiles(const std::filesystem::path& path,
                   const std::vector<GaitProfile>& legs);

enum class CurvatureMode {
  kAcceleration,  // |θ̈|
  kGraph,         // curvature of the (t, θ) graph: |θ̈| / (1 + θ̇²)^{3/2}
};

struct NodeOptions {
  double min_separation = 0.05;  // s
  /// Absolute peak threshold; when unset, `prominence_fraction` of the
  /// largest curvature value over both joints is used.
  std::optional<double> prominence;
  double prominence_fraction = 0.1;
  CurvatureMode mode = CurvatureMode::kAcceleration;
};

/// Segment boundaries {t₀ⁱ}: starts at 0, ends at T, strictly increasing.
struct NodeSequence {
  std::vector<double> times;
  std::vector<std::size_t> indices;  // sample index of each node

  std::size_t size() const { return times.size(); }
  std::size_t segments() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Interior nodes are local maxima of the curvature signal of either joint
/// above the prominence threshold, greedily thinned (highest first) so no
/// two nodes, and no node and an endpoint, are closer than min_separation.
NodeSequence SelectNodes(const GaitProfile& profile, const NodeOptions& options = {});

/// Curvature signal used by SelectNodes for one joint.
std::vector<double> CurvatureSignal(const GaitProfile& profile, int joint,
                                    CurvatureMode mode);

/// Synthetic profiles shipped with the tool.
///
/// Walk: hip 0.3·sin(2πt/P), knee 0.5·sin(2πt/P + 0.4), one period
/// P = 1.2 s; `phase` (s) shifts the cycle (the right leg uses P/2).
GaitProfile WalkProfile(double dt = 0.01, double phase = 0.0, double period = 1.2);

/// Squat: s(t) = (1 − cos(2πt/T))/2, hip 0.8·s, knee −0.6·s, T = 2 s.
GaitProfile SquatProfile(double dt = 0.01, double duration = 2.0);

}  // namespace gaitrep
