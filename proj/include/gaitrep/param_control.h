#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaitrep/dynamics.h"
#include "gaitrep/gait.h"
#include "gaitrep/nelder_mead.h"
#include "gaitrep/sdre_control.h"

namespace gaitrep {

/// Motor limits on the plan parameters: w_min ≤ w_k ≤ w_max (signed) and
/// α_min ≤ |α_k| ≤ α_max (ramp magnitude; the sign follows w_k − w_{k−1}).
struct PlanBounds {
  double w_min = -6.0;
  double w_max = 6.0;
  double alpha_min = 0.0;
  double alpha_max = 40.0;

  /// Throws InfeasibleBounds for w_min > w_max, α_min > α_max, α_min < 0,
  /// α_max == 0 or non-finite values.
  void Validate() const;
};

/// Piecewise-linear (ramp then hold) velocity schedule of one joint.
///
/// Segment k (0-based here) spans [nodes[k], nodes[k+1]]: the velocity ramps
/// from w_{k−1} (w0 for k = 0) to w[k] with acceleration alpha[k], reaching
/// it at the ramp end t₁ = nodes[k] + (w[k] − w_{k−1}) / alpha[k], then holds.
struct VelocityPlan {
  std::vector<double> nodes;  // 0 = t₀¹ < … < t₀ⁿ = T
  double w0 = 0.0;            // velocity entering the first segment
  std::vector<double> w;      // one per segment
  std::vector<double> alpha;  // signed, one per segment

  std::size_t segments() const { return w.size(); }
  double Duration() const { return nodes.empty() ? 0.0 : nodes.back(); }
  double StartVelocity(std::size_t k) const { return k == 0 ? w0 : w[k - 1]; }
  double RampEnd(std::size_t k) const;

  /// Throws ValidationError unless sizes agree, nodes start at 0 and
  /// increase, each ramp fits its segment and sign(α_k) = sign(Δw).
  void Validate() const;
};

/// Both joints of one leg; the joints share node times.
struct LegPlan {
  std::array<VelocityPlan, 2> joints;
  JointVector theta0 = JointVector::Zero();

  double Duration() const { return joints[0].Duration(); }
};

class WeightMatrix {
 public:
  explicit WeightMatrix(const Eigen::Vector2d& diagonal = Eigen::Vector2d(10, 10));
  const Eigen::Vector2d& diagonal() const { return diagonal_; }

 private:
  Eigen::Vector2d diagonal_;
};

/// w̃(t). Throws OutOfDomain for t outside [0, T].
double EvalVelocity(const VelocityPlan& plan, double t);

struct PlanSample {
  double theta = 0.0;
  double omega = 0.0;
  double alpha = 0.0;
};

/// Closed-form θ̃, w̃, α̃ at time t (θ̃ integrates w̃ exactly from theta0).
PlanSample EvalPlan(const VelocityPlan& plan, double theta0, double t);

struct PlanTrajectory {
  std::vector<double> t;
  std::vector<double> theta, omega, alpha;
};

/// Samples EvalPlan on 0, dt, 2dt, …, with T always included.
PlanTrajectory IntegratePlan(const VelocityPlan& plan, double theta0, double dt);

/// Reference torque τ(t) that a plan is fitted against.
struct TorqueReference {
  std::vector<double> t;
  std::vector<JointVector> tau;

  double Duration() const { return t.empty() ? 0.0 : t.back(); }

  static TorqueReference FromTracking(const TrackingResult& result);
  /// Inverse dynamics of the profile samples.
  static TorqueReference FromProfile(const LegParams& p, const GaitProfile& profile);
  /// Inverse dynamics of an exact plan, sampled every dt.
  static TorqueReference FromPlan(const LegParams& p, const LegPlan& plan, double dt);
};

/// J = ( (1/T) ∫ eᵀWe dt )^{1/2},  e = τ − τ̃,  τ̃ = inverse dynamics of the
/// plan; trapezoidal rule on the reference samples. Throws DomainMismatch
/// when horizons differ.
double PlanCost(const LegParams& p, const LegPlan& plan, const TorqueReference& reference,
                const WeightMatrix& W);

/// Builds a plan that satisfies every invariant from raw targets: a ramp
/// magnitude too small to reach w_k inside its segment is raised to the
/// minimum that does; if that exceeds α_max, w_k is pulled back to what
/// α_max reaches. `penalty` (optional) accumulates the total adjustment.
VelocityPlan RealizePlan(const std::vector<double>& nodes, double w0,
                         const std::vector<double>& w_target,
                         const std::vector<double>& alpha_magnitude,
                         const PlanBounds& bounds, double* penalty = nullptr);

/// Starting plan: w_k = mean of θ̇ over segment k (clipped to bounds),
/// |α_k| = mid-range, w0 = θ̇(0), theta0 = θ(0).
LegPlan InitialPlan(const GaitProfile& profile, const NodeSequence& nodes,
                    const PlanBounds& bounds);

/// Per-segment fits only seed the final search, so they stop earlier.
inline NelderMeadOptions SegmentSearchDefaults() {
  NelderMeadOptions o;
  o.max_evaluations = 2000;
  o.x_tolerance = 1e-8;
  o.f_tolerance = 1e-10;
  o.max_restarts = 3;
  return o;
}

struct OptimizerOptions {
  int starts = 5;
  std::uint64_t seed = 0;
  /// Half-width of the uniform perturbation of the extra starts, as a
  /// fraction of each box side.
  double perturbation = 0.15;
  /// Extra uniformly drawn starts for each per-segment fit of the sweep.
  int segment_starts = 3;
  NelderMeadOptions nelder_mead{.max_evaluations = 8000};  // final search
  NelderMeadOptions segment_search = SegmentSearchDefaults();
  bool parallel = true;
};

struct CostTraceEntry {
  int start = 0;
  int iteration = 0;
  double cost = 0.0;
};

struct OptimizationResult {
  LegPlan plan;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double feasibility_penalty = 0.0;
  int best_start = 0;
  int evaluations = 0;
  /// True when a start ran out of evaluations before converging; the plan
  /// is still the best found.
  bool hit_max_iterations = false;
  std::vector<CostTraceEntry> trace;
};

/// Box-constrained multi-start Nelder–Mead over (w_k, |α_k|) of both joints.
/// Each start first sweeps the segments in time order, fitting the four
/// parameters of segment k to the torque on [t_k, t_{k+1}), then polishes
/// all parameters together on the full cost.
/// The returned plan satisfies the bounds and final_cost ≤ initial_cost.
/// Throws InfeasibleBounds for invalid bounds.
OptimizationResult OptimizePlan(const LegParams& p, const NodeSequence& nodes,
                                const TorqueReference& reference, const PlanBounds& bounds,
                                const WeightMatrix& W, const LegPlan& init,
                                const OptimizerOptions& options = {});

struct MotorCommand {
  double t0 = 0.0;
  double w = 0.0;
  double alpha = 0.0;
};

/// One command per segment, issued at its start node; each overwrites the
/// previous one.
std::vector<MotorCommand> PlanToCommands(const VelocityPlan& plan);

/// Rebuilds the plan a motor would execute from a command list.
VelocityPlan PlanFromCommands(const std::vector<MotorCommand>& commands, double w0,
                              double duration);

/// Plan trajectory in tracking form against a desired motion: θ = θ̃,
/// τ = τ̃, τ_d and θ_d from `desired`, sampled at `times`.
TrackingResult PlanTrackingResult(const LegParams& p, const LegPlan& plan,
                                  const DesiredTrajectory& desired,
                                  const std::vector<double>& times);

/// CSV `k,t0,w1,w2,alpha1,alpha2`, one row per segment (k from 1).
void WritePlanCsv(const std::filesystem::path& path, const LegPlan& plan);
/// CSV `joint,k,t0,w,alpha`.
void WriteCommandsCsv(const std::filesystem::path& path, const LegPlan& plan);

}  // namespace gaitrep
