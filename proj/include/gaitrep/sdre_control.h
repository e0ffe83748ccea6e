#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "gaitrep/dynamics.h"
#include "gaitrep/riccati.h"

namespace gaitrep {

using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Matrix52d = Eigen::Matrix<double, 5, 2>;

/// Weights of the SDRE cost ∫ xᵀQx + uᵀRu dt and the decay rate η of the
/// auxiliary state ζ.
struct ControlGains {
  Matrix5d Q = Matrix5d::Identity();
  Eigen::Matrix2d R = Eigen::Matrix2d::Identity();
  double eta = 1.0;

  /// Q = diag(500, 500, 20, 20, 1), R = diag(20, 20), η = 1.
  static ControlGains Reference();

  /// Throws ValidationError unless Q ⪰ 0, R ≻ 0 (both symmetric), η > 0.
  void Validate() const;
};

/// Tracking error x = [θ − θ_d, θ̇ − θ̇_d, ζ].
struct ErrorState {
  JointVector x_theta = JointVector::Zero();
  JointVector x_w = JointVector::Zero();
  double zeta = 1.0;

  Vector5d Stacked() const;
  static ErrorState FromStacked(const Vector5d& x);
  static ErrorState Between(const JointState& actual, const JointKinematics& desired,
                            double zeta);
};

/// State-dependent coefficient form ẋ = A(x)x + B(x)u of the error dynamics,
///
///   A = [ 0          I          0        ]     B = [ 0   ]
///       [ −M⁻¹G_sd   −M⁻¹V      −M⁻¹g_f  ]         [ M⁻¹ ]
///       [ 0          0          −η       ]         [ 0   ]
///
/// with M, V, G_sd evaluated on the actual state θ_d + x_θ, θ̇_d + x_w.
struct SdcModel {
  Matrix5d A = Matrix5d::Zero();
  Matrix52d B = Matrix52d::Zero();
};

/// g_f = (M(θ) − M(θ_d))θ̈_d + (V(θ,θ̇) − V(θ_d,θ̇_d))θ̇_d + (G_sd(θ) − G_sd(θ_d))θ_d
JointVector GfTerm(const LegParams& p, const JointState& actual,
                   const JointKinematics& desired);

SdcModel BuildSdc(const LegParams& p, const ErrorState& x,
                  const JointKinematics& desired, const ControlGains& gains);

struct Feedback {
  JointVector u = JointVector::Zero();  // τ − τ_d
  CareSolution care;
};

/// u = −R⁻¹BᵀPx with P the stabilizing CARE solution at (A(x), B(x), Q, R).
/// Propagates NotStabilizable / NumericalFailure.
Feedback SdreFeedback(const SdcModel& model, const ControlGains& gains,
                      const ErrorState& x);

/// u for an already solved P.
JointVector FeedbackFromRiccati(const SdcModel& model, const ControlGains& gains,
                                const Eigen::MatrixXd& P, const ErrorState& x);

/// Desired motion queried by the simulator.
struct DesiredTrajectory {
  std::function<JointKinematics(double)> at;
  double duration = 0.0;
};

struct SimulationOptions {
  double dt = 1e-3;
  /// Solve the CARE every `care_every` steps and hold P in between.
  int care_every = 1;
  /// ‖x‖∞ above this aborts with SimulationDiverged.
  double divergence_bound = 1e3;
  JointVector initial_angle_error = JointVector::Zero();
  JointVector initial_velocity_error = JointVector::Zero();
  double zeta0 = 1.0;
  /// Run the Hautus stabilizability test at every CARE evaluation point.
  bool check_hautus = false;
};

struct TrackingDiagnostics {
  double max_care_residual = 0.0;
  double max_closed_loop_real = -std::numeric_limits<double>::infinity();
  /// Largest violation of τ − τ_d = MΔθ̈ + VΔθ̇ + G_sdΔθ + g_f over all steps.
  double max_decomposition_residual = 0.0;
  std::size_t care_solves = 0;
  std::size_t hautus_checks = 0;
  std::size_t hautus_failures = 0;
};

/// Time histories of a closed-loop run (or of any trajectory compared
/// against a desired motion). All vectors share the length of `t`.
struct TrackingResult {
  std::vector<double> t;
  std::vector<JointVector> theta, omega;
  std::vector<JointVector> tau, tau_d;
  std::vector<JointVector> theta_d;
  std::vector<Vector5d> x;
  TrackingDiagnostics diagnostics;

  std::size_t size() const { return t.size(); }
  double Duration() const { return t.empty() ? 0.0 : t.back(); }
  /// Root-mean-square of θ − θ_d over the samples, per joint (rad).
  JointVector AngleRmse() const;
  JointVector PeakAbsTorque() const;
  JointVector PeakAbsControl() const;  // max |τ − τ_d|
};

/// Marches the plant under τ = τ_d + u with zero-order hold over each step.
/// τ_d is the inverse-dynamics torque of the desired sample.
TrackingResult SimulateTracking(const LegParams& p, const DesiredTrajectory& desired,
                                const ControlGains& gains,
                                const SimulationOptions& options = {});

/// Columns: t, theta1, theta2, omega1, omega2, tau1, tau2, tau_d1, tau_d2,
/// err1, err2.
void WriteTrackingCsv(const std::filesystem::path& path, const TrackingResult& result);
/// Inverse of WriteTrackingCsv. θ_d is recovered as θ − err; x and the
/// diagnostics are not stored and come back empty.
TrackingResult ReadTrackingCsv(const std::filesystem::path& path);

}  // namespace gaitrep
