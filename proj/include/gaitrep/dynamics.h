#pragma once

#include <Eigen/Dense>

namespace gaitrep {

/// Pair of per-joint quantities ordered [hip, knee].
using JointVector = Eigen::Vector2d;

/// Physical constants of one leg modeled as a hip/knee double pendulum.
///
/// Lengths in m, masses in kg, gravity in m/s². The constructor rejects
/// non-positive or non-finite values. `m1` (hip motor mass) is carried for
/// completeness but does not enter the equations of motion: the hip motor
/// sits on the fixed pivot.
class LegParams {
 public:
  LegParams(double l1, double l2, double m1, double m2, double mc1, double mc2,
            double g = 9.81);

  /// Constants of the reference leg: l1 = 0.251, l2 = 0.28, m1 = m2 = 0.876,
  /// mc1 = 2.89, mc2 = 3.242, g = 9.81.
  static LegParams Reference();

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double m1() const { return m1_; }
  double m2() const { return m2_; }
  double mc1() const { return mc1_; }
  double mc2() const { return mc2_; }
  double g() const { return g_; }

  /// Centroidal inertias of the uniform thigh and lower-leg links.
  double Ic1() const { return mc1_ * l1_ * l1_ / 12.0; }
  double Ic2() const { return mc2_ * l2_ * l2_ / 12.0; }

  bool operator==(const LegParams&) const = default;

 private:
  double l1_, l2_, m1_, m2_, mc1_, mc2_, g_;
};

struct JointState {
  JointVector theta = JointVector::Zero();  // rad
  JointVector omega = JointVector::Zero();  // rad/s
};

/// Angle, velocity and acceleration of both joints at one instant.
struct JointKinematics {
  JointVector theta = JointVector::Zero();
  JointVector omega = JointVector::Zero();
  JointVector alpha = JointVector::Zero();
};

/// sin(x)/x with the removable singularity filled in. Uses a Taylor
/// polynomial for |x| < 1e-4.
double Sinc(double x);

Eigen::Matrix2d MassMatrix(const LegParams& p, const JointVector& theta);

Eigen::Matrix2d CoriolisMatrix(const LegParams& p, const JointVector& theta,
                               const JointVector& omega);

/// State-dependent gravity matrix; G_sd(θ)·θ is the gravity torque.
Eigen::Matrix2d GravityMatrix(const LegParams& p, const JointVector& theta);

/// τ = M(θ)θ̈ + V(θ,θ̇)θ̇ + G_sd(θ)θ
JointVector InverseDynamics(const LegParams& p, const JointVector& theta,
                            const JointVector& omega, const JointVector& alpha);

/// θ̈ = M⁻¹(τ − Vθ̇ − G_sd θ)
JointVector ForwardDynamics(const LegParams& p, const JointState& state,
                            const JointVector& tau);

/// One classical Runge–Kutta step under constant torque. Throws
/// ValidationError for dt <= 0.
JointState Rk4Step(const LegParams& p, const JointState& state,
                   const JointVector& tau, double dt);

double KineticEnergy(const LegParams& p, const JointState& state);
double PotentialEnergy(const LegParams& p, const JointVector& theta);

}  // namespace gaitrep
