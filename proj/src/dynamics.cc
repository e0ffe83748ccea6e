#include "gaitrep/dynamics.h"

#include <cmath>
#include <string>

#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

void RequirePositive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ValidationError(std::string("leg parameter ") + name +
                          " must be finite and > 0, got " +
                          std::to_string(value));
  }
}

struct Derivative {
  JointVector dtheta;
  JointVector domega;
};

Derivative Evaluate(const LegParams& p, const JointState& s,
                    const JointVector& tau) {
  return {s.omega, ForwardDynamics(p, s, tau)};
}

JointState Advance(const JointState& s, const Derivative& d, double h) {
  return {s.theta + h * d.dtheta, s.omega + h * d.domega};
}

}  // namespace

LegParams::LegParams(double l1, double l2, double m1, double m2, double mc1,
                     double mc2, double g)
    : l1_(l1), l2_(l2), m1_(m1), m2_(m2), mc1_(mc1), mc2_(mc2), g_(g) {
  RequirePositive(l1, "l1");
  RequirePositive(l2, "l2");
  RequirePositive(m1, "m1");
  RequirePositive(m2, "m2");
  RequirePositive(mc1, "mc1");
  RequirePositive(mc2, "mc2");
  RequirePositive(g, "g");
}

LegParams LegParams::Reference() {
  return LegParams(0.251, 0.28, 0.876, 0.876, 2.89, 3.242, 9.81);
}

double Sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

Eigen::Matrix2d MassMatrix(const LegParams& p, const JointVector& theta) {
  const double l1 = p.l1(), l2 = p.l2();
  const double m11 = 0.25 * p.mc1() * l1 * l1 + p.Ic1() + p.m2() * l1 * l1 +
                     p.mc2() * l1 * l1;
  const double m12 = 0.5 * p.mc2() * l1 * l2 * std::cos(theta(0) - theta(1));
  const double m22 = 0.25 * p.mc2() * l2 * l2 + p.Ic2();
  Eigen::Matrix2d M;
  M << m11, m12,
       m12, m22;
  return M;
}

Eigen::Matrix2d CoriolisMatrix(const LegParams& p, const JointVector& theta,
                               const JointVector& omega) {
  const double h = 0.5 * p.mc2() * p.l1() * p.l2() * std::sin(theta(0) - theta(1));
  Eigen::Matrix2d V;
  V << 0.0, h * omega(1),
       -h * omega(0), 0.0;
  return V;
}

Eigen::Matrix2d GravityMatrix(const LegParams& p, const JointVector& theta) {
  const double g = p.g();
  const double hip = (p.m2() + 0.5 * p.mc1() + p.mc2()) * g * p.l1();
  const double knee = 0.5 * p.mc2() * g * p.l2();
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  G(0, 0) = hip * Sinc(theta(0));
  G(1, 1) = knee * Sinc(theta(1));
  return G;
}

JointVector InverseDynamics(const LegParams& p, const JointVector& theta,
                            const JointVector& omega, const JointVector& alpha) {
  return MassMatrix(p, theta) * alpha + CoriolisMatrix(p, theta, omega) * omega +
         GravityMatrix(p, theta) * theta;
}

JointVector ForwardDynamics(const LegParams& p, const JointState& state,
                            const JointVector& tau) {
  const JointVector rhs = tau -
                          CoriolisMatrix(p, state.theta, state.omega) * state.omega -
                          GravityMatrix(p, state.theta) * state.theta;
  // M is SPD for every θ.
  return MassMatrix(p, state.theta).llt().solve(rhs);
}

JointState Rk4Step(const LegParams& p, const JointState& state,
                   const JointVector& tau, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("integration step must be > 0, got " +
                          std::to_string(dt));
  }
  const Derivative k1 = Evaluate(p, state, tau);
  const Derivative k2 = Evaluate(p, Advance(state, k1, 0.5 * dt), tau);
  const Derivative k3 = Evaluate(p, Advance(state, k2, 0.5 * dt), tau);
  const Derivative k4 = Evaluate(p, Advance(state, k3, dt), tau);
  JointState next;
  next.theta = state.theta + dt / 6.0 *
                   (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  next.omega = state.omega + dt / 6.0 *
                   (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
  return next;
}

double KineticEnergy(const LegParams& p, const JointState& s) {
  const double l1 = p.l1(), l2 = p.l2();
  const double w1 = s.omega(0), w2 = s.omega(1);
  const double c12 = std::cos(s.theta(0) - s.theta(1));
  return 0.125 * p.mc1() * l1 * l1 * w1 * w1 + 0.5 * p.Ic1() * w1 * w1 +
         0.5 * p.m2() * l1 * l1 * w1 * w1 +
         0.5 * p.mc2() *
             (l1 * l1 * w1 * w1 + 0.25 * l2 * l2 * w2 * w2 + l1 * l2 * w1 * w2 * c12) +
         0.5 * p.Ic2() * w2 * w2;
}

double PotentialEnergy(const LegParams& p, const JointVector& theta) {
  const double g = p.g();
  const double c1 = std::cos(theta(0)), c2 = std::cos(theta(1));
  return -p.m2() * g * p.l1() * c1 - 0.5 * p.mc1() * g * p.l1() * c1 -
         p.mc2() * g * p.l1() * c1 - 0.5 * p.mc2() * g * p.l2() * c2;
}

}  // namespace gaitrep
