#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gaitrep/dynamics.h"
#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

constexpr double kPi = 3.14159265358979323846;

JointVector RandomAngles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  return {u(rng), u(rng)};
}

// ∂²T/∂ω∂ω by polarization of the kinetic energy, which is quadratic in ω.
Eigen::Matrix2d MassFromEnergy(const LegParams& p, const JointVector& theta) {
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const JointVector ei = JointVector::Unit(i), ej = JointVector::Unit(j);
      m(i, j) = KineticEnergy(p, {theta, ei + ej}) - KineticEnergy(p, {theta, ei}) -
                KineticEnergy(p, {theta, ej});
    }
  }
  return m;
}

// τ = d/dt(∂L/∂ω) − ∂L/∂θ from the energies alone, with central
// differences in θ.
JointVector EulerLagrangeTorque(const LegParams& p, const JointVector& theta,
                                const JointVector& omega, const JointVector& alpha) {
  const double h = 1e-6;
  // d/dt (M ω) = M α + (dM/dt) ω, dM/dt along θ̇ = ω.
  const Eigen::Matrix2d m = MassFromEnergy(p, theta);
  const Eigen::Matrix2d mdot =
      (MassFromEnergy(p, theta + h * omega) - MassFromEnergy(p, theta - h * omega)) / (2 * h);
  JointVector dT, dV;
  for (int i = 0; i < 2; ++i) {
    const JointVector e = h * JointVector::Unit(i);
    dT(i) = (KineticEnergy(p, {theta + e, omega}) - KineticEnergy(p, {theta - e, omega})) / (2 * h);
    dV(i) = (PotentialEnergy(p, theta + e) - PotentialEnergy(p, theta - e)) / (2 * h);
  }
  return m * alpha + mdot * omega - dT + dV;
}

TEST(Dynamics, ReferenceConstants) {
  const LegParams p = LegParams::Reference();
  EXPECT_DOUBLE_EQ(p.l1(), 0.251);
  EXPECT_DOUBLE_EQ(p.l2(), 0.28);
  EXPECT_DOUBLE_EQ(p.m1(), 0.876);
  EXPECT_DOUBLE_EQ(p.m2(), 0.876);
  EXPECT_DOUBLE_EQ(p.mc1(), 2.89);
  EXPECT_DOUBLE_EQ(p.mc2(), 3.242);
  EXPECT_DOUBLE_EQ(p.g(), 9.81);
}

TEST(Dynamics, RejectsNonPositiveParameters) {
  EXPECT_THROW(LegParams(0.251, 0.28, 0.876, 0.876, 2.89, 0.0), ValidationError);
  EXPECT_THROW(LegParams(-1, 0.28, 0.876, 0.876, 2.89, 3.0), ValidationError);
  EXPECT_THROW(LegParams(0.251, 0.28, 0.876, 0.876, 2.89, NAN), ValidationError);
}

TEST(Dynamics, SincIsSmoothThroughZero) {
  EXPECT_DOUBLE_EQ(Sinc(0.0), 1.0);
  for (const double x : {1e-9, 5e-5, 9.9e-5, 1.01e-4, 1e-3, 0.5, 3.0}) {
    EXPECT_NEAR(Sinc(x), std::sin(x) / x, 1e-15) << x;
    EXPECT_DOUBLE_EQ(Sinc(-x), Sinc(x));
  }
}

TEST(Dynamics, MassMatrixMatchesKineticEnergy) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const JointVector theta = RandomAngles(rng);
    EXPECT_LT((MassMatrix(p, theta) - MassFromEnergy(p, theta)).norm(), 1e-12);
  }
}

TEST(Dynamics, GravityMatchesPotentialGradient) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const JointVector theta = RandomAngles(rng);
    JointVector grad;
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      const JointVector e = h * JointVector::Unit(j);
      grad(j) = (PotentialEnergy(p, theta + e) - PotentialEnergy(p, theta - e)) / (2 * h);
    }
    EXPECT_LT((GravityMatrix(p, theta) * theta - grad).norm(), 1e-7);
  }
}

TEST(Dynamics, InverseDynamicsMatchesEulerLagrange) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const JointVector theta = RandomAngles(rng);
    const JointVector omega(u(rng), u(rng)), alpha(u(rng), u(rng));
    EXPECT_LT((InverseDynamics(p, theta, omega, alpha) -
               EulerLagrangeTorque(p, theta, omega, alpha)).norm(),
              1e-6);
  }
}

TEST(Dynamics, CoriolisMakesMdotMinusTwoVSkew) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const JointVector theta = RandomAngles(rng);
    const JointVector omega(u(rng), u(rng));
    const Eigen::Matrix2d mdot =
        (MassMatrix(p, theta + h * omega) - MassMatrix(p, theta - h * omega)) / (2 * h);
    const Eigen::Matrix2d n = mdot - 2 * CoriolisMatrix(p, theta, omega);
    EXPECT_LT((n + n.transpose()).norm(), 1e-8);
  }
}

TEST(Dynamics, ForwardInverseRoundTrip) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const JointState s{RandomAngles(rng), {u(rng), u(rng)}};
    const JointVector alpha(u(rng), u(rng));
    const JointVector tau = InverseDynamics(p, s.theta, s.omega, alpha);
    EXPECT_LT((ForwardDynamics(p, s, tau) - alpha).norm(), 1e-10);
  }
}

TEST(Dynamics, MassMatrixIsSymmetricPositiveDefinite) {
  const LegParams p = LegParams::Reference();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix2d m = MassMatrix(p, RandomAngles(rng));
    EXPECT_DOUBLE_EQ(m(0, 1), m(1, 0));
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Dynamics, FreeMotionConservesEnergy) {
  const LegParams p = LegParams::Reference();
  JointState s{{0.1, 0.1}, {0.0, 0.0}};
  const double e0 = KineticEnergy(p, s) + PotentialEnergy(p, s.theta);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = Rk4Step(p, s, JointVector::Zero(), 1e-3);
    const double e = KineticEnergy(p, s) + PotentialEnergy(p, s.theta);
    worst = std::max(worst, std::abs(e - e0) / std::abs(e0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Dynamics, PowerBalanceUnderTorque) {
  // dE/dt = τ·ω, integrated with the trapezoidal rule over short steps.
  const LegParams p = LegParams::Reference();
  const JointVector tau(0.7, -0.4);
  JointState s{{0.3, -0.2}, {0.5, 0.1}};
  double e = KineticEnergy(p, s) + PotentialEnergy(p, s.theta);
  double work = 0.0;
  const double dt = 1e-4;
  for (int k = 0; k < 2000; ++k) {
    const JointState next = Rk4Step(p, s, tau, dt);
    work += 0.5 * dt * (tau.dot(s.omega) + tau.dot(next.omega));
    s = next;
  }
  const double e1 = KineticEnergy(p, s) + PotentialEnergy(p, s.theta);
  EXPECT_NEAR(e1 - e, work, 1e-7);
}

TEST(Dynamics, Rk4IsFourthOrder) {
  const LegParams p = LegParams::Reference();
  const JointState s0{{0.4, -0.3}, {0.2, 0.6}};
  const auto run = [&](double dt) {
    JointState s = s0;
    const int n = static_cast<int>(std::lround(0.5 / dt));
    for (int k = 0; k < n; ++k) s = Rk4Step(p, s, JointVector(0.1, 0.2), dt);
    return s.theta;
  };
  const JointVector truth = run(1e-4);
  const double e1 = (run(0.02) - truth).norm();
  const double e2 = (run(0.01) - truth).norm();
  EXPECT_NEAR(e1 / e2, 16.0, 2.0);
}

TEST(Dynamics, Rk4RejectsNonPositiveStep) {
  const LegParams p = LegParams::Reference();
  EXPECT_THROW(Rk4Step(p, {}, JointVector::Zero(), 0.0), ValidationError);
  EXPECT_THROW(Rk4Step(p, {}, JointVector::Zero(), -1e-3), ValidationError);
}

}  // namespace
}  // namespace gaitrep
