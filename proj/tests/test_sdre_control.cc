#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "gaitrep/errors.h"
#include "gaitrep/gait.h"
#include "gaitrep/sdre_control.h"

namespace gaitrep {
namespace {

DesiredTrajectory Follow(const GaitProfile& p) {
  return {[p](double t) { return p.At(t); }, p.Duration()};
}

TEST(Gains, ReferenceAndValidation) {
  const ControlGains g = ControlGains::Reference();
  EXPECT_EQ(g.Q.diagonal(), (Vector5d() << 500, 500, 20, 20, 1).finished());
  EXPECT_EQ(g.R.diagonal(), Eigen::Vector2d(20, 20));
  EXPECT_DOUBLE_EQ(g.eta, 1.0);
  EXPECT_NO_THROW(g.Validate());
  ControlGains bad = g;
  bad.R(1, 1) = 0.0;
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = g;
  bad.Q(0, 0) = -1.0;
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = g;
  bad.eta = 0.0;
  EXPECT_THROW(bad.Validate(), ValidationError);
}

TEST(ErrorState, StackingRoundTrip) {
  const ErrorState x{{0.1, -0.2}, {0.3, 0.4}, 0.5};
  const Vector5d s = x.Stacked();
  EXPECT_EQ(s, (Vector5d() << 0.1, -0.2, 0.3, 0.4, 0.5).finished());
  const ErrorState y = ErrorState::FromStacked(s);
  EXPECT_EQ(y.x_theta, x.x_theta);
  EXPECT_EQ(y.x_w, x.x_w);
  EXPECT_EQ(y.zeta, x.zeta);
}

TEST(Sdc, ReproducesErrorDynamics) {
  // With ζ = 1, A x + B u must equal the error derivative obtained from the
  // plant's forward dynamics under τ = τ_d + u.
  const LegParams p = LegParams::Reference();
  const ControlGains gains = ControlGains::Reference();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const JointKinematics d{{u(rng), u(rng)}, {2 * u(rng), 2 * u(rng)}, {5 * u(rng), 5 * u(rng)}};
    const ErrorState x{{0.3 * u(rng), 0.3 * u(rng)}, {u(rng), u(rng)}, 1.0};
    const JointVector control(3 * u(rng), 3 * u(rng));
    const SdcModel m = BuildSdc(p, x, d, gains);
    const Vector5d xdot = m.A * x.Stacked() + m.B * control;

    const JointVector tau_d = InverseDynamics(p, d.theta, d.omega, d.alpha);
    const JointState actual{d.theta + x.x_theta, d.omega + x.x_w};
    const JointVector acc = ForwardDynamics(p, actual, tau_d + control);
    EXPECT_LT((xdot.head<2>() - x.x_w).norm(), 1e-12);
    EXPECT_LT((xdot.segment<2>(2) - (acc - d.alpha)).norm(), 1e-9);
    EXPECT_NEAR(xdot(4), -gains.eta, 1e-15);
  }
}

TEST(Sdc, GfVanishesOnThePath) {
  const LegParams p = LegParams::Reference();
  const JointKinematics d{{0.3, -0.4}, {1.0, 2.0}, {3.0, -1.0}};
  EXPECT_LT(GfTerm(p, {d.theta, d.omega}, d).norm(), 1e-15);
}

TEST(Sdc, FeedbackIsRiccatiGain) {
  const LegParams p = LegParams::Reference();
  const ControlGains gains = ControlGains::Reference();
  const JointKinematics d{{0.2, 0.1}, {0.5, -0.5}, {1.0, 1.0}};
  const ErrorState x{{0.05, -0.02}, {0.1, 0.0}, 0.7};
  const SdcModel m = BuildSdc(p, x, d, gains);
  const Feedback fb = SdreFeedback(m, gains, x);
  const JointVector expected =
      -gains.R.inverse() * m.B.transpose() * fb.care.P * x.Stacked();
  EXPECT_LT((fb.u - expected).norm(), 1e-12);
  EXPECT_LT(fb.care.MaxClosedLoopRealPart(), 0.0);
}

TEST(Tracking, FollowsBundledMotionsFromAnOffset) {
  const LegParams p = LegParams::Reference();
  for (const GaitProfile& profile : {WalkProfile(), SquatProfile()}) {
    SimulationOptions o;
    o.initial_angle_error = {0.02, -0.02};
    const TrackingResult r = SimulateTracking(p, Follow(profile), ControlGains::Reference(), o);
    const JointVector rmse_deg = r.AngleRmse() * 180.0 / std::numbers::pi;
    EXPECT_LT(rmse_deg.maxCoeff(), 1.0);
    EXPECT_LT(r.diagnostics.max_decomposition_residual, 1e-9);
    EXPECT_LT(r.diagnostics.max_care_residual, 1e-8);
    EXPECT_LT(r.diagnostics.max_closed_loop_real, 0.0);
    EXPECT_DOUBLE_EQ(r.t.back(), profile.Duration());
    // The error must shrink from its initial value.
    EXPECT_LT(r.x.back().head<2>().norm(), 0.1 * r.x.front().head<2>().norm());
  }
}

TEST(Tracking, HeldRiccatiSolutionStillTracks) {
  SimulationOptions o;
  o.care_every = 10;
  o.dt = 7e-4;
  const GaitProfile walk = WalkProfile();
  const TrackingResult r =
      SimulateTracking(LegParams::Reference(), Follow(walk), ControlGains::Reference(), o);
  EXPECT_LT(r.AngleRmse().maxCoeff() * 180.0 / std::numbers::pi, 1.0);
  EXPECT_DOUBLE_EQ(r.t.back(), walk.Duration());
  EXPECT_LE(r.diagnostics.care_solves, r.size() / 10 + 2);
}

TEST(Tracking, Deterministic) {
  const GaitProfile walk = WalkProfile();
  const auto a = SimulateTracking(LegParams::Reference(), Follow(walk), ControlGains::Reference());
  const auto b = SimulateTracking(LegParams::Reference(), Follow(walk), ControlGains::Reference());
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.tau, b.tau);
}

TEST(Tracking, DivergenceIsReported) {
  SimulationOptions o;
  o.initial_angle_error = {0.5, 0.5};
  o.divergence_bound = 0.1;
  EXPECT_THROW(SimulateTracking(LegParams::Reference(), Follow(WalkProfile()),
                                ControlGains::Reference(), o),
               SimulationDiverged);
  o = {};
  o.dt = 0.0;
  EXPECT_THROW(SimulateTracking(LegParams::Reference(), Follow(WalkProfile()),
                                ControlGains::Reference(), o),
               ValidationError);
}

TEST(Tracking, CsvRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "gaitrep_tracking.csv";
  const TrackingResult r =
      SimulateTracking(LegParams::Reference(), Follow(SquatProfile()), ControlGains::Reference());
  WriteTrackingCsv(path, r);
  const TrackingResult back = ReadTrackingCsv(path);
  EXPECT_EQ(back.t, r.t);
  EXPECT_EQ(back.theta, r.theta);
  EXPECT_EQ(back.tau, r.tau);
  EXPECT_EQ(back.tau_d, r.tau_d);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LT((back.theta_d[i] - r.theta_d[i]).norm(), 1e-15);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace gaitrep
