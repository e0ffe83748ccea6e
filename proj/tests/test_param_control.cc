#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "gaitrep/cli/report.h"
#include "gaitrep/errors.h"
#include "gaitrep/param_control.h"

namespace gaitrep {
namespace {

VelocityPlan SamplePlan() {
  return {{0.0, 0.2, 0.5, 0.8}, 0.3, {1.0, -0.5, -0.5}, {10.0, -6.0, 0.0}};
}

// Fixed two-segment plan for quick optimizer checks.
LegPlan SmallPlan() {
  const std::vector<double> nodes{0.0, 0.25, 0.5};
  LegPlan plan;
  plan.joints[0] = {nodes, 0.0, {0.8, -0.4}, {8.0, -10.0}};
  plan.joints[1] = {nodes, 0.0, {-0.6, 0.5}, {-6.0, 9.0}};
  plan.theta0 = {0.1, -0.1};
  return plan;
}

NodeSequence NodesOf(const LegPlan& plan, double dt) {
  NodeSequence n;
  n.times = plan.joints[0].nodes;
  for (const double t : n.times) n.indices.push_back(static_cast<std::size_t>(std::lround(t / dt)));
  return n;
}

GaitProfile ProfileOf(const LegPlan& plan, double dt) {
  std::vector<double> t;
  std::vector<JointVector> theta;
  const int n = static_cast<int>(std::lround(plan.Duration() / dt));
  for (int i = 0; i <= n; ++i) {
    t.push_back(i * dt);
    theta.emplace_back(EvalPlan(plan.joints[0], plan.theta0(0), t.back()).theta,
                       EvalPlan(plan.joints[1], plan.theta0(1), t.back()).theta);
  }
  return MakeProfile(std::move(t), std::move(theta));
}

TEST(Plan, SegmentsAndRampEnds) {
  const VelocityPlan v = SamplePlan();
  EXPECT_NO_THROW(v.Validate());
  EXPECT_EQ(v.segments(), v.nodes.size() - 1);
  EXPECT_NEAR(v.RampEnd(0), 0.07, 1e-15);
  EXPECT_NEAR(v.RampEnd(1), 0.45, 1e-15);
  EXPECT_DOUBLE_EQ(v.RampEnd(2), 0.5);
}

TEST(Plan, VelocityRampsThenHolds) {
  const VelocityPlan v = SamplePlan();
  EXPECT_DOUBLE_EQ(EvalVelocity(v, 0.0), 0.3);
  EXPECT_NEAR(EvalVelocity(v, 0.035), 0.65, 1e-14);
  EXPECT_NEAR(EvalVelocity(v, 0.1), 1.0, 1e-14);
  EXPECT_NEAR(EvalVelocity(v, 0.35), 0.1, 1e-14);
  EXPECT_NEAR(EvalVelocity(v, 0.7), -0.5, 1e-14);
  EXPECT_THROW(EvalVelocity(v, 0.9), OutOfDomain);
}

TEST(Plan, AngleIsTheIntegralOfVelocity) {
  // Composite Simpson on a fine grid as the oracle.
  const VelocityPlan v = SamplePlan();
  const double theta0 = -0.2;
  const int n = 8000;
  const double h = v.Duration() / n;
  double integral = 0.0;
  for (int i = 0; i < n; i += 2) {
    integral += h / 3 *
                (EvalVelocity(v, i * h) + 4 * EvalVelocity(v, (i + 1) * h) +
                 EvalVelocity(v, (i + 2) * h));
    const double t = (i + 2) * h;
    EXPECT_NEAR(EvalPlan(v, theta0, t).theta, theta0 + integral, 1e-6) << t;
  }
  // α̃ is the slope of w̃ away from the kinks.
  for (const double t : {0.03, 0.3, 0.47, 0.6}) {
    const double slope = (EvalVelocity(v, t + 1e-7) - EvalVelocity(v, t - 1e-7)) / 2e-7;
    EXPECT_NEAR(EvalPlan(v, theta0, t).alpha, slope, 1e-6) << t;
  }
}

TEST(Plan, ValidationRejectsBrokenPlans) {
  VelocityPlan v = SamplePlan();
  v.alpha[0] = 1.0;  // ramp of 0.7 s does not fit a 0.2 s segment
  EXPECT_THROW(v.Validate(), ValidationError);
  v = SamplePlan();
  v.alpha[1] = 6.0;  // wrong sign for a decrease
  EXPECT_THROW(v.Validate(), ValidationError);
  v = SamplePlan();
  v.nodes[0] = 0.1;
  EXPECT_THROW(v.Validate(), ValidationError);
  v = SamplePlan();
  v.w.pop_back();
  EXPECT_THROW(v.Validate(), ValidationError);
}

TEST(Plan, RealizeRepairsInfeasibleTargets) {
  const PlanBounds b{-2.0, 2.0, 0.0, 5.0};
  double penalty = 0.0;
  // Needs |α| >= 1/0.5 = 2 to reach w = 1; 1 is raised to 2.
  VelocityPlan v = RealizePlan({0.0, 0.5, 1.0}, 0.0, {1.0, 1.0}, {1.0, 3.0}, b, &penalty);
  EXPECT_NO_THROW(v.Validate());
  EXPECT_DOUBLE_EQ(v.alpha[0], 2.0);
  EXPECT_DOUBLE_EQ(penalty, 1.0);
  // w = -2 from 1 needs |α| = 6 > α_max: w is pulled back to 1 − 5·0.5.
  penalty = 0.0;
  v = RealizePlan({0.0, 0.5, 1.0}, 0.0, {1.0, -2.0}, {4.0, 5.0}, b, &penalty);
  EXPECT_NO_THROW(v.Validate());
  EXPECT_DOUBLE_EQ(v.w[1], -1.5);
  EXPECT_DOUBLE_EQ(v.alpha[1], -5.0);
  EXPECT_DOUBLE_EQ(penalty, 0.5);
  // Targets outside the velocity box are clipped.
  v = RealizePlan({0.0, 1.0}, 0.0, {9.0}, {5.0}, b);
  EXPECT_DOUBLE_EQ(v.w[0], 2.0);
  EXPECT_THROW(RealizePlan({0.0, 1.0}, 0.0, {1.0, 2.0}, {1.0}, b), ValidationError);
}

TEST(Plan, BoundsValidation) {
  EXPECT_THROW((PlanBounds{1, 0, 0, 5}.Validate()), InfeasibleBounds);
  EXPECT_THROW((PlanBounds{0, 1, 6, 5}.Validate()), InfeasibleBounds);
  EXPECT_THROW((PlanBounds{0, 1, -1, 5}.Validate()), InfeasibleBounds);
  EXPECT_THROW((PlanBounds{0, 1, 0, 0}.Validate()), InfeasibleBounds);
  EXPECT_NO_THROW(PlanBounds{}.Validate());
}

TEST(Plan, CostVanishesOnItsOwnTorque) {
  const LegParams p = LegParams::Reference();
  const LegPlan plan = SmallPlan();
  const TorqueReference ref = TorqueReference::FromPlan(p, plan, 1e-3);
  EXPECT_LT(PlanCost(p, plan, ref, WeightMatrix()), 1e-12);
  LegPlan other = plan;
  other.joints[0].w[1] = -0.3;
  EXPECT_GT(PlanCost(p, other, ref, WeightMatrix()), 1e-3);
  const TorqueReference shorter = TorqueReference::FromPlan(p, cli::PlantedPlan(), 1e-3);
  EXPECT_THROW(PlanCost(p, plan, shorter, WeightMatrix()), DomainMismatch);
}

TEST(Plan, CostIsWeightedRms) {
  // A constant torque offset c on the hip only gives J = sqrt(w1)·|c|.
  const LegParams p = LegParams::Reference();
  const LegPlan plan = SmallPlan();
  TorqueReference ref = TorqueReference::FromPlan(p, plan, 1e-3);
  for (JointVector& tau : ref.tau) tau(0) += 0.5;
  EXPECT_NEAR(PlanCost(p, plan, ref, WeightMatrix(Eigen::Vector2d(4, 10))), 1.0, 1e-12);
}

TEST(Plan, CommandsRoundTrip) {
  const VelocityPlan v = SamplePlan();
  const auto commands = PlanToCommands(v);
  ASSERT_EQ(commands.size(), v.segments());
  EXPECT_DOUBLE_EQ(commands[1].t0, 0.2);
  const VelocityPlan back = PlanFromCommands(commands, v.w0, v.Duration());
  EXPECT_EQ(back.nodes, v.nodes);
  EXPECT_EQ(back.w, v.w);
  EXPECT_EQ(back.alpha, v.alpha);
}

TEST(Plan, InitialPlanFollowsProfile) {
  const LegPlan plan = SmallPlan();
  const GaitProfile profile = ProfileOf(plan, 0.01);
  const NodeSequence nodes = NodesOf(plan, 0.01);
  const LegPlan init = InitialPlan(profile, nodes, PlanBounds{});
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(init.joints[j].segments(), nodes.segments());
    EXPECT_NO_THROW(init.joints[j].Validate());
  }
  EXPECT_EQ(init.theta0, plan.theta0);
}

TEST(Optimizer, RecoversSmallPlantedPlan) {
  const LegParams p = LegParams::Reference();
  const LegPlan plan = SmallPlan();
  const GaitProfile profile = ProfileOf(plan, 0.01);
  const NodeSequence nodes = NodesOf(plan, 0.01);
  const TorqueReference ref = TorqueReference::FromPlan(p, plan, 1e-3);
  const PlanBounds b;
  const LegPlan init = InitialPlan(profile, nodes, b);
  OptimizerOptions o;
  o.starts = 2;
  const OptimizationResult r = OptimizePlan(p, nodes, ref, b, WeightMatrix(), init, o);
  EXPECT_LT(r.final_cost, 1e-3 * r.initial_cost);
  for (int j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_NEAR(r.plan.joints[j].w[k], plan.joints[j].w[k], 1e-4);
      EXPECT_NEAR(r.plan.joints[j].alpha[k], plan.joints[j].alpha[k], 1e-2);
    }
  }
}

TEST(Optimizer, NeverWorseThanStartAndWithinBounds) {
  const LegParams p = LegParams::Reference();
  const GaitProfile walk = WalkProfile();
  const NodeSequence nodes = SelectNodes(walk);
  const TorqueReference ref = TorqueReference::FromProfile(p, walk);
  const PlanBounds b{-1.5, 1.5, 0.5, 12.0};
  OptimizerOptions o;
  o.starts = 2;
  o.nelder_mead.max_evaluations = 1500;
  const OptimizationResult r =
      OptimizePlan(p, nodes, ref, b, WeightMatrix(), InitialPlan(walk, nodes, b), o);
  EXPECT_LE(r.final_cost, r.initial_cost);
  EXPECT_TRUE(r.hit_max_iterations);
  for (const VelocityPlan& v : r.plan.joints) {
    EXPECT_NO_THROW(v.Validate());
    EXPECT_EQ(v.segments(), nodes.segments());
    for (std::size_t k = 0; k < v.segments(); ++k) {
      EXPECT_GE(v.w[k], b.w_min);
      EXPECT_LE(v.w[k], b.w_max);
      EXPECT_LE(std::abs(v.alpha[k]), b.alpha_max + 1e-12);
      if (v.w[k] != v.StartVelocity(k)) {
        EXPECT_GE(std::abs(v.alpha[k]), b.alpha_min - 1e-12);
      }
    }
  }
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].start == r.trace[i - 1].start) {
      EXPECT_LE(r.trace[i].cost, r.trace[i - 1].cost);
    }
  }
}

TEST(Optimizer, SeededRunsAreReproducibleAcrossScheduling) {
  const LegParams p = LegParams::Reference();
  const LegPlan plan = SmallPlan();
  const GaitProfile profile = ProfileOf(plan, 0.01);
  const NodeSequence nodes = NodesOf(plan, 0.01);
  const TorqueReference ref = TorqueReference::FromProfile(p, profile);
  const LegPlan init = InitialPlan(profile, nodes, PlanBounds{});
  OptimizerOptions o;
  o.starts = 3;
  o.seed = 42;
  o.nelder_mead.max_evaluations = 1000;
  const auto a = OptimizePlan(p, nodes, ref, PlanBounds{}, WeightMatrix(), init, o);
  o.parallel = false;
  const auto b = OptimizePlan(p, nodes, ref, PlanBounds{}, WeightMatrix(), init, o);
  EXPECT_EQ(a.final_cost, b.final_cost);
  EXPECT_EQ(a.plan.joints[0].w, b.plan.joints[0].w);
  EXPECT_EQ(a.plan.joints[1].alpha, b.plan.joints[1].alpha);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(Optimizer, RejectsInfeasibleBounds) {
  const LegParams p = LegParams::Reference();
  const LegPlan plan = SmallPlan();
  const GaitProfile profile = ProfileOf(plan, 0.01);
  const NodeSequence nodes = NodesOf(plan, 0.01);
  const TorqueReference ref = TorqueReference::FromProfile(p, profile);
  const PlanBounds bad{2.0, 1.0, 0.0, 5.0};
  EXPECT_THROW(OptimizePlan(p, nodes, ref, bad, WeightMatrix(), plan, {}), InfeasibleBounds);
}

TEST(Plan, CsvOutputs) {
  const auto dir = std::filesystem::temp_directory_path();
  const LegPlan plan = SmallPlan();
  WritePlanCsv(dir / "gaitrep_plan.csv", plan);
  WriteCommandsCsv(dir / "gaitrep_commands.csv", plan);
  std::ifstream in(dir / "gaitrep_plan.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "k,t0,w1,w2,alpha1,alpha2");
  EXPECT_EQ(first, "1,0,0.8,-0.6,8,-6");
  std::ifstream cmd(dir / "gaitrep_commands.csv");
  std::getline(cmd, header);
  EXPECT_EQ(header, "joint,k,t0,w,alpha");
}

}  // namespace
}  // namespace gaitrep
