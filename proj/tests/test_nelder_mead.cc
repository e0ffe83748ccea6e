#include <cmath>

#include <gtest/gtest.h>

#include "gaitrep/errors.h"
#include "gaitrep/nelder_mead.h"

namespace gaitrep {
namespace {

using Eigen::VectorXd;

double Rosenbrock(const VectorXd& x) {
  return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
}

TEST(NelderMead, FindsRosenbrockMinimum) {
  const auto r = MinimizeInBox(Rosenbrock, VectorXd{{-1.2, 1.0}}, VectorXd{{-5, -5}},
                               VectorXd{{5, 5}}, {});
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), 1.0, 1e-6);
  EXPECT_LT(r.f, 1e-12);
}

TEST(NelderMead, StopsOnActiveBound) {
  // Unconstrained minimum at (3, -2) lies outside the box.
  const auto f = [](const VectorXd& x) {
    return std::pow(x(0) - 3, 2) + std::pow(x(1) + 2, 2);
  };
  const auto r = MinimizeInBox(f, VectorXd{{0, 0}}, VectorXd{{-1, -1}}, VectorXd{{1, 1}}, {});
  EXPECT_NEAR(r.x(0), 1.0, 1e-8);
  EXPECT_NEAR(r.x(1), -1.0, 1e-8);
}

TEST(NelderMead, TraceNeverIncreasesAndPointsStayFeasible) {
  VectorXd lo{{-1, -1, -1}}, hi{{2, 0.5, 1}};
  bool feasible = true;
  const auto f = [&](const VectorXd& x) {
    feasible = feasible && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    return std::abs(x(0) - 0.3) + (x(1) - 1) * (x(1) - 1) + std::cos(3 * x(2));
  };
  const auto r = MinimizeInBox(f, VectorXd{{0, 0, 0}}, lo, hi, {});
  EXPECT_TRUE(feasible);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  EXPECT_DOUBLE_EQ(r.trace.back(), r.f);
}

TEST(NelderMead, HoldsFixedCoordinates) {
  const auto f = [](const VectorXd& x) { return (x - VectorXd{{1, 2, 3}}).squaredNorm(); };
  const auto r = MinimizeInBox(f, VectorXd{{0, 0.5, 0}}, VectorXd{{-5, 0.5, -5}},
                               VectorXd{{5, 0.5, 5}}, {});
  EXPECT_DOUBLE_EQ(r.x(1), 0.5);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(2), 3.0, 1e-6);
}

TEST(NelderMead, BudgetIsRespected) {
  NelderMeadOptions o;
  o.max_evaluations = 50;
  const auto r = MinimizeInBox(Rosenbrock, VectorXd{{-1.2, 1.0}}, VectorXd{{-5, -5}},
                               VectorXd{{5, 5}}, o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 50 + 3);
}

TEST(NelderMead, RejectsInvertedBox) {
  EXPECT_THROW(MinimizeInBox(Rosenbrock, VectorXd{{0, 0}}, VectorXd{{1, 0}}, VectorXd{{0, 1}}, {}),
               InfeasibleBounds);
  EXPECT_THROW(MinimizeInBox(Rosenbrock, VectorXd{{0}}, VectorXd{{1, 0}}, VectorXd{{0, 1}}, {}),
               ValidationError);
}

}  // namespace
}  // namespace gaitrep
