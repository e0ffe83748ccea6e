#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gaitrep {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  /// Initial simplex edge, as a fraction of each box side.
  double initial_step = 0.1;
  /// Converged when the simplex spread in f is below
  /// f_tolerance·(|f_best| + f_floor) and its edge below x_tolerance.
  double f_tolerance = 1e-12;
  double f_floor = 1e-14;
  double x_tolerance = 1e-10;
  /// Fresh simplices built around the incumbent after convergence; stops
  /// early when a restart fails to improve.
  int max_restarts = 25;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
  /// Best value after every iteration; non-increasing.
  std::vector<double> trace;
};

/// Minimizes f over the box [lower, upper] with the adaptive Nelder–Mead
/// simplex (Gao–Han coefficients). The search runs in box-normalized
/// coordinates and every trial point is clamped onto the box, so f is only
/// ever evaluated at feasible points. Coordinates with lower == upper are
/// held fixed.
NelderMeadResult MinimizeInBox(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper,
                               const NelderMeadOptions& options = {});

}  // namespace gaitrep
