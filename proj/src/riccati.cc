#include "gaitrep/riccati.h"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gaitrep/errors.h"

namespace gaitrep {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Complex = std::complex<double>;

constexpr double kMarginalRealPart = -1e-10;

void Validate(const CareProblem& pr) {
  const auto n = pr.A.rows();
  const auto m = pr.B.cols();
  if (n == 0 || pr.A.cols() != n || pr.B.rows() != n || pr.Q.rows() != n ||
      pr.Q.cols() != n || pr.R.rows() != m || pr.R.cols() != m || m == 0) {
    throw ValidationError("CARE: inconsistent matrix dimensions");
  }
  if (!pr.A.allFinite() || !pr.B.allFinite() || !pr.Q.allFinite() ||
      !pr.R.allFinite()) {
    throw ValidationError("CARE: non-finite entries");
  }
  const double qscale = std::max(1.0, pr.Q.lpNorm<Eigen::Infinity>());
  if ((pr.Q - pr.Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * qscale) {
    throw ValidationError("CARE: Q must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<MatrixXd>(pr.Q, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff() < -1e-10 * qscale) {
    throw ValidationError("CARE: Q must be positive semi-definite");
  }
  const double rscale = std::max(1.0, pr.R.lpNorm<Eigen::Infinity>());
  if ((pr.R - pr.R.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * rscale) {
    throw ValidationError("CARE: R must be symmetric");
  }
  if (Eigen::LLT<MatrixXd>(pr.R).info() != Eigen::Success) {
    throw ValidationError("CARE: R must be positive definite");
  }
}

MatrixXd Symmetrized(const MatrixXd& P) { return 0.5 * (P + P.transpose()); }

// G = B R⁻¹ Bᵀ
MatrixXd InputGramian(const CareProblem& pr) {
  return pr.B * pr.R.llt().solve(pr.B.transpose());
}

MatrixXd Residual(const CareProblem& pr, const MatrixXd& G, const MatrixXd& P) {
  return P * pr.A + pr.A.transpose() * P - P * G * P + pr.Q;
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular T,
// updating the accumulated unitary U so that U T Uᴴ is preserved.
void SwapAdjacent(MatrixXcd& T, MatrixXcd& U, Eigen::Index k) {
  const Complex t11 = T(k, k);
  const Complex t22 = T(k + 1, k + 1);
  Eigen::Vector2cd v(T(k, k + 1), t22 - t11);
  const double norm = v.norm();
  if (norm == 0.0) return;
  v /= norm;
  Eigen::Matrix2cd G;
  G << v(0), -std::conj(v(1)),
       v(1), std::conj(v(0));
  T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
  T.middleCols(k, 2) = T.middleCols(k, 2) * G;
  U.middleCols(k, 2) = U.middleCols(k, 2) * G;
  T(k + 1, k) = 0.0;
}

void SolveAndFill(CareSolution& sol, const CareProblem& pr, const MatrixXd& G) {
  sol.residual_norm = Residual(pr, G, sol.P).norm();
  const MatrixXd PA = sol.P * pr.A;
  const double scale = pr.Q.norm() + 2.0 * PA.norm() + (sol.P * G * sol.P).norm();
  sol.relative_residual = scale > 0.0 ? sol.residual_norm / scale : sol.residual_norm;
  sol.closed_loop_eigs = (pr.A - G * sol.P).eigenvalues();
}

CareSolution NewtonKleinman(const CareProblem& pr, const MatrixXd& G,
                            MatrixXd P, const CareOptions& options) {
  CareSolution sol;
  MatrixXd residual = Residual(pr, G, P);
  double residual_norm = residual.norm();
  const double floor = 1e-14 * std::max(1.0, pr.Q.norm() + P.norm());
  int it = 0;
  for (; it < options.max_newton_iterations && residual_norm > floor; ++it) {
    const MatrixXd closed = pr.A - G * P;
    MatrixXd delta;
    try {
      delta = SolveLyapunov(closed, residual);
    } catch (const NumericalFailure&) {
      break;
    }
    const MatrixXd candidate = Symmetrized(P + delta);
    const MatrixXd candidate_residual = Residual(pr, G, candidate);
    const double candidate_norm = candidate_residual.norm();
    if (!(candidate_norm < residual_norm)) break;
    P = candidate;
    residual = candidate_residual;
    residual_norm = candidate_norm;
  }
  sol.P = std::move(P);
  sol.newton_iterations = it;
  SolveAndFill(sol, pr, G);
  return sol;
}

void CheckContract(const CareSolution& sol, const CareProblem& pr,
                   const CareOptions& options) {
  if (!sol.P.allFinite() || sol.MaxClosedLoopRealPart() >= 0.0) {
    if (!HautusStabilizable(pr.A, pr.B)) {
      throw NotStabilizable("CARE: (A, B) is not stabilizable");
    }
    throw NumericalFailure("CARE: solution is not stabilizing");
  }
  if (sol.relative_residual >= options.residual_tolerance) {
    throw NumericalFailure("CARE: relative residual " + std::to_string(sol.relative_residual) +
                           " above tolerance");
  }
}

}  // namespace

double CareSolution::MaxClosedLoopRealPart() const {
  if (closed_loop_eigs.size() == 0) return std::numeric_limits<double>::infinity();
  return closed_loop_eigs.real().maxCoeff();
}

double CareResidualNorm(const CareProblem& problem, const MatrixXd& P) {
  return Residual(problem, InputGramian(problem), P).norm();
}

MatrixXd SolveLyapunov(const MatrixXd& A, const MatrixXd& C) {
  const Eigen::Index n = A.rows();
  Eigen::ComplexSchur<MatrixXcd> schur(A.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw NumericalFailure("Lyapunov: Schur decomposition did not converge");
  }
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd& U = schur.matrixU();
  const MatrixXcd F = U.adjoint() * C.cast<Complex>() * U;
  // Tᴴ Y + Y T = −F with T upper triangular.
  MatrixXcd Y = MatrixXcd::Zero(n, n);
  const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex sum = F(i, j);
      for (Eigen::Index k = 0; k < i; ++k) sum += std::conj(T(k, i)) * Y(k, j);
      for (Eigen::Index k = 0; k < j; ++k) sum += Y(i, k) * T(k, j);
      const Complex denom = std::conj(T(i, i)) + T(j, j);
      if (std::abs(denom) < 1e-13 * scale) {
        throw NumericalFailure("Lyapunov: operator is singular");
      }
      Y(i, j) = -sum / denom;
    }
  }
  return Symmetrized((U * Y * U.adjoint()).real());
}

CareSolution SolveCare(const CareProblem& problem, const CareOptions& options) {
  Validate(problem);
  const Eigen::Index n = problem.A.rows();
  const MatrixXd G = InputGramian(problem);

  MatrixXd H(2 * n, 2 * n);
  H << problem.A, -G,
       -problem.Q, -problem.A.transpose();

  Eigen::ComplexSchur<MatrixXcd> schur(H.cast<Complex>());
  if (schur.info() != Eigen::Success) {
    throw NumericalFailure("CARE: Schur decomposition of the Hamiltonian failed");
  }
  MatrixXcd T = schur.matrixT();
  MatrixXcd U = schur.matrixU();

  const double axis_tol = 1e-10 * std::max(1.0, H.lpNorm<Eigen::Infinity>());
  int stable = 0;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const double re = T(k, k).real();
    if (std::abs(re) <= axis_tol) {
      if (!HautusStabilizable(problem.A, problem.B)) {
        throw NotStabilizable("CARE: (A, B) is not stabilizable");
      }
      throw NotStabilizable("CARE: Hamiltonian has eigenvalues on the imaginary axis");
    }
    if (re < 0.0) ++stable;
  }
  if (stable != n) {
    throw NumericalFailure("CARE: Hamiltonian spectrum is not split evenly");
  }

  // Bubble the stable eigenvalues to the leading block.
  for (bool swapped = true; swapped;) {
    swapped = false;
    for (Eigen::Index k = 0; k + 1 < 2 * n; ++k) {
      if (T(k, k).real() > 0.0 && T(k + 1, k + 1).real() < 0.0) {
        SwapAdjacent(T, U, k);
        swapped = true;
      }
    }
  }

  const MatrixXcd X11 = U.topLeftCorner(n, n);
  const MatrixXcd X21 = U.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<MatrixXcd> lu(X11.transpose());
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    if (!HautusStabilizable(problem.A, problem.B)) {
      throw NotStabilizable("CARE: (A, B) is not stabilizable");
    }
    throw NumericalFailure("CARE: stable subspace basis is singular");
  }
  // P = X21 X11⁻¹  ⇔  X11ᵀ Pᵀ = X21ᵀ
  const MatrixXcd Pc =
      lu.solve(X21.transpose()).transpose();
  MatrixXd P = Symmetrized(Pc.real());

  CareSolution sol = NewtonKleinman(problem, G, std::move(P), options);
  CheckContract(sol, problem, options);
  return sol;
}

CareSolution RefineCare(const CareProblem& problem, const MatrixXd& initial,
                        const CareOptions& options) {
  Validate(problem);
  if (initial.rows() != problem.A.rows() || initial.cols() != problem.A.cols()) {
    throw ValidationError("CARE: initial guess has wrong dimensions");
  }
  const MatrixXd G = InputGramian(problem);
  CareSolution sol = NewtonKleinman(problem, G, Symmetrized(initial), options);
  CheckContract(sol, problem, options);
  return sol;
}

bool HautusStabilizable(const MatrixXd& A, const MatrixXd& B) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) {
    throw ValidationError("Hautus: inconsistent matrix dimensions");
  }
  if (n == 0) return true;
  Eigen::EigenSolver<MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("Hautus: eigenvalue computation failed");
  }
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = es.eigenvalues()(i);
    if (lambda.real() < kMarginalRealPart) continue;
    MatrixXcd pencil(n, n + B.cols());
    pencil.leftCols(n) = A.cast<Complex>() - lambda * MatrixXcd::Identity(n, n);
    pencil.rightCols(B.cols()) = B.cast<Complex>();
    Eigen::JacobiSVD<MatrixXcd> svd(pencil);
    const auto& sigma = svd.singularValues();
    const double threshold =
        static_cast<double>(std::max(pencil.rows(), pencil.cols())) * eps *
        sigma(0);
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
      if (sigma(k) > threshold) ++rank;
    }
    if (rank < n) return false;
  }
  return true;
}

bool HautusDetectable(const MatrixXd& A, const MatrixXd& C) {
  return HautusStabilizable(A.transpose(), C.transpose());
}

MatrixXd PsdSqrt(const MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrized(Q));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace gaitrep
