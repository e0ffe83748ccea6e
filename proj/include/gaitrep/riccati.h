#pragma once

#include <Eigen/Dense>

namespace gaitrep {

/// Data of the continuous algebraic Riccati equation
///   PA + AᵀP − PBR⁻¹BᵀP + Q = 0.
struct CareProblem {
  Eigen::MatrixXd A;  // n×n
  Eigen::MatrixXd B;  // n×m
  Eigen::MatrixXd Q;  // n×n, symmetric PSD
  Eigen::MatrixXd R;  // m×m, symmetric PD
};

struct CareSolution {
  Eigen::MatrixXd P;
  double residual_norm = 0.0;  // Frobenius norm of the CARE residual
  /// residual_norm / (‖Q‖ + ‖PA‖ + ‖AᵀP‖ + ‖PBR⁻¹BᵀP‖), Frobenius norms.
  double relative_residual = 0.0;
  Eigen::VectorXcd closed_loop_eigs;  // eig(A − BR⁻¹BᵀP)
  int newton_iterations = 0;

  double MaxClosedLoopRealPart() const;
};

struct CareOptions {
  int max_newton_iterations = 20;
  /// Solutions whose relative residual stays above this are reported as
  /// NumericalFailure.
  double residual_tolerance = 1e-8;
};

/// Returns the unique stabilizing solution of the CARE.
///
/// The stable invariant subspace of the Hamiltonian
///   H = [A, −BR⁻¹Bᵀ; −Q, −Aᵀ]
/// is taken from a complex Schur form reordered so that the n eigenvalues
/// with negative real part lead; P = X₂₁X₁₁⁻¹ is then polished with
/// Newton–Kleinman steps.
///
/// Throws ValidationError on malformed input, NotStabilizable when no
/// stabilizing solution exists, NumericalFailure when the decomposition
/// or the refinement does not reach the residual tolerance.
CareSolution SolveCare(const CareProblem& problem, const CareOptions& options = {});

/// Newton–Kleinman iteration started from `initial`, which must make
/// A − BR⁻¹BᵀP Hurwitz.
CareSolution RefineCare(const CareProblem& problem, const Eigen::MatrixXd& initial,
                        const CareOptions& options = {});

double CareResidualNorm(const CareProblem& problem, const Eigen::MatrixXd& P);

/// Solves AᵀX + XA + C = 0 (Bartels–Stewart on the complex Schur form of A).
/// A must have no pair of eigenvalues summing to zero.
Eigen::MatrixXd SolveLyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

/// Hautus test: for every eigenvalue λ of A with Re(λ) ≥ −1e-10,
/// rank([A − λI, B]) must equal n.
bool HautusStabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// (A, C) detectable iff (Aᵀ, Cᵀ) stabilizable.
bool HautusDetectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

/// Symmetric PSD square root (negative eigenvalues from round-off are
/// clipped to zero).
Eigen::MatrixXd PsdSqrt(const Eigen::MatrixXd& Q);

}  // namespace gaitrep
