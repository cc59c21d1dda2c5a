#pragma once

#include <Eigen/Core>

namespace tq {

struct SymmetricSqrt {
  Eigen::MatrixXd sqrt;      // symmetric PSD square root
  Eigen::MatrixXd inv_sqrt;  // its inverse
};

/// Symmetric square root (and inverse root) of a symmetric positive-definite
/// matrix via its eigendecomposition. Rejects inputs that are asymmetric or
/// whose smallest eigenvalue falls below rel_tol * largest.
SymmetricSqrt symmetric_sqrt(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

/// Unitary U such that U * diag(d) * U^T has all diagonal entries equal to
/// sum(d)/p within 1e-9 * sum(d). Built from pairwise plane rotations that
/// repeatedly average the current largest and smallest diagonal entries.
Eigen::MatrixXd equal_diagonal_rotation(const Eigen::VectorXd& d);

}  // namespace tq
