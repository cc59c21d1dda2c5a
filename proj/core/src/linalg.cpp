#include "taskquant/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "taskquant/errors.hpp"

namespace tq {

SymmetricSqrt symmetric_sqrt(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) throw numeric_error("symmetric_sqrt: matrix not square");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw numeric_error("symmetric_sqrt: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success)
    throw numeric_error("symmetric_sqrt: eigendecomposition failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double max_eig = vals.maxCoeff();
  const double min_eig = vals.minCoeff();
  if (!(min_eig > rel_tol * max_eig) || !(max_eig > 0.0))
    throw numeric_error("symmetric_sqrt: matrix near singular (min/max eigenvalue = " +
                        std::to_string(min_eig) + " / " + std::to_string(max_eig) + ")");

  const Eigen::VectorXd root = vals.cwiseSqrt();
  SymmetricSqrt out;
  out.sqrt = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  out.inv_sqrt =
      eig.eigenvectors() * root.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

Eigen::MatrixXd equal_diagonal_rotation(const Eigen::VectorXd& d) {
  const Eigen::Index p = d.size();
  if (p == 0) throw numeric_error("equal_diagonal_rotation: empty input");
  if (d.minCoeff() < 0.0)
    throw numeric_error("equal_diagonal_rotation: input must be nonnegative");
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(p, p);
  if (p == 1) return u;

  Eigen::MatrixXd t = d.asDiagonal();
  const double trace = d.sum();
  const double tol = 1e-10 * std::max(trace, 1e-300);
  // range halves roughly once per rotation; the cap is far above what any
  // p <= a few hundred needs
  const long max_rotations = 64 * static_cast<long>(p) * static_cast<long>(p) + 64;

  for (long iter = 0; iter < max_rotations; ++iter) {
    Eigen::Index hi = 0, lo = 0;
    t.diagonal().maxCoeff(&hi);
    t.diagonal().minCoeff(&lo);
    const double a = t(hi, hi);
    const double b = t(hi, lo);
    const double c = t(lo, lo);
    if (a - c <= tol) return u;
    // angle equalizing the (hi, hi) and (lo, lo) entries of G T G^T
    const double phi = 0.5 * std::atan2(a - c, -2.0 * b);
    Eigen::JacobiRotation<double> rot(std::cos(phi), std::sin(phi));
    t.applyOnTheLeft(hi, lo, rot);
    t.applyOnTheRight(hi, lo, rot.transpose());
    u.applyOnTheLeft(hi, lo, rot);
  }
  throw numeric_error("equal_diagonal_rotation: did not converge");
}

}  // namespace tq
