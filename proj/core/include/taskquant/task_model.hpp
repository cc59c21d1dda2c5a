#pragma once

#include <Eigen/Core>

namespace tq {

/// Joint second-order description of an estimation task whose MMSE estimate
/// is linear in the observation: estimate = task_matrix * x. Everything the
/// design and bound computations need is precomputed here once.
class LinearTaskModel {
 public:
  LinearTaskModel() = default;  // empty; populate via create()

  /// sigma_x: observation covariance (n x n, SPD);
  /// task_matrix: k x n linear MMSE matrix;
  /// mmse_floor: estimation error no quantizer can remove.
  static LinearTaskModel create(Eigen::MatrixXd sigma_x, Eigen::MatrixXd task_matrix,
                                double mmse_floor = 0.0);

  [[nodiscard]] Eigen::Index obs_dim() const { return sigma_x_.rows(); }
  [[nodiscard]] Eigen::Index task_dim() const { return task_matrix_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& sigma_x() const { return sigma_x_; }
  [[nodiscard]] const Eigen::MatrixXd& task_matrix() const { return task_matrix_; }
  [[nodiscard]] const Eigen::MatrixXd& sqrt_sigma_x() const { return sqrt_sigma_x_; }
  [[nodiscard]] const Eigen::MatrixXd& inv_sqrt_sigma_x() const { return inv_sqrt_sigma_x_; }

  /// task_matrix * sigma_x^{1/2} (the whitened task matrix).
  [[nodiscard]] const Eigen::MatrixXd& whitened_task() const { return whitened_task_; }
  /// Singular values of the whitened task matrix, descending, length min(k, n).
  [[nodiscard]] const Eigen::VectorXd& task_singular_values() const { return singulars_; }
  /// Full n x n right singular vector matrix of the whitened task matrix.
  [[nodiscard]] const Eigen::MatrixXd& right_singular_vectors() const { return right_vectors_; }
  /// Covariance of the MMSE estimate (k x k).
  [[nodiscard]] const Eigen::MatrixXd& estimate_covariance() const { return estimate_cov_; }
  /// Numerical rank of the estimate covariance (singular values above
  /// 1e-10 * largest).
  [[nodiscard]] int estimate_rank() const { return estimate_rank_; }
  [[nodiscard]] double mmse_floor() const { return mmse_floor_; }
  /// Total variance of the MMSE estimate, trace of estimate_covariance().
  [[nodiscard]] double estimate_energy() const { return estimate_energy_; }

 private:
  Eigen::MatrixXd sigma_x_, task_matrix_;
  Eigen::MatrixXd sqrt_sigma_x_, inv_sqrt_sigma_x_;
  Eigen::MatrixXd whitened_task_;
  Eigen::VectorXd singulars_;
  Eigen::MatrixXd right_vectors_;
  Eigen::MatrixXd estimate_cov_;
  int estimate_rank_ = 0;
  double mmse_floor_ = 0.0;
  double estimate_energy_ = 0.0;
};

}  // namespace tq
