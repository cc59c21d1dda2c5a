#include "taskquant/task_model.hpp"

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "taskquant/errors.hpp"
#include "taskquant/linalg.hpp"

namespace tq {

LinearTaskModel LinearTaskModel::create(Eigen::MatrixXd sigma_x, Eigen::MatrixXd task_matrix,
                                        double mmse_floor) {
  if (sigma_x.rows() != sigma_x.cols())
    throw numeric_error("LinearTaskModel: covariance not square");
  if (task_matrix.cols() != sigma_x.rows())
    throw numeric_error("LinearTaskModel: task matrix has " +
                        std::to_string(task_matrix.cols()) + " columns, expected " +
                        std::to_string(sigma_x.rows()));
  if (task_matrix.rows() > task_matrix.cols())
    throw numeric_error("LinearTaskModel: task dimension exceeds observation dimension");
  if (mmse_floor < 0.0) throw numeric_error("LinearTaskModel: negative error floor");

  LinearTaskModel m;
  m.sigma_x_ = std::move(sigma_x);
  m.task_matrix_ = std::move(task_matrix);
  m.mmse_floor_ = mmse_floor;

  auto roots = symmetric_sqrt(m.sigma_x_);
  m.sqrt_sigma_x_ = std::move(roots.sqrt);
  m.inv_sqrt_sigma_x_ = std::move(roots.inv_sqrt);
  m.whitened_task_ = m.task_matrix_ * m.sqrt_sigma_x_;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.whitened_task_,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  m.singulars_ = svd.singularValues();
  m.right_vectors_ = svd.matrixV();

  m.estimate_cov_ = m.whitened_task_ * m.whitened_task_.transpose();
  m.estimate_energy_ = m.estimate_cov_.trace();

  const double top = m.singulars_.size() > 0 ? m.singulars_[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < m.singulars_.size(); ++i)
    if (m.singulars_[i] > 1e-10 * top) ++rank;
  m.estimate_rank_ = rank;
  return m;
}

}  // namespace tq
