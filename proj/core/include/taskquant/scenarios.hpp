#pragma once

#include <string>
#include <variant>

#include <Eigen/Core>

#include "taskquant/quantizer.hpp"
#include "taskquant/rng.hpp"
#include "taskquant/task_model.hpp"

namespace tq {

/// Estimation of a k-tap channel from n noisy outputs of a known training
/// sequence. theta ~ N(0, sigma_theta), x = H theta + w with unit-variance
/// white noise.
struct ChannelScenario {
  int taps = 0;          // k
  int obs = 0;           // n
  Eigen::MatrixXd conv;  // n x k convolution matrix built from the training sequence
  Eigen::MatrixXd sigma_theta;
  Eigen::MatrixXd chol_theta;  // lower Cholesky factor of sigma_theta
  LinearTaskModel model;
};

/// Training sequence cos(2*pi*i/n) for i >= 1 (zero otherwise) and channel
/// covariance exp(-|i-j|).
ChannelScenario build_channel_scenario(int taps, int obs);

void sample_channel_instance(const ChannelScenario& s, RngStream& rng,
                             Eigen::VectorXd& theta, Eigen::VectorXd& x);

enum class EigEstimatorVariant {
  AsPrinted,      // coefficient 1 / (alpha - n_x/2 - 1); can be negative
  PosteriorMean,  // coefficient 1 / (alpha + n_x/2 - 1)
};

/// Recovery of the eigenvalues of a covariance matrix with a known eigenbasis
/// from n_x conditionally Gaussian samples; each eigenvalue has an
/// inverse-gamma prior.
struct EigScenario {
  int dim = 0;   // k
  int n_x = 0;   // samples per instance
  Eigen::VectorXd alpha, beta;
  Eigen::MatrixXd basis;  // k x k orthonormal
  EigEstimatorVariant variant = EigEstimatorVariant::AsPrinted;

  [[nodiscard]] Eigen::VectorXd prior_mean() const;
  [[nodiscard]] Eigen::VectorXd prior_variance() const;
};

EigScenario build_eig_scenario(int dim, Eigen::VectorXd alpha, Eigen::VectorXd beta, int n_x,
                               Eigen::MatrixXd basis,
                               EigEstimatorVariant variant = EigEstimatorVariant::AsPrinted);
/// k=2, inverse-gamma (5.5, 8.4), (6.5, 11.6), n_x=20, 2-point orthonormal
/// transform basis.
EigScenario build_eig_scenario_setup1();
/// k=4, shapes {4,5,6,7}, scales {4.2,6.9,10,13.4}, n_x=60, identity basis.
EigScenario build_eig_scenario_setup2();

/// theta_i ~ InvGamma(alpha_i, beta_i); samples (k x n_x) conditionally
/// i.i.d. N(0, basis diag(theta) basis^T).
void sample_eig_instance(const EigScenario& s, RngStream& rng, Eigen::VectorXd& theta,
                         Eigen::MatrixXd& samples);

/// Groups n_x samples of dimension m_x into n_s sums of m_s = n_x/n_s
/// consecutive samples each; `combiner` is the explicit 0/1 matrix acting on
/// the stacked observation.
struct CovariancePlan {
  int n_x = 0, m_x = 0, n_s = 0, m_s = 0;
  Eigen::MatrixXd combiner;  // (n_s*m_x) x (n_x*m_x)
};

CovariancePlan build_covariance_plan(int n_x, int m_x, int n_s);

/// Runs the grouped sums through the serial scalar quantizer and rebuilds a
/// covariance estimate (1/n_x) * sum_l zbar_l zbar_l^T. Symmetric PSD by
/// construction.
Eigen::MatrixXd quantized_covariance(const Eigen::MatrixXd& samples, const CovariancePlan& plan,
                                     const QuantizerSpec& spec, RngStream& rng);

struct EigEstimate {
  Eigen::VectorXd values;
  bool negative_coefficient = false;  // the as-printed coefficient went negative
};

/// Eigen-spectrum estimate from a covariance estimate: per entry,
/// coeff_i * (beta_i + (basis^T (n_x R) basis)_{ii} / 2) with the coefficient
/// chosen by the scenario's estimator variant.
EigEstimate estimate_eigenspectrum(const Eigen::MatrixXd& r_hat, const EigScenario& s);

/// Named presets addressable from the CLI and sweep configs.
using ScenarioPreset = std::variant<ChannelScenario, EigScenario>;
ScenarioPreset load_preset(const std::string& name);
bool is_preset_name(const std::string& name);

}  // namespace tq
