#include "taskquant/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "taskquant/errors.hpp"

namespace tq {

ChannelScenario build_channel_scenario(int taps, int obs) {
  if (taps < 1 || obs < taps)
    throw config_error("build_channel_scenario: need 1 <= taps <= obs");
  const int k = taps, n = obs;

  Eigen::MatrixXd conv = Eigen::MatrixXd::Zero(n, k);
  for (int i = 1; i <= n; ++i) {
    for (int l = 1; l <= k; ++l) {
      const int j = i - l + 1;
      if (j >= 1)
        conv(i - 1, l - 1) = std::cos(2.0 * std::numbers::pi * j / static_cast<double>(n));
    }
  }

  Eigen::MatrixXd sigma_theta(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sigma_theta(i, j) = std::exp(-std::abs(i - j));

  Eigen::MatrixXd sigma_x = conv * sigma_theta * conv.transpose();
  sigma_x.diagonal().array() += 1.0;  // unit-variance observation noise

  const Eigen::MatrixXd cross = sigma_theta * conv.transpose();  // E{theta x^T}
  const Eigen::MatrixXd task = sigma_x.llt().solve(cross.transpose()).transpose();
  const double floor = (sigma_theta - task * cross.transpose()).trace();

  ChannelScenario s;
  s.taps = k;
  s.obs = n;
  s.conv = std::move(conv);
  s.sigma_theta = std::move(sigma_theta);
  s.chol_theta = s.sigma_theta.llt().matrixL();
  s.model = LinearTaskModel::create(std::move(sigma_x), task, std::max(0.0, floor));
  return s;
}

void sample_channel_instance(const ChannelScenario& s, RngStream& rng,
                             Eigen::VectorXd& theta, Eigen::VectorXd& x) {
  Eigen::VectorXd z(s.taps);
  rng.fill_normal(z);
  theta = s.chol_theta * z;
  x.resize(s.obs);
  rng.fill_normal(x);
  x.noalias() += s.conv * theta;
}

Eigen::VectorXd EigScenario::prior_mean() const {
  return beta.array() / (alpha.array() - 1.0);
}

Eigen::VectorXd EigScenario::prior_variance() const {
  return beta.array().square() / ((alpha.array() - 1.0).square() * (alpha.array() - 2.0));
}

EigScenario build_eig_scenario(int dim, Eigen::VectorXd alpha, Eigen::VectorXd beta, int n_x,
                               Eigen::MatrixXd basis, EigEstimatorVariant variant) {
  if (dim < 1) throw config_error("build_eig_scenario: dimension must be positive");
  if (alpha.size() != dim || beta.size() != dim)
    throw config_error("build_eig_scenario: alpha/beta length must equal the dimension");
  if ((alpha.array() <= 2.0).any())
    throw config_error("build_eig_scenario: every shape parameter must exceed 2");
  if ((beta.array() <= 0.0).any())
    throw config_error("build_eig_scenario: every scale parameter must be positive");
  if (n_x < 1) throw config_error("build_eig_scenario: need at least one sample");
  if (basis.rows() != dim || basis.cols() != dim)
    throw config_error("build_eig_scenario: basis must be k x k");
  if ((basis * basis.transpose() - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() >
      1e-12)
    throw numeric_error("build_eig_scenario: basis is not orthonormal");

  EigScenario s;
  s.dim = dim;
  s.n_x = n_x;
  s.alpha = std::move(alpha);
  s.beta = std::move(beta);
  s.basis = std::move(basis);
  s.variant = variant;
  return s;
}

EigScenario build_eig_scenario_setup1() {
  Eigen::VectorXd alpha(2), beta(2);
  alpha << 5.5, 6.5;
  beta << 8.4, 11.6;
  Eigen::MatrixXd basis(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  basis << r, r, r, -r;
  return build_eig_scenario(2, alpha, beta, 20, basis);
}

EigScenario build_eig_scenario_setup2() {
  Eigen::VectorXd alpha(4), beta(4);
  alpha << 4.0, 5.0, 6.0, 7.0;
  beta << 4.2, 6.9, 10.0, 13.4;
  return build_eig_scenario(4, alpha, beta, 60, Eigen::MatrixXd::Identity(4, 4));
}

void sample_eig_instance(const EigScenario& s, RngStream& rng, Eigen::VectorXd& theta,
                         Eigen::MatrixXd& samples) {
  theta.resize(s.dim);
  for (int i = 0; i < s.dim; ++i) theta[i] = rng.inverse_gamma(s.alpha[i], s.beta[i]);
  samples.resize(s.dim, s.n_x);
  rng.fill_normal_matrix(samples);
  samples = s.basis * theta.cwiseSqrt().asDiagonal() * samples;
}

CovariancePlan build_covariance_plan(int n_x, int m_x, int n_s) {
  if (n_x < 1 || m_x < 1 || n_s < 1)
    throw config_error("build_covariance_plan: all dimensions must be positive");
  if (n_x % n_s != 0)
    throw config_error("build_covariance_plan: set count " + std::to_string(n_s) +
                       " does not divide sample count " + std::to_string(n_x));
  CovariancePlan plan;
  plan.n_x = n_x;
  plan.m_x = m_x;
  plan.n_s = n_s;
  plan.m_s = n_x / n_s;
  plan.combiner = Eigen::MatrixXd::Zero(n_s * m_x, n_x * m_x);
  for (int p1 = 0; p1 < n_s; ++p1)
    for (int l = 0; l < plan.m_s; ++l) {
      const int p2 = p1 * plan.m_s + l;
      for (int q = 0; q < m_x; ++q) plan.combiner(p1 * m_x + q, p2 * m_x + q) = 1.0;
    }
  return plan;
}

Eigen::MatrixXd quantized_covariance(const Eigen::MatrixXd& samples, const CovariancePlan& plan,
                                     const QuantizerSpec& spec, RngStream& rng) {
  if (samples.rows() != plan.m_x || samples.cols() != plan.n_x)
    throw config_error("quantized_covariance: samples must be m_x x n_x");
  // group sums, one column per set, then one serial pass over all entries
  Eigen::MatrixXd sums(plan.m_x, plan.n_s);
  for (int l = 0; l < plan.n_s; ++l)
    sums.col(l) = samples.middleCols(l * plan.m_s, plan.m_s).rowwise().sum();
  Eigen::Map<Eigen::VectorXd> flat(sums.data(), sums.size());
  const Eigen::VectorXd quantized = serial_quantize(flat, spec, rng);
  const Eigen::Map<const Eigen::MatrixXd> zbar(quantized.data(), plan.m_x, plan.n_s);
  return (zbar * zbar.transpose()) / static_cast<double>(plan.n_x);
}

EigEstimate estimate_eigenspectrum(const Eigen::MatrixXd& r_hat, const EigScenario& s) {
  if (r_hat.rows() != s.dim || r_hat.cols() != s.dim)
    throw config_error("estimate_eigenspectrum: covariance estimate has wrong size");
  const Eigen::VectorXd projected =
      (s.basis.transpose() * (static_cast<double>(s.n_x) * r_hat) * s.basis).diagonal();
  EigEstimate out;
  out.values.resize(s.dim);
  const double half_nx = 0.5 * static_cast<double>(s.n_x);
  for (int i = 0; i < s.dim; ++i) {
    const double denom = s.variant == EigEstimatorVariant::AsPrinted
                             ? s.alpha[i] - half_nx - 1.0
                             : s.alpha[i] + half_nx - 1.0;
    if (denom == 0.0)
      throw numeric_error("estimate_eigenspectrum: zero coefficient denominator at entry " +
                          std::to_string(i));
    if (denom < 0.0) out.negative_coefficient = true;
    out.values[i] = (s.beta[i] + 0.5 * projected[i]) / denom;
  }
  return out;
}

ScenarioPreset load_preset(const std::string& name) {
  if (name == "fig5") return build_channel_scenario(2, 120);
  if (name == "fig6") return build_channel_scenario(8, 120);
  if (name == "eig-setup1") return build_eig_scenario_setup1();
  if (name == "eig-setup2") return build_eig_scenario_setup2();
  throw config_error("unknown scenario preset '" + name +
                     "' (available: fig5, fig6, eig-setup1, eig-setup2)");
}

bool is_preset_name(const std::string& name) {
  return name == "fig5" || name == "fig6" || name == "eig-setup1" || name == "eig-setup2";
}

}  // namespace tq
