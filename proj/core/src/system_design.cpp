#include "taskquant/system_design.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "taskquant/errors.hpp"
#include "taskquant/linalg.hpp"

namespace tq {

namespace {

using boost::multiprecision::cpp_int;

cpp_int ipow(std::uint64_t base, int exp) {
  cpp_int r = 1;
  cpp_int b = base;
  while (exp > 0) {
    if (exp & 1) r *= b;
    b *= b;
    exp >>= 1;
  }
  return r;
}

double quantizer_noise_variance(double gamma, std::uint64_t levels) {
  const double m = static_cast<double>(levels);
  return 2.0 * gamma * gamma / (3.0 * m * m);
}

}  // namespace

std::uint64_t per_quantizer_levels(int log2_total, int adc_dim) {
  if (adc_dim < 1) throw infeasible_error("per_quantizer_levels: ADC dimension must be >= 1");
  if (log2_total < 0) throw infeasible_error("per_quantizer_levels: negative bit budget");
  if (log2_total >= 62 * adc_dim)
    throw infeasible_error("per_quantizer_levels: resolution exceeds 62 bits per quantizer");
  const cpp_int budget = cpp_int(1) << log2_total;
  std::uint64_t lo = 1;
  std::uint64_t hi = (std::uint64_t{2} << (log2_total / adc_dim));  // 2^(floor+1) > answer
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (ipow(mid, adc_dim) <= budget)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

double solve_waterfill_scale(std::span<const double> singulars, double c) {
  if (!(c > 0.0)) throw numeric_error("solve_waterfill_scale: c must be positive");
  std::vector<double> s(singulars.begin(), singulars.end());
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[i - 1] + 1e-12 * std::abs(s[i - 1]))
      throw numeric_error("solve_waterfill_scale: singular values must be descending");
  while (!s.empty() && s.back() <= 0.0) s.pop_back();
  if (s.empty())
    throw numeric_error("solve_waterfill_scale: all singular values are zero");

  // With the j largest entries active the constraint is linear:
  //   c * (scale * prefix_j - j) = 1  =>  scale = (1/c + j) / prefix_j.
  // Scan j upward and keep the first candidate consistent with its own
  // active set; the left side is increasing so exactly one j works.
  double prefix = 0.0;
  for (std::size_t j = 1; j <= s.size(); ++j) {
    prefix += s[j - 1];
    const double scale = (1.0 / c + static_cast<double>(j)) / prefix;
    const bool last_active = scale * s[j - 1] > 1.0;
    const bool next_inactive = j == s.size() || scale * s[j] <= 1.0;
    if (last_active && next_inactive) return scale;
  }
  throw numeric_error("solve_waterfill_scale: no consistent active set found");
}

Eigen::MatrixXd digital_matrix_for(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                                   double gamma, std::uint64_t levels) {
  if (analog.cols() != model.obs_dim())
    throw numeric_error("digital_matrix_for: combiner width does not match observation");
  const double nv = quantizer_noise_variance(gamma, levels);
  const Eigen::MatrixXd cross = model.task_matrix() * model.sigma_x() * analog.transpose();
  Eigen::MatrixXd gram = analog * model.sigma_x() * analog.transpose();
  gram.diagonal().array() += nv;
  return gram.llt().solve(cross.transpose()).transpose();
}

double mse_for_combiner(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                        double gamma, std::uint64_t levels) {
  if (analog.cols() != model.obs_dim())
    throw numeric_error("mse_for_combiner: combiner width does not match observation");
  const double nv = quantizer_noise_variance(gamma, levels);
  const Eigen::MatrixXd cross = model.task_matrix() * model.sigma_x() * analog.transpose();
  Eigen::MatrixXd gram = analog * model.sigma_x() * analog.transpose();
  gram.diagonal().array() += nv;
  const Eigen::MatrixXd solved = gram.llt().solve(cross.transpose());
  const double recovered = (cross.array() * solved.transpose().array()).sum();
  return std::max(0.0, model.estimate_energy() - recovered);
}

double mse_for_combiner_autorange(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                                  double eta, std::uint64_t levels) {
  const Eigen::MatrixXd gram = analog * model.sigma_x() * analog.transpose();
  const double max_power = gram.diagonal().maxCoeff();
  const double gamma = std::sqrt(dynamic_range_gain(eta, levels) * max_power);
  return mse_for_combiner(analog, model, gamma, levels);
}

HardwareLimitedSystem design_optimal(const LinearTaskModel& model, int adc_dim, int log2_total,
                                     double eta) {
  const int n = static_cast<int>(model.obs_dim());
  const int k = static_cast<int>(model.task_dim());
  if (adc_dim < 1 || adc_dim > n)
    throw infeasible_error("design_optimal: ADC dimension must lie in [1, obs_dim]");
  const std::uint64_t levels = per_quantizer_levels(log2_total, adc_dim);
  if (levels < 2)
    throw infeasible_error("design_optimal: " + std::to_string(log2_total) + " bits over " +
                           std::to_string(adc_dim) + " quantizers leaves fewer than 2 levels");
  const double gain = dynamic_range_gain(eta, levels);
  const double m = static_cast<double>(levels);
  const double c = 2.0 * gain / (3.0 * m * m * static_cast<double>(adc_dim));

  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(adc_dim);
  const Eigen::VectorXd& sv = model.task_singular_values();
  for (int i = 0; i < adc_dim && i < sv.size(); ++i) sigma[i] = sv[i];

  const double scale = solve_waterfill_scale({sigma.data(), static_cast<std::size_t>(adc_dim)}, c);

  Eigen::VectorXd weight_sq(adc_dim);
  int active = 0;
  for (int i = 0; i < adc_dim; ++i) {
    weight_sq[i] = c * std::max(0.0, scale * sigma[i] - 1.0);
    if (weight_sq[i] > 0.0) ++active;
  }

  const Eigen::MatrixXd rotation = equal_diagonal_rotation(weight_sq);

  // combiner = rotation * diag(weights) * V^T * sigma_x^{-1/2}
  const Eigen::MatrixXd& v = model.right_singular_vectors();
  Eigen::MatrixXd scaled_rows =
      weight_sq.cwiseSqrt().asDiagonal() * v.leftCols(adc_dim).transpose();
  Eigen::MatrixXd analog = rotation * scaled_rows * model.inv_sqrt_sigma_x();

  const double gamma = std::sqrt(gain / static_cast<double>(adc_dim));

  const double nv = quantizer_noise_variance(gamma, levels);
  Eigen::VectorXd shrink = (weight_sq.array() + nv).inverse().matrix();
  Eigen::MatrixXd digital = model.whitened_task() * v.leftCols(adc_dim) *
                            weight_sq.cwiseSqrt().asDiagonal() * shrink.asDiagonal() *
                            rotation.transpose();

  double mse = 0.0;
  const int head = std::min(adc_dim, k);
  for (int i = 0; i < head; ++i) {
    const double s = sigma[i];
    mse += s * s / (std::max(0.0, scale * s - 1.0) + 1.0);
  }
  for (int i = adc_dim; i < k; ++i) {
    const double s = i < sv.size() ? sv[i] : 0.0;
    mse += s * s;
  }

  HardwareLimitedSystem sys;
  sys.analog = std::move(analog);
  sys.digital = std::move(digital);
  sys.quantizer = QuantizerSpec{levels, gamma, true, eta};
  sys.adc_dim = adc_dim;
  sys.log2_total_levels = log2_total;
  sys.predicted_mse = mse;
  DesignReport rep;
  rep.singular_values = sv;
  rep.waterfill_scale = scale;
  rep.weight_sq = weight_sq;
  rep.rotation = rotation;
  rep.right_vectors = v;
  rep.active_count = active;
  sys.report = std::move(rep);
  return sys;
}

int select_output_dimension(const LinearTaskModel& model, int log2_total, double eta) {
  const int rank = model.estimate_rank();
  if (rank < 1) throw numeric_error("select_output_dimension: task has rank zero");
  int best_dim = 0;
  double best_mse = 0.0;
  for (int p = 1; p <= rank; ++p) {
    std::uint64_t levels = 0;
    try {
      levels = per_quantizer_levels(log2_total, p);
    } catch (const infeasible_error&) {
      continue;
    }
    if (levels < 2) continue;
    const double mse = design_optimal(model, p, log2_total, eta).predicted_mse;
    if (best_dim == 0 || mse < best_mse) {
      best_dim = p;
      best_mse = mse;
    }
  }
  if (best_dim == 0)
    throw infeasible_error("select_output_dimension: no feasible ADC dimension for " +
                           std::to_string(log2_total) + " bits");
  return best_dim;
}

HardwareLimitedSystem design_digital_only(const LinearTaskModel& model, int log2_total,
                                          double eta) {
  const int n = static_cast<int>(model.obs_dim());
  if (log2_total < n)
    throw infeasible_error("design_digital_only: needs log2(M) >= obs_dim, got " +
                           std::to_string(log2_total) + " bits for " + std::to_string(n) +
                           " observation entries (scalar quantizers would get zero bits)");
  const std::uint64_t levels = per_quantizer_levels(log2_total, n);
  const double gain = dynamic_range_gain(eta, levels);
  const double max_var = model.sigma_x().diagonal().maxCoeff();
  const double gamma = std::sqrt(gain * max_var);
  const double nv = quantizer_noise_variance(gamma, levels);

  Eigen::MatrixXd shifted = model.sigma_x();
  shifted.diagonal().array() += nv;
  const auto llt = shifted.llt();
  Eigen::MatrixXd digital = llt.solve(model.sigma_x() * model.task_matrix().transpose()).transpose();

  // Tr(Gt^T Gt (I + sigma_x / nv)^{-1}) evaluated through the same factorization
  Eigen::MatrixXd inv_shifted_gt = llt.solve(model.whitened_task().transpose());
  const double mse = nv * (model.whitened_task().array() * inv_shifted_gt.transpose().array()).sum();

  HardwareLimitedSystem sys;
  sys.analog = Eigen::MatrixXd::Identity(n, n);
  sys.digital = std::move(digital);
  sys.quantizer = QuantizerSpec{levels, gamma, true, eta};
  sys.adc_dim = n;
  sys.log2_total_levels = log2_total;
  sys.predicted_mse = std::max(0.0, mse);
  return sys;
}

HardwareLimitedSystem design_quantize_mmse(const LinearTaskModel& model, int log2_total,
                                           double eta) {
  const int k = static_cast<int>(model.task_dim());
  const std::uint64_t levels = per_quantizer_levels(log2_total, k);
  if (levels < 2)
    throw infeasible_error("design_quantize_mmse: " + std::to_string(log2_total) +
                           " bits over " + std::to_string(k) +
                           " quantizers leaves fewer than 2 levels");
  const double gain = dynamic_range_gain(eta, levels);
  const double max_var = model.estimate_covariance().diagonal().maxCoeff();
  const double gamma = std::sqrt(gain * max_var);
  const double nv = quantizer_noise_variance(gamma, levels);

  Eigen::MatrixXd shifted = model.estimate_covariance();
  shifted.diagonal().array() += nv;
  const auto llt = shifted.llt();
  Eigen::MatrixXd digital = llt.solve(model.estimate_covariance()).transpose();

  const Eigen::MatrixXd inv_shifted_cov = llt.solve(model.estimate_covariance());
  const double mse = nv * inv_shifted_cov.trace();

  HardwareLimitedSystem sys;
  sys.analog = model.task_matrix();
  sys.digital = std::move(digital);
  sys.quantizer = QuantizerSpec{levels, gamma, true, eta};
  sys.adc_dim = k;
  sys.log2_total_levels = log2_total;
  sys.predicted_mse = std::max(0.0, mse);
  return sys;
}

bool is_mmse_quantization_optimal(const LinearTaskModel& model, double tol) {
  const Eigen::MatrixXd& cov = model.estimate_covariance();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().minCoeff() <= 1e-10 * eig.eigenvalues().maxCoeff())
    throw numeric_error("is_mmse_quantization_optimal: estimate covariance is singular");
  const double k = static_cast<double>(model.task_dim());
  Eigen::MatrixXd delta = cov;
  delta.diagonal().array() -= 1.0 / k;
  return delta.cwiseAbs().maxCoeff() <= tol;
}

namespace {
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}
}  // namespace

std::string system_to_json(const HardwareLimitedSystem& sys, const std::string& method,
                           double mmse_floor, int indent) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["method"] = method;
  doc["adc_dim"] = sys.adc_dim;
  doc["log2_m"] = sys.log2_total_levels;
  doc["m_total"] = std::exp2(static_cast<double>(sys.log2_total_levels));  // exact: power of two
  doc["m_per_quantizer"] = sys.quantizer.levels;
  doc["gamma"] = sys.quantizer.dynamic_range;
  doc["eta"] = sys.quantizer.eta;
  doc["dithered"] = sys.quantizer.dithered;
  doc["predicted_mse_to_estimate"] = sys.predicted_mse;
  doc["mmse_floor"] = mmse_floor;
  doc["predicted_mse_total"] = sys.predicted_mse + mmse_floor;
  doc["analog"] = matrix_to_json(sys.analog);
  doc["digital"] = matrix_to_json(sys.digital);
  if (sys.report) {
    nlohmann::json rep;
    rep["waterfill_scale"] = sys.report->waterfill_scale;
    rep["active_count"] = sys.report->active_count;
    rep["singular_values"] =
        std::vector<double>(sys.report->singular_values.data(),
                            sys.report->singular_values.data() + sys.report->singular_values.size());
    rep["weight_sq"] = std::vector<double>(
        sys.report->weight_sq.data(), sys.report->weight_sq.data() + sys.report->weight_sq.size());
    doc["report"] = std::move(rep);
  }
  return doc.dump(indent);
}

}  // namespace tq
