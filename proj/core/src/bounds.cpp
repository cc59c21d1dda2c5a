#include "taskquant/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "taskquant/errors.hpp"

namespace tq {

namespace {

double rate_at_level(std::span<const double> eigenvalues, double log2_level) {
  double rate = 0.0;
  for (double lam : eigenvalues) {
    if (lam <= 0.0) continue;
    const double term = 0.5 * (std::log2(lam) - log2_level);
    if (term > 0.0) rate += term;
  }
  return rate;
}

Eigen::VectorXd spectrum_of(const Eigen::MatrixXd& cov, Eigen::MatrixXd* basis = nullptr) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw numeric_error("spectrum_of: eigendecomposition failed");
  // descending order
  Eigen::VectorXd vals = eig.eigenvalues().reverse();
  if (basis) *basis = eig.eigenvectors().rowwise().reverse();
  return vals;
}

}  // namespace

GaussianSpectrum GaussianSpectrum::from_covariance(const Eigen::MatrixXd& cov) {
  GaussianSpectrum s;
  s.eigenvalues = spectrum_of(cov, &s.basis);
  // clamp eigendecomposition noise on PSD inputs
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0);
  return s;
}

void GaussianSpectrum::validate() const {
  if (eigenvalues.size() == 0) throw numeric_error("GaussianSpectrum: empty");
  if (eigenvalues.minCoeff() < 0.0)
    throw numeric_error("GaussianSpectrum: negative eigenvalue");
  for (Eigen::Index i = 1; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] > eigenvalues[i - 1] + 1e-12)
      throw numeric_error("GaussianSpectrum: eigenvalues not descending");
  if (basis.rows() < basis.cols() || basis.cols() != eigenvalues.size())
    throw numeric_error("GaussianSpectrum: basis shape mismatch");
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() >
      1e-12)
    throw numeric_error("GaussianSpectrum: basis not orthonormal");
}

RateDistortionPoint gaussian_distortion_rate(std::span<const double> eigenvalues,
                                             double rate_bits) {
  if (eigenvalues.empty()) throw numeric_error("gaussian_distortion_rate: empty spectrum");
  if (rate_bits < 0.0) throw numeric_error("gaussian_distortion_rate: negative rate");
  double total = 0.0, top = 0.0;
  for (double lam : eigenvalues) {
    if (lam < 0.0) throw numeric_error("gaussian_distortion_rate: negative eigenvalue");
    total += lam;
    top = std::max(top, lam);
  }
  if (total <= 0.0) throw numeric_error("gaussian_distortion_rate: zero spectrum");
  if (rate_bits == 0.0) return {total, top};

  // bisection over the log2 water level; the rate is continuous and
  // decreasing in the level
  double hi = std::log2(top);
  double lo = hi - 2.0 * rate_bits - 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at_level(eigenvalues, mid) > rate_bits)
      lo = mid;
    else
      hi = mid;
  }
  const double level = std::exp2(0.5 * (lo + hi));
  double dist = 0.0;
  for (double lam : eigenvalues) dist += std::min(lam, level);
  return {dist, level};
}

RateDistortionPoint gaussian_distortion_rate(const GaussianSpectrum& spectrum,
                                             double rate_bits) {
  spectrum.validate();
  return gaussian_distortion_rate(
      {spectrum.eigenvalues.data(), static_cast<std::size_t>(spectrum.eigenvalues.size())},
      rate_bits);
}

double vector_quantizer_lower_bound(const LinearTaskModel& model, int log2_m) {
  const Eigen::VectorXd spec = spectrum_of(model.estimate_covariance());
  return gaussian_distortion_rate({spec.data(), static_cast<std::size_t>(spec.size())},
                                  static_cast<double>(log2_m))
      .distortion;
}

MonteCarloEstimate random_code_upper_bound(int dim, const VectorSampler& target,
                                           const VectorSampler& codeword, int log2_m,
                                           std::uint64_t seed, const RandomCodeOptions& opts) {
  if (log2_m < 0 || log2_m > opts.max_log2_m)
    throw config_error("random_code_upper_bound: log2(M) = " + std::to_string(log2_m) +
                       " outside [0, " + std::to_string(opts.max_log2_m) +
                       "]; codebook too large to enumerate");
  if (opts.trials < 1) throw config_error("random_code_upper_bound: need at least one trial");
  const std::int64_t codewords = std::int64_t{1} << log2_m;
  const int block = std::max(1, opts.codebook_block);
  const std::int64_t blocks = (opts.trials + block - 1) / block;

  std::vector<double> trial_values(static_cast<std::size_t>(opts.trials));
  std::vector<double> block_means(static_cast<std::size_t>(blocks));

  parallel_for_index(blocks, opts.threads, [&](std::int64_t b) {
    const std::int64_t t_lo = b * block;
    const std::int64_t t_hi = std::min<std::int64_t>(opts.trials, t_lo + block);
    const std::int64_t in_block = t_hi - t_lo;

    // targets first, so a block is reproducible from its index alone
    Eigen::MatrixXd targets(dim, in_block);
    for (std::int64_t j = 0; j < in_block; ++j) {
      RngStream rng(StreamId(seed).with("target").with(static_cast<std::uint64_t>(t_lo + j)));
      target(rng, targets.col(j));
    }

    RngStream code_rng(StreamId(seed).with("codebook").with(static_cast<std::uint64_t>(b)));
    Eigen::VectorXd cw(dim);
    Eigen::VectorXd best =
        Eigen::VectorXd::Constant(in_block, std::numeric_limits<double>::infinity());
    for (std::int64_t i = 0; i < codewords; ++i) {
      codeword(code_rng, cw);
      for (std::int64_t j = 0; j < in_block; ++j) {
        const double d = (targets.col(j) - cw).squaredNorm();
        if (d < best[j]) best[j] = d;
      }
    }
    for (std::int64_t j = 0; j < in_block; ++j)
      trial_values[static_cast<std::size_t>(t_lo + j)] = best[j];
    block_means[static_cast<std::size_t>(b)] =
        pairwise_sum({best.data(), static_cast<std::size_t>(in_block)}) /
        static_cast<double>(in_block);
  });

  // CI over independent per-codebook means; collapses to the per-trial CI
  // when every trial draws its own codebook
  MonteCarloEstimate blockwise = summarize_trials(block_means);
  MonteCarloEstimate out;
  out.trials = opts.trials;
  out.estimate = pairwise_sum(trial_values) / static_cast<double>(opts.trials);
  out.half_width = blockwise.half_width;
  return out;
}

MonteCarloEstimate random_code_upper_bound(const LinearTaskModel& model, int log2_m,
                                           std::uint64_t seed, const RandomCodeOptions& opts) {
  const int k = static_cast<int>(model.task_dim());
  const Eigen::VectorXd spec = spectrum_of(model.estimate_covariance());
  const auto rd = gaussian_distortion_rate({spec.data(), static_cast<std::size_t>(spec.size())},
                                           static_cast<double>(log2_m));
  // distances are rotation invariant, so work in the estimate eigenbasis
  Eigen::VectorXd target_scale = spec.cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd code_scale =
      (spec.array() - rd.water_level).max(0.0).sqrt().matrix();

  VectorSampler target = [target_scale](RngStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
    rng.fill_normal(out);
    out.array() *= target_scale.array();
  };
  VectorSampler codeword = [code_scale](RngStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
    rng.fill_normal(out);
    out.array() *= code_scale.array();
  };
  return random_code_upper_bound(k, target, codeword, log2_m, seed, opts);
}

MonteCarloEstimate task_ignorant_empirical(const LinearTaskModel& model, int log2_m,
                                           std::uint64_t seed, const TaskIgnorantOptions& opts) {
  if (log2_m < 0 || log2_m > opts.max_log2_m)
    throw config_error("task_ignorant_empirical: log2(M) = " + std::to_string(log2_m) +
                       " above the enumeration cap " + std::to_string(opts.max_log2_m) +
                       "; use task_ignorant_approx instead");
  if (opts.trials < 1) throw config_error("task_ignorant_empirical: need at least one trial");

  const Eigen::Index n = model.obs_dim();
  Eigen::MatrixXd basis;
  const Eigen::VectorXd spec = spectrum_of(model.sigma_x(), &basis);
  const auto rd = gaussian_distortion_rate({spec.data(), static_cast<std::size_t>(spec.size())},
                                           static_cast<double>(log2_m));

  // everything happens in the observation eigenbasis; nearest-neighbor
  // selection only needs the coordinates where codewords have support
  Eigen::VectorXd code_var = (spec.array() - rd.water_level).max(0.0).matrix();
  Eigen::Index active = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (code_var[i] > 0.0) ++active;
  if (active == 0) active = 1;  // zero-rate code: the all-zero codeword
  const Eigen::VectorXd code_scale = code_var.head(active).cwiseSqrt();
  const Eigen::VectorXd obs_scale = spec.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd task_in_basis = model.task_matrix() * basis;  // k x n
  const Eigen::MatrixXd task_active = task_in_basis.leftCols(active);

  const std::int64_t codewords = std::int64_t{1} << log2_m;
  const int block = std::max(1, opts.codebook_block);
  const std::int64_t blocks = (opts.trials + block - 1) / block;
  const std::int64_t chunk = std::min<std::int64_t>(codewords, 4096);

  std::vector<double> trial_values(static_cast<std::size_t>(opts.trials));
  std::vector<double> block_means(static_cast<std::size_t>(blocks));

  parallel_for_index(blocks, opts.threads, [&](std::int64_t b) {
    const std::int64_t t_lo = b * block;
    const std::int64_t t_hi = std::min<std::int64_t>(opts.trials, t_lo + block);
    const std::int64_t in_block = t_hi - t_lo;

    Eigen::MatrixXd obs(n, in_block);  // observation draws, eigenbasis coords
    for (std::int64_t j = 0; j < in_block; ++j) {
      RngStream rng(StreamId(seed).with("obs").with(static_cast<std::uint64_t>(t_lo + j)));
      rng.fill_normal(obs.col(j));
      obs.col(j).array() *= obs_scale.array();
    }
    const Eigen::MatrixXd obs_active = obs.topRows(active);
    const Eigen::VectorXd obs_norms = obs_active.colwise().squaredNorm();

    RngStream code_rng(StreamId(seed).with("codebook").with(static_cast<std::uint64_t>(b)));
    Eigen::VectorXd best =
        Eigen::VectorXd::Constant(in_block, std::numeric_limits<double>::infinity());
    Eigen::MatrixXd best_code = Eigen::MatrixXd::Zero(active, in_block);

    Eigen::MatrixXd codes(active, chunk);
    Eigen::MatrixXd dots(chunk, in_block);
    Eigen::VectorXd code_norms(chunk);
    std::int64_t remaining = codewords;
    while (remaining > 0) {
      const std::int64_t m = std::min(remaining, chunk);
      remaining -= m;
      code_rng.fill_normal_matrix(codes.leftCols(m));
      codes.leftCols(m).array().colwise() *= code_scale.array();
      dots.topRows(m).noalias() = codes.leftCols(m).transpose() * obs_active;
      code_norms.head(m) = codes.leftCols(m).colwise().squaredNorm().transpose();
      for (std::int64_t j = 0; j < in_block; ++j) {
        const double* dot_col = dots.col(j).data();
        double best_j = best[j];
        std::int64_t arg = -1;
        for (std::int64_t i = 0; i < m; ++i) {
          const double d = obs_norms[j] - 2.0 * dot_col[i] + code_norms[i];
          if (d < best_j) {
            best_j = d;
            arg = i;
          }
        }
        if (arg >= 0) {
          best[j] = best_j;
          best_code.col(j) = codes.col(arg);
        }
      }
    }

    // task-domain distortion of the selected codeword; coordinates without
    // codeword support contribute their full observation energy
    for (std::int64_t j = 0; j < in_block; ++j) {
      Eigen::VectorXd err = task_in_basis * obs.col(j);
      err.noalias() -= task_active * best_code.col(j);
      const double v = err.squaredNorm();
      trial_values[static_cast<std::size_t>(t_lo + j)] = v;
    }
    block_means[static_cast<std::size_t>(b)] = pairwise_sum({&trial_values[static_cast<std::size_t>(t_lo)],
                                                             static_cast<std::size_t>(in_block)}) /
                                               static_cast<double>(in_block);
  });

  MonteCarloEstimate blockwise = summarize_trials(block_means);
  MonteCarloEstimate out;
  out.trials = opts.trials;
  out.estimate = pairwise_sum(trial_values) / static_cast<double>(opts.trials);
  out.half_width = blockwise.half_width;
  return out;
}

double task_ignorant_approx(const LinearTaskModel& model, int log2_m) {
  Eigen::MatrixXd basis;
  const Eigen::VectorXd spec = spectrum_of(model.sigma_x(), &basis);
  const auto rd = gaussian_distortion_rate({spec.data(), static_cast<std::size_t>(spec.size())},
                                           static_cast<double>(log2_m));
  const Eigen::MatrixXd task_in_basis = model.task_matrix() * basis;
  double out = 0.0;
  for (Eigen::Index i = 0; i < spec.size(); ++i)
    out += std::min(spec[i], rd.water_level) * task_in_basis.col(i).squaredNorm();
  return out;
}

}  // namespace tq
