#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Core>

#include "taskquant/rng.hpp"
#include "taskquant/task_model.hpp"

namespace tq {

/// Eigendecomposition of a Gaussian covariance: eigenvalues descending,
/// orthonormal basis columns in matching order.
struct GaussianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd basis;

  static GaussianSpectrum from_covariance(const Eigen::MatrixXd& cov);
  /// Throws numeric_error on negative eigenvalues, wrong ordering, or a
  /// basis that is not orthonormal within 1e-12.
  void validate() const;
};

struct RateDistortionPoint {
  double distortion = 0.0;
  double water_level = 0.0;
};

/// Distortion-rate point of a Gaussian vector with the given covariance
/// eigenvalues at `rate_bits` total bits (reverse waterfilling). The water
/// level solves sum_i max(0, log2(lambda_i / level)) / 2 = rate.
RateDistortionPoint gaussian_distortion_rate(std::span<const double> eigenvalues,
                                             double rate_bits);
RateDistortionPoint gaussian_distortion_rate(const GaussianSpectrum& spectrum,
                                             double rate_bits);

/// Converse bound on quantizing the MMSE estimate with any vector quantizer
/// of 2^log2_m codewords: the Gaussian distortion-rate function of the
/// estimate covariance at log2_m bits.
double vector_quantizer_lower_bound(const LinearTaskModel& model, int log2_m);

/// Fills `out` with one random vector; used to plug arbitrary target /
/// codeword distributions into the random-coding bound.
using VectorSampler = std::function<void(RngStream&, Eigen::Ref<Eigen::VectorXd>)>;

struct RandomCodeOptions {
  std::int64_t trials = 10000;
  int threads = 1;
  /// Trials sharing one codebook draw. 1 = a fresh codebook every trial; the
  /// CI is always computed over independent per-codebook means.
  int codebook_block = 1;
  /// Refuse budgets whose codebook would be too large to enumerate.
  int max_log2_m = 26;
};

/// Achievable distortion of a random codebook with 2^log2_m i.i.d. codewords:
/// draws a target, a codebook, and records the minimum squared distance.
/// Target and codeword distributions are pluggable.
MonteCarloEstimate random_code_upper_bound(int dim, const VectorSampler& target,
                                           const VectorSampler& codeword, int log2_m,
                                           std::uint64_t seed, const RandomCodeOptions& opts);

/// random_code_upper_bound specialized to a linear task model: the target is
/// the MMSE estimate, codewords follow its distortion-rate optimal marginal.
MonteCarloEstimate random_code_upper_bound(const LinearTaskModel& model, int log2_m,
                                           std::uint64_t seed, const RandomCodeOptions& opts);

struct TaskIgnorantOptions {
  std::int64_t trials = 20000;
  int threads = 1;
  int codebook_block = 1;
  /// Hard cap; beyond it the closed-form approximation must be used.
  int max_log2_m = 16;
};

/// Distortion (w.r.t. the MMSE estimate) of a quantizer built to reproduce
/// the observation: random codewords from the observation's distortion-rate
/// optimal marginal, nearest-neighbor encoding, then the linear task estimate
/// applied to the quantized observation.
MonteCarloEstimate task_ignorant_empirical(const LinearTaskModel& model, int log2_m,
                                           std::uint64_t seed, const TaskIgnorantOptions& opts);

/// Closed-form stand-in for task_ignorant_empirical: replaces the quantizer
/// output covariance with the distortion-rate optimal output covariance of
/// the observation. Reliable for large codebooks.
double task_ignorant_approx(const LinearTaskModel& model, int log2_m);

}  // namespace tq
