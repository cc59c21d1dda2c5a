#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "taskquant/quantizer.hpp"
#include "taskquant/task_model.hpp"

namespace tq {

/// Largest per-quantizer resolution m with m^p <= 2^log2_total, computed in
/// exact integer arithmetic so power-of-two boundaries never round the wrong
/// way. Throws infeasible_error when the result would not fit 62 bits.
std::uint64_t per_quantizer_levels(int log2_total, int adc_dim);

/// Solves c * sum_i (scale * s_i - 1)^+ = 1 for the allocation scale, given
/// singular values s (descending, at least one positive) and c > 0. Exact
/// active-set solve; the residual of the returned root is below 1e-10.
double solve_waterfill_scale(std::span<const double> singulars, double c);

/// Diagnostics captured while deriving a combiner.
struct DesignReport {
  Eigen::VectorXd singular_values;  // of the whitened task matrix, descending
  double waterfill_scale = 0.0;     // 0 when no waterfilling was involved
  Eigen::VectorXd weight_sq;        // squared diagonal of the allocation, length p
  Eigen::MatrixXd rotation;         // p x p unitary equalizing quantizer input power
  Eigen::MatrixXd right_vectors;    // n x n right singular vectors used
  int active_count = 0;             // nonzero waterfilling weights
};

/// A complete hardware-limited system: analog combiner, per-scalar quantizer,
/// and linear digital estimator, plus its predicted distortion with respect
/// to the linear MMSE estimate.
struct HardwareLimitedSystem {
  Eigen::MatrixXd analog;   // p x n combiner
  Eigen::MatrixXd digital;  // k x p estimator
  QuantizerSpec quantizer;
  int adc_dim = 0;           // p
  int log2_total_levels = 0; // total bit budget
  double predicted_mse = 0.0;
  std::optional<DesignReport> report;
};

/// Linear MMSE estimator of the task from (A x + white noise of variance
/// 2 gamma^2 / (3 levels^2)).
Eigen::MatrixXd digital_matrix_for(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                                   double gamma, std::uint64_t levels);

/// Distortion (w.r.t. the MMSE estimate) achieved by the best linear digital
/// stage behind the given combiner and quantizer noise level.
double mse_for_combiner(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                        double gamma, std::uint64_t levels);

/// mse_for_combiner with the dynamic range derived from the combiner output:
/// gamma^2 = gain * max_l var((A x)_l), gain = dynamic_range_gain(eta, levels).
double mse_for_combiner_autorange(const Eigen::MatrixXd& analog, const LinearTaskModel& model,
                                  double eta, std::uint64_t levels);

/// The MSE-minimizing design for a fixed ADC input dimension p: SVD-aligned
/// combiner with waterfilled singular values, rotated so every scalar
/// quantizer sees the same input power.
HardwareLimitedSystem design_optimal(const LinearTaskModel& model, int adc_dim, int log2_total,
                                     double eta);

/// Exhaustive scan of design_optimal over p in [1, rank]; smallest p wins
/// ties. Dimensions whose resolution would drop below 2 levels are skipped.
int select_output_dimension(const LinearTaskModel& model, int log2_total, double eta);

/// Baseline: no analog processing (combiner = identity). Needs at least one
/// bit per observation entry.
HardwareLimitedSystem design_digital_only(const LinearTaskModel& model, int log2_total,
                                          double eta);

/// Baseline: combiner recovers the MMSE estimate directly (A = task matrix).
HardwareLimitedSystem design_quantize_mmse(const LinearTaskModel& model, int log2_total,
                                           double eta);

/// True iff quantizing the MMSE estimate is itself optimal, i.e. the estimate
/// covariance equals (1/k) I within tol (max-abs entrywise).
bool is_mmse_quantization_optimal(const LinearTaskModel& model, double tol);

/// JSON document describing a designed system (matrices row-major).
std::string system_to_json(const HardwareLimitedSystem& sys, const std::string& method,
                           double mmse_floor, int indent = 2);

}  // namespace tq
