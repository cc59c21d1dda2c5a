#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "taskquant/rng.hpp"

namespace tq {

/// Gain linking the overload multiplier eta to the dynamic range when the
/// input variance includes the dither contribution:
///   gain = eta^2 / (1 - eta^2 / (3 levels^2)).
/// Defined (and positive) only while eta < sqrt(3) * levels.
double dynamic_range_gain(double eta, std::uint64_t levels);

/// A single scalar uniform quantizer: `levels` output points spread
/// symmetrically over [-dynamic_range, dynamic_range].
struct QuantizerSpec {
  std::uint64_t levels = 2;    // output points per scalar quantizer, >= 2
  double dynamic_range = 1.0;  // saturation amplitude, > 0
  bool dithered = true;
  double eta = 3.0;  // overload multiplier used when the range was derived

  [[nodiscard]] double spacing() const {
    return 2.0 * dynamic_range / static_cast<double>(levels);
  }
  /// Codebook point for bin index l in [0, levels).
  [[nodiscard]] double level(std::uint64_t l) const {
    return -dynamic_range + spacing() * (static_cast<double>(l) + 0.5);
  }

  /// Validates all invariants; throws infeasible_error / numeric_error.
  void validate() const;
};

/// Uniform quantization of one sample. In-range inputs map to the midpoint of
/// their half-open cell (top edge at +range included); out-of-range inputs
/// clamp to the outermost level. Output is always one of the codebook points.
double uniform_quantize(double y, const QuantizerSpec& spec);

/// Applies the same scalar quantizer to every entry of v, adding a fresh
/// dither draw uniform on (-spacing/2, spacing/2] per entry when
/// spec.dithered is set. Entries are processed in order, so the rng stream
/// fully determines the result.
Eigen::VectorXd serial_quantize(const Eigen::VectorXd& v, const QuantizerSpec& spec,
                                RngStream& rng);

}  // namespace tq
