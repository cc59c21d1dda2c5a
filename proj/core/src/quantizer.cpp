#include "taskquant/quantizer.hpp"

#include <cmath>
#include <string>

#include "taskquant/errors.hpp"

namespace tq {

double dynamic_range_gain(double eta, std::uint64_t levels) {
  if (!(eta > 0.0)) throw numeric_error("dynamic_range_gain: eta must be positive");
  const double m = static_cast<double>(levels);
  if (!(eta < std::sqrt(3.0) * m))
    throw infeasible_error("dynamic_range_gain: eta = " + std::to_string(eta) +
                           " must be below sqrt(3)*levels = " +
                           std::to_string(std::sqrt(3.0) * m));
  return eta * eta / (1.0 - eta * eta / (3.0 * m * m));
}

void QuantizerSpec::validate() const {
  if (levels < 2) throw infeasible_error("QuantizerSpec: need at least 2 levels");
  if (!(dynamic_range > 0.0) || !std::isfinite(dynamic_range))
    throw numeric_error("QuantizerSpec: dynamic range must be positive and finite");
  if (!(eta > 0.0) || !(eta < std::sqrt(3.0) * static_cast<double>(levels)))
    throw infeasible_error("QuantizerSpec: eta out of range (0, sqrt(3)*levels)");
}

double uniform_quantize(double y, const QuantizerSpec& spec) {
  if (!std::isfinite(y)) throw numeric_error("uniform_quantize: non-finite input");
  const double range = spec.dynamic_range;
  const double step = spec.spacing();
  // out-of-range inputs saturate at the outermost codebook point
  if (std::abs(y) > range) return spec.level(y > 0.0 ? spec.levels - 1 : 0);
  // half-open cells [l*step - range, (l+1)*step - range); y == +range joins
  // the top cell so the map stays total and monotone
  double idx = std::floor((y + range) / step);
  const double top = static_cast<double>(spec.levels - 1);
  if (idx > top) idx = top;
  if (idx < 0.0) idx = 0.0;
  return spec.level(static_cast<std::uint64_t>(idx));
}

Eigen::VectorXd serial_quantize(const Eigen::VectorXd& v, const QuantizerSpec& spec,
                                RngStream& rng) {
  spec.validate();
  Eigen::VectorXd out(v.size());
  const double half_step = 0.5 * spec.spacing();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double y = v[i];
    if (spec.dithered) {
      // uniform on (-step/2, step/2]: negate a [a, b) draw
      const double u = -half_step + spec.spacing() * rng.uniform01();
      y += -u;
    }
    out[i] = uniform_quantize(y, spec);
  }
  return out;
}

}  // namespace tq
