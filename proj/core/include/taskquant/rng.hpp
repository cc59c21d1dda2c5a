#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>

#include <Eigen/Core>

namespace tq {

/// Deterministic stream id: a base seed combined with an arbitrary tuple of
/// labels (method name, grid point, trial index, ...). Two streams with
/// different id tuples are statistically independent, which is what lets
/// Monte Carlo trials run on any number of threads without changing results.
class StreamId {
 public:
  explicit StreamId(std::uint64_t base_seed) : state_(mix(base_seed ^ kInit)) {}

  StreamId& with(std::uint64_t v) {
    state_ = mix(state_ ^ v);
    return *this;
  }
  StreamId& with(std::string_view label);

  [[nodiscard]] std::uint64_t value() const { return state_; }

 private:
  static constexpr std::uint64_t kInit = 0x9e3779b97f4a7c15ull;
  static std::uint64_t mix(std::uint64_t x);
  std::uint64_t state_;
};

/// One self-contained random stream. All randomness consumed inside a single
/// Monte Carlo trial must come from one RngStream so the trial is reproducible
/// in isolation.
class RngStream {
 public:
  explicit RngStream(const StreamId& id);
  explicit RngStream(std::uint64_t raw_seed);

  std::mt19937_64& engine() { return engine_; }

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform01() { return uniform_(engine_); }

  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);
  void fill_normal_matrix(Eigen::Ref<Eigen::MatrixXd> out);

  double gamma(double shape, double scale);
  /// Inverse-gamma draw with the given shape and scale parameters.
  double inverse_gamma(double shape, double scale);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Numerically stable pairwise summation. Used for all Monte Carlo
/// reductions: the result depends only on element order, never on how the
/// work was split across threads.
double pairwise_sum(std::span<const double> values);

/// Runs fn(t) for t in [0, count) split across `threads` workers
/// (0 = hardware concurrency). fn must only write to per-index state.
void parallel_for_index(std::int64_t count, int threads,
                        const std::function<void(std::int64_t)>& fn);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 95% normal-approximation confidence half-width
  std::int64_t trials = 0;
};

/// Mean and 95% CI half-width of per-trial values, pairwise-summed.
MonteCarloEstimate summarize_trials(std::span<const double> values);

}  // namespace tq
