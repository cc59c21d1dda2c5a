#include "taskquant/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace tq {

std::uint64_t StreamId::mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

StreamId& StreamId::with(std::string_view label) {
  // FNV-1a over the label, then mixed into the running state
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return with(h);
}

// direct 64-bit seeding; ids are already well mixed and stream construction
// sits inside per-trial loops
RngStream::RngStream(const StreamId& id) : engine_(id.value()) {}
RngStream::RngStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

void RngStream::fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal_(engine_);
}

void RngStream::fill_normal_matrix(Eigen::Ref<Eigen::MatrixXd> out) {
  // column-major fill, matching Eigen storage
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = normal_(engine_);
}

double RngStream::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

double RngStream::inverse_gamma(double shape, double scale) {
  // X ~ InvGamma(shape, scale)  <=>  X = scale / G with G ~ Gamma(shape, 1)
  return scale / gamma(shape, 1.0);
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for_index(std::int64_t count, int threads,
                        const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<std::int64_t>(workers, count));
  if (workers == 1) {
    for (std::int64_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      // contiguous slabs; indices never overlap
      const std::int64_t lo = count * w / workers;
      const std::int64_t hi = count * (w + 1) / workers;
      for (std::int64_t t = lo; t < hi; ++t) fn(t);
    });
  }
  for (auto& th : pool) th.join();
}

MonteCarloEstimate summarize_trials(std::span<const double> values) {
  MonteCarloEstimate out;
  out.trials = static_cast<std::int64_t>(values.size());
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.estimate = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - out.estimate;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / (n - 1.0);
    out.half_width = 1.959963984540054 * std::sqrt(var / n);
  }
  return out;
}

}  // namespace tq
