#include "taskquant/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "taskquant/bounds.hpp"
#include "taskquant/errors.hpp"
#include "taskquant/system_design.hpp"

namespace tq {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------- config ---

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto piece = trim(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        errors_.push_back("line " + std::to_string(lineno) + ": expected key = value");
        continue;
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) {
        errors_.push_back("line " + std::to_string(lineno) + ": empty key");
        continue;
      }
      if (values_.count(key))
        errors_.push_back("duplicate key '" + key + "'");
      values_[key] = value;
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return values_.count(key) > 0;
  }
  std::string raw(const std::string& key) {
    seen_.insert(key);
    return values_.at(key);
  }

  void get(const std::string& key, std::string& out) {
    if (has(key)) out = raw(key);
  }
  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    const std::string v = raw(key);
    if (v == "true" || v == "1")
      out = true;
    else if (v == "false" || v == "0")
      out = false;
    else
      fail(key, "expected true/false");
  }
  template <typename Int>
  void get_int(const std::string& key, Int& out) {
    if (!has(key)) return;
    const std::string v = raw(key);
    Int parsed{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), parsed);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      fail(key, "expected an integer, got '" + v + "'");
    else
      out = parsed;
  }
  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    const std::string v = raw(key);
    double parsed{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), parsed);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      fail(key, "expected a number, got '" + v + "'");
    else
      out = parsed;
  }
  void get(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& piece : split_list(raw(key))) {
      int v{};
      const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      if (res.ec != std::errc() || res.ptr != piece.data() + piece.size()) {
        fail(key, "expected integer list entry, got '" + piece + "'");
        return;
      }
      out.push_back(v);
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& piece : split_list(raw(key))) {
      double v{};
      const auto res = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      if (res.ec != std::errc() || res.ptr != piece.data() + piece.size()) {
        fail(key, "expected number list entry, got '" + piece + "'");
        return;
      }
      out.push_back(v);
    }
  }
  void get(const std::string& key, std::vector<std::string>& out) {
    if (has(key)) out = split_list(raw(key));
  }

  void fail(const std::string& key, const std::string& why) {
    errors_.push_back(key + ": " + why);
  }

  void finish() {
    for (const auto& [key, value] : values_)
      if (!seen_.count(key)) errors_.push_back("unknown key '" + key + "'");
    if (!errors_.empty()) {
      std::string msg = "invalid sweep config:";
      for (const auto& e : errors_) msg += "\n  - " + e;
      throw config_error(msg);
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> seen_;
  std::vector<std::string> errors_;
};

const std::set<std::string> kChannelMethods = {
    "mmse-floor", "thm1",        "thm1-nodither",      "cor3",
    "cor3-nodither", "cor2",     "prop1-lower",        "prop1-upper",
    "task-ignorant-emp",         "task-ignorant-approx"};
const std::set<std::string> kEigMethods = {"eig-pipeline", "mmse-floor", "prior-mean",
                                           "prop1-upper"};

bool scenario_is_eig(const SweepConfig& cfg) {
  return cfg.scenario == "eig" || cfg.scenario == "eig-setup1" || cfg.scenario == "eig-setup2";
}

}  // namespace

bool is_channel_method(const std::string& name) { return kChannelMethods.count(name) > 0; }
bool is_eig_method(const std::string& name) { return kEigMethods.count(name) > 0; }

SweepConfig parse_sweep_config(const std::string& text) {
  ConfigReader reader(text);
  SweepConfig cfg;
  reader.get_int("schema_version", cfg.schema_version);
  reader.get("scenario", cfg.scenario);
  reader.get_int("channel_taps", cfg.channel_taps);
  reader.get_int("channel_obs", cfg.channel_obs);
  reader.get_int("eig_dim", cfg.eig_dim);
  reader.get_int("eig_nx", cfg.eig_nx);
  reader.get("eig_alpha", cfg.eig_alpha);
  reader.get("eig_beta", cfg.eig_beta);
  reader.get("eig_basis", cfg.eig_basis);
  reader.get("methods", cfg.methods);
  reader.get("bits", cfg.bits);
  reader.get_int("trials", cfg.trials);
  reader.get_int("trials_task_ignorant", cfg.trials_task_ignorant);
  reader.get_int("seed", cfg.seed);
  reader.get("eta", cfg.eta);
  reader.get("out", cfg.out_path);
  reader.get("format", cfg.format);
  reader.get("n_s", cfg.set_counts);
  reader.get("estimator", cfg.estimator);
  reader.get("eig_dither", cfg.eig_dither);
  reader.get_int("threads", cfg.threads);
  reader.get_int("codebook_block", cfg.codebook_block);
  reader.get_int("task_ignorant_max_bits", cfg.task_ignorant_max_bits);
  reader.get_int("random_code_max_bits", cfg.random_code_max_bits);
  reader.get("emit_wall_time", cfg.emit_wall_time);

  if (cfg.schema_version != 1) reader.fail("schema_version", "only version 1 is supported");
  const bool preset = is_preset_name(cfg.scenario);
  if (cfg.scenario.empty()) {
    reader.fail("scenario", "required");
  } else if (!preset && cfg.scenario != "channel" && cfg.scenario != "eig") {
    reader.fail("scenario",
                "expected fig5, fig6, eig-setup1, eig-setup2, channel or eig, got '" +
                    cfg.scenario + "'");
  }
  if (cfg.scenario == "channel" && (cfg.channel_taps < 1 || cfg.channel_obs < cfg.channel_taps))
    reader.fail("channel_taps/channel_obs", "custom channel needs 1 <= taps <= obs");
  if (cfg.scenario == "eig") {
    if (cfg.eig_dim < 1) reader.fail("eig_dim", "custom eig scenario needs a positive dimension");
    if (static_cast<int>(cfg.eig_alpha.size()) != cfg.eig_dim ||
        static_cast<int>(cfg.eig_beta.size()) != cfg.eig_dim)
      reader.fail("eig_alpha/eig_beta", "need exactly eig_dim entries");
    if (cfg.eig_nx < 1) reader.fail("eig_nx", "need at least one sample");
    if (cfg.eig_basis != "identity" && cfg.eig_basis != "dft2")
      reader.fail("eig_basis", "expected identity or dft2");
    if (cfg.eig_basis == "dft2" && cfg.eig_dim != 2)
      reader.fail("eig_basis", "dft2 requires eig_dim = 2");
  }

  if (cfg.methods.empty()) reader.fail("methods", "required, nonempty");
  const bool eig = scenario_is_eig(cfg);
  for (const auto& m : cfg.methods) {
    if (!is_channel_method(m) && !is_eig_method(m))
      reader.fail("methods", "unknown method '" + m + "'");
    else if (eig && !is_eig_method(m))
      reader.fail("methods", "method '" + m + "' is not defined for eigen-spectrum scenarios");
    else if (!eig && !is_channel_method(m))
      reader.fail("methods", "method '" + m + "' is not defined for channel scenarios");
  }
  if (cfg.bits.empty()) reader.fail("bits", "required, nonempty");
  for (std::size_t i = 0; i < cfg.bits.size(); ++i) {
    if (cfg.bits[i] < 1) reader.fail("bits", "every entry must be >= 1");
    if (i > 0 && cfg.bits[i] <= cfg.bits[i - 1])
      reader.fail("bits", "grid must be strictly increasing");
  }
  if (cfg.trials < 1) reader.fail("trials", "must be >= 1");
  if (cfg.trials_task_ignorant < 1) reader.fail("trials_task_ignorant", "must be >= 1");
  if (!(cfg.eta > 0.0)) reader.fail("eta", "must be positive");
  if (cfg.format != "csv" && cfg.format != "json") reader.fail("format", "expected csv or json");
  if (cfg.estimator != "as-printed" && cfg.estimator != "posterior-mean")
    reader.fail("estimator", "expected as-printed or posterior-mean");
  const bool wants_pipeline =
      std::find(cfg.methods.begin(), cfg.methods.end(), "eig-pipeline") != cfg.methods.end();
  if (wants_pipeline && cfg.set_counts.empty())
    reader.fail("n_s", "required when eig-pipeline is requested");
  for (int v : cfg.set_counts)
    if (v < 1) reader.fail("n_s", "every entry must be >= 1");
  if (cfg.threads < 0) reader.fail("threads", "must be >= 0 (0 = hardware)");
  if (cfg.codebook_block < 1) reader.fail("codebook_block", "must be >= 1");

  reader.finish();
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str());
}

ScenarioPreset load_scenario(const SweepConfig& cfg) {
  const EigEstimatorVariant variant = cfg.estimator == "posterior-mean"
                                          ? EigEstimatorVariant::PosteriorMean
                                          : EigEstimatorVariant::AsPrinted;
  ScenarioPreset preset = [&]() -> ScenarioPreset {
    if (is_preset_name(cfg.scenario)) return load_preset(cfg.scenario);
    if (cfg.scenario == "channel")
      return build_channel_scenario(cfg.channel_taps, cfg.channel_obs);
    if (cfg.scenario == "eig") {
      Eigen::VectorXd alpha =
          Eigen::Map<const Eigen::VectorXd>(cfg.eig_alpha.data(), cfg.eig_alpha.size());
      Eigen::VectorXd beta =
          Eigen::Map<const Eigen::VectorXd>(cfg.eig_beta.data(), cfg.eig_beta.size());
      Eigen::MatrixXd basis;
      if (cfg.eig_basis == "dft2") {
        basis.resize(2, 2);
        const double r = 1.0 / std::sqrt(2.0);
        basis << r, r, r, -r;
      } else {
        basis = Eigen::MatrixXd::Identity(cfg.eig_dim, cfg.eig_dim);
      }
      return build_eig_scenario(cfg.eig_dim, alpha, beta, cfg.eig_nx, basis);
    }
    throw config_error("unknown scenario '" + cfg.scenario + "'");
  }();
  if (auto* eig = std::get_if<EigScenario>(&preset)) eig->variant = variant;
  return preset;
}

// ------------------------------------------------------------- execution ---

namespace {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

SweepRecord base_record(const SweepConfig& cfg, const std::string& method, int bits) {
  SweepRecord r;
  r.method = method;
  r.log2_m = bits;
  r.seed = cfg.seed;
  return r;
}

/// Monte Carlo run of a designed system on the channel scenario. Instance
/// draws are keyed by trial index alone so every method and grid point sees
/// the same channels and noise (common random numbers); dither draws are
/// keyed by the full record identity.
void simulate_channel_design(const SweepConfig& cfg, const ChannelScenario& sc,
                             const HardwareLimitedSystem& sys, bool dithered,
                             const std::string& method, int bits, SweepRecord& rec) {
  QuantizerSpec quant = sys.quantizer;
  quant.dithered = dithered;
  const auto& model = sc.model;
  std::vector<double> total(static_cast<std::size_t>(cfg.trials));
  std::vector<double> tilde(static_cast<std::size_t>(cfg.trials));
  parallel_for_index(cfg.trials, cfg.threads, [&](std::int64_t t) {
    RngStream inst(StreamId(cfg.seed).with("instance").with(static_cast<std::uint64_t>(t)));
    Eigen::VectorXd theta, x;
    sample_channel_instance(sc, inst, theta, x);
    RngStream dither(StreamId(cfg.seed)
                         .with(method)
                         .with(static_cast<std::uint64_t>(bits))
                         .with(static_cast<std::uint64_t>(t))
                         .with("dither"));
    const Eigen::VectorXd quantized = serial_quantize(sys.analog * x, quant, dither);
    const Eigen::VectorXd estimate = sys.digital * quantized;
    total[static_cast<std::size_t>(t)] = (theta - estimate).squaredNorm();
    tilde[static_cast<std::size_t>(t)] =
        (model.task_matrix() * x - estimate).squaredNorm();
  });
  const MonteCarloEstimate mc_total = summarize_trials(total);
  const MonteCarloEstimate mc_tilde = summarize_trials(tilde);
  rec.estimate = mc_total.estimate;
  rec.ci = mc_total.half_width;
  rec.estimate_to_mmse = mc_tilde.estimate;
  rec.ci_to_mmse = mc_tilde.half_width;
  rec.trials = cfg.trials;
  if (dithered) rec.theoretical = sys.predicted_mse + model.mmse_floor();
}

SweepRecord run_channel_record(const SweepConfig& cfg, const ChannelScenario& sc,
                               const std::string& method, int bits) {
  SweepRecord rec = base_record(cfg, method, bits);
  WallTimer timer;
  const auto& model = sc.model;
  const double floor = model.mmse_floor();
  try {
    if (method == "mmse-floor") {
      rec.estimate = floor;
      rec.ci = 0.0;
      rec.theoretical = floor;
    } else if (method == "thm1" || method == "thm1-nodither") {
      const int p = select_output_dimension(model, bits, cfg.eta);
      const auto sys = design_optimal(model, p, bits, cfg.eta);
      simulate_channel_design(cfg, sc, sys, method == "thm1", method, bits, rec);
    } else if (method == "cor3" || method == "cor3-nodither") {
      const auto sys = design_quantize_mmse(model, bits, cfg.eta);
      simulate_channel_design(cfg, sc, sys, method == "cor3", method, bits, rec);
    } else if (method == "cor2") {
      const auto sys = design_digital_only(model, bits, cfg.eta);
      simulate_channel_design(cfg, sc, sys, true, method, bits, rec);
    } else if (method == "prop1-lower") {
      rec.estimate = vector_quantizer_lower_bound(model, bits) + floor;
      rec.ci = 0.0;
      rec.theoretical = rec.estimate;
    } else if (method == "prop1-upper") {
      RandomCodeOptions opts;
      opts.trials = cfg.trials;
      opts.threads = cfg.threads;
      opts.codebook_block = cfg.codebook_block;
      opts.max_log2_m = cfg.random_code_max_bits;
      const auto mc = random_code_upper_bound(
          model, bits, StreamId(cfg.seed).with(method).with(static_cast<std::uint64_t>(bits)).value(),
          opts);
      rec.estimate = mc.estimate + floor;
      rec.ci = mc.half_width;
      rec.trials = mc.trials;
    } else if (method == "task-ignorant-emp") {
      TaskIgnorantOptions opts;
      opts.trials = cfg.trials_task_ignorant;
      opts.threads = cfg.threads;
      opts.codebook_block = cfg.codebook_block;
      opts.max_log2_m = cfg.task_ignorant_max_bits;
      const auto mc = task_ignorant_empirical(
          model, bits, StreamId(cfg.seed).with(method).with(static_cast<std::uint64_t>(bits)).value(),
          opts);
      rec.estimate = mc.estimate + floor;
      rec.ci = mc.half_width;
      rec.trials = mc.trials;
    } else if (method == "task-ignorant-approx") {
      rec.estimate = task_ignorant_approx(model, bits) + floor;
      rec.ci = 0.0;
      rec.theoretical = rec.estimate;
    } else {
      throw config_error("method '" + method + "' is not defined for channel scenarios");
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.estimate = rec.ci = rec.theoretical = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_ms = timer.elapsed_ms();
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_channel_sweep(const SweepConfig& cfg, const ChannelScenario& sc) {
  std::vector<SweepRecord> records;
  records.reserve(cfg.methods.size() * cfg.bits.size());
  for (const auto& method : cfg.methods)
    for (int bits : cfg.bits) records.push_back(run_channel_record(cfg, sc, method, bits));
  return records;
}

namespace {

/// Covariance pipeline run for one (bits, n_s) grid point.
SweepRecord run_eig_pipeline_record(const SweepConfig& cfg, const EigScenario& s, int bits,
                                    int n_s) {
  SweepRecord rec = base_record(cfg, "eig-pipeline", bits);
  rec.n_s = n_s;
  WallTimer timer;
  try {
    const CovariancePlan plan = build_covariance_plan(s.n_x, s.dim, n_s);
    const int quantizers = s.dim * n_s;
    const std::uint64_t levels = per_quantizer_levels(bits, quantizers);
    if (levels < 2)
      throw infeasible_error("eig-pipeline: " + std::to_string(bits) + " bits over " +
                             std::to_string(quantizers) +
                             " quantizers leaves fewer than 2 levels");
    // dynamic range from the prior-mean input power of the grouped sums
    const Eigen::MatrixXd prior_cov =
        s.basis * s.prior_mean().asDiagonal() * s.basis.transpose();
    const double max_power = static_cast<double>(plan.m_s) * prior_cov.diagonal().maxCoeff();
    const double gamma = std::sqrt(dynamic_range_gain(cfg.eta, levels) * max_power);
    const QuantizerSpec quant{levels, gamma, cfg.eig_dither, cfg.eta};

    std::vector<double> err(static_cast<std::size_t>(cfg.trials));
    parallel_for_index(cfg.trials, cfg.threads, [&](std::int64_t t) {
      RngStream inst(StreamId(cfg.seed).with("instance").with(static_cast<std::uint64_t>(t)));
      Eigen::VectorXd theta;
      Eigen::MatrixXd samples;
      sample_eig_instance(s, inst, theta, samples);
      RngStream dither(StreamId(cfg.seed)
                           .with("eig-pipeline")
                           .with(static_cast<std::uint64_t>(bits))
                           .with(static_cast<std::uint64_t>(n_s))
                           .with(static_cast<std::uint64_t>(t))
                           .with("dither"));
      const Eigen::MatrixXd r_hat = quantized_covariance(samples, plan, quant, dither);
      const Eigen::VectorXd estimate = estimate_eigenspectrum(r_hat, s).values;
      err[static_cast<std::size_t>(t)] = (theta - estimate).squaredNorm();
    });
    const MonteCarloEstimate mc = summarize_trials(err);
    rec.estimate = mc.estimate;
    rec.ci = mc.half_width;
    rec.trials = cfg.trials;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.estimate = rec.ci = rec.theoretical = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_ms = timer.elapsed_ms();
  return rec;
}

/// Unquantized, ungrouped covariance with the posterior-mean coefficient:
/// a Monte Carlo stand-in for the estimation floor.
SweepRecord run_eig_floor_record(const SweepConfig& cfg, const EigScenario& s) {
  SweepRecord rec = base_record(cfg, "mmse-floor", 0);
  WallTimer timer;
  EigScenario exact = s;
  exact.variant = EigEstimatorVariant::PosteriorMean;
  std::vector<double> err(static_cast<std::size_t>(cfg.trials));
  parallel_for_index(cfg.trials, cfg.threads, [&](std::int64_t t) {
    RngStream inst(StreamId(cfg.seed).with("instance").with(static_cast<std::uint64_t>(t)));
    Eigen::VectorXd theta;
    Eigen::MatrixXd samples;
    sample_eig_instance(exact, inst, theta, samples);
    const Eigen::MatrixXd r_exact =
        samples * samples.transpose() / static_cast<double>(exact.n_x);
    const Eigen::VectorXd estimate = estimate_eigenspectrum(r_exact, exact).values;
    err[static_cast<std::size_t>(t)] = (theta - estimate).squaredNorm();
  });
  const MonteCarloEstimate mc = summarize_trials(err);
  rec.estimate = mc.estimate;
  rec.ci = mc.half_width;
  rec.trials = cfg.trials;
  rec.wall_ms = timer.elapsed_ms();
  return rec;
}

SweepRecord run_eig_prior_mean_record(const SweepConfig& cfg, const EigScenario& s) {
  SweepRecord rec = base_record(cfg, "prior-mean", 0);
  WallTimer timer;
  const Eigen::VectorXd mean = s.prior_mean();
  std::vector<double> err(static_cast<std::size_t>(cfg.trials));
  parallel_for_index(cfg.trials, cfg.threads, [&](std::int64_t t) {
    RngStream inst(StreamId(cfg.seed).with("instance").with(static_cast<std::uint64_t>(t)));
    Eigen::VectorXd theta;
    Eigen::MatrixXd samples;
    sample_eig_instance(s, inst, theta, samples);
    err[static_cast<std::size_t>(t)] = (theta - mean).squaredNorm();
  });
  const MonteCarloEstimate mc = summarize_trials(err);
  rec.estimate = mc.estimate;
  rec.ci = mc.half_width;
  rec.theoretical = s.prior_variance().sum();
  rec.trials = cfg.trials;
  rec.wall_ms = timer.elapsed_ms();
  return rec;
}

SweepRecord run_eig_random_code_record(const SweepConfig& cfg, const EigScenario& s, int bits) {
  SweepRecord rec = base_record(cfg, "prop1-upper", bits);
  WallTimer timer;
  try {
    RandomCodeOptions opts;
    opts.trials = cfg.trials;
    opts.threads = cfg.threads;
    opts.codebook_block = cfg.codebook_block;
    opts.max_log2_m = cfg.random_code_max_bits;
    // codewords drawn from the parameter prior itself
    const Eigen::VectorXd alpha = s.alpha, beta = s.beta;
    VectorSampler draw = [alpha, beta](RngStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
      for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = rng.inverse_gamma(alpha[i], beta[i]);
    };
    const auto mc = random_code_upper_bound(
        s.dim, draw, draw, bits,
        StreamId(cfg.seed).with("prop1-upper").with(static_cast<std::uint64_t>(bits)).value(),
        opts);
    rec.estimate = mc.estimate;
    rec.ci = mc.half_width;
    rec.trials = mc.trials;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.estimate = rec.ci = rec.theoretical = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_ms = timer.elapsed_ms();
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_eig_sweep(const SweepConfig& cfg, const EigScenario& scenario) {
  EigScenario s = scenario;
  s.variant = cfg.estimator == "posterior-mean" ? EigEstimatorVariant::PosteriorMean
                                                : EigEstimatorVariant::AsPrinted;
  std::vector<SweepRecord> records;
  for (const auto& method : cfg.methods) {
    if (method == "eig-pipeline") {
      for (int n_s : cfg.set_counts)
        for (int bits : cfg.bits) records.push_back(run_eig_pipeline_record(cfg, s, bits, n_s));
    } else if (method == "mmse-floor") {
      // independent of the bit budget; computed once and replicated per row
      SweepRecord proto = run_eig_floor_record(cfg, s);
      for (int bits : cfg.bits) {
        SweepRecord r = proto;
        r.log2_m = bits;
        records.push_back(std::move(r));
      }
    } else if (method == "prior-mean") {
      SweepRecord proto = run_eig_prior_mean_record(cfg, s);
      for (int bits : cfg.bits) {
        SweepRecord r = proto;
        r.log2_m = bits;
        records.push_back(std::move(r));
      }
    } else if (method == "prop1-upper") {
      for (int bits : cfg.bits) records.push_back(run_eig_random_code_record(cfg, s, bits));
    } else {
      for (int bits : cfg.bits) {
        SweepRecord rec = base_record(cfg, method, bits);
        rec.error = "method '" + method + "' is not defined for eigen-spectrum scenarios";
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  ScenarioPreset preset = load_scenario(cfg);
  if (auto* channel = std::get_if<ChannelScenario>(&preset))
    return run_channel_sweep(cfg, *channel);
  return run_eig_sweep(cfg, std::get<EigScenario>(preset));
}

// -------------------------------------------------------------- emission ---

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_line(const SweepRecord& r, bool include_wall) {
  std::string line = r.method;
  line += ',';
  line += std::to_string(r.log2_m);
  line += ',';
  if (r.n_s) line += std::to_string(*r.n_s);
  line += ',';
  line += format_double(r.estimate);
  line += ',';
  line += format_double(r.ci);
  line += ',';
  line += format_double(r.theoretical);
  line += ',';
  line += std::to_string(r.trials);
  line += ',';
  line += std::to_string(r.seed);
  line += ',';
  line += std::to_string(include_wall ? r.wall_ms : 0);
  return line;
}

json record_to_json(const SweepRecord& r, bool include_wall) {
  json obj;
  obj["method"] = r.method;
  obj["logM"] = r.log2_m;
  obj["n_s"] = r.n_s ? json(*r.n_s) : json(nullptr);
  obj["estimate"] = std::isnan(r.estimate) ? json(nullptr) : json(r.estimate);
  obj["ci"] = std::isnan(r.ci) ? json(nullptr) : json(r.ci);
  obj["theoretical"] = std::isnan(r.theoretical) ? json(nullptr) : json(r.theoretical);
  obj["trials"] = r.trials;
  obj["seed"] = r.seed;
  obj["wall_ms"] = include_wall ? r.wall_ms : 0;
  return obj;
}

SweepRecord record_from_json(const json& obj) {
  SweepRecord r;
  r.method = obj.at("method").get<std::string>();
  r.log2_m = obj.at("logM").get<int>();
  if (!obj.at("n_s").is_null()) r.n_s = obj.at("n_s").get<int>();
  if (!obj.at("estimate").is_null()) r.estimate = obj.at("estimate").get<double>();
  if (!obj.at("ci").is_null()) r.ci = obj.at("ci").get<double>();
  if (!obj.at("theoretical").is_null()) r.theoretical = obj.at("theoretical").get<double>();
  r.trials = obj.at("trials").get<std::int64_t>();
  r.seed = obj.at("seed").get<std::uint64_t>();
  r.wall_ms = obj.at("wall_ms").get<std::int64_t>();
  return r;
}

}  // namespace

bool same_serialized(const SweepRecord& a, const SweepRecord& b) {
  auto num_eq = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  return a.method == b.method && a.log2_m == b.log2_m && a.n_s == b.n_s &&
         num_eq(a.estimate, b.estimate) && num_eq(a.ci, b.ci) &&
         num_eq(a.theoretical, b.theoretical) && a.trials == b.trials && a.seed == b.seed;
}

void emit_results(std::span<const SweepRecord> records, const std::string& path,
                  ResultFormat format, bool include_wall_time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open output file '" + path + "'");
  if (format == ResultFormat::Csv) {
    out << "method,logM,n_s,estimate,ci,theoretical,trials,seed,wall_ms\n";
    for (const auto& r : records) out << csv_line(r, include_wall_time) << '\n';
  } else {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r, include_wall_time));
    out << arr.dump(2) << '\n';
  }
  out.flush();
  if (!out) throw io_error("failed writing results to '" + path + "'");
}

std::vector<SweepRecord> records_from_json_text(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    throw io_error(std::string("invalid results JSON: ") + e.what());
  }
  if (!arr.is_array()) throw io_error("results JSON must be an array");
  std::vector<SweepRecord> out;
  out.reserve(arr.size());
  for (const auto& obj : arr) out.push_back(record_from_json(obj));
  return out;
}

std::vector<SweepRecord> records_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open results file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return records_from_json_text(buf.str());
}

}  // namespace tq
