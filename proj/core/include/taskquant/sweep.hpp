#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taskquant/scenarios.hpp"

namespace tq {

/// Flat key-value sweep description. Parsed from `key = value` lines with
/// '#' comments; lists are comma separated. See parse_sweep_config.
struct SweepConfig {
  int schema_version = 1;
  std::string scenario;  // preset name, or "channel" / "eig" with the custom fields below
  int channel_taps = 0;
  int channel_obs = 0;
  int eig_dim = 0;
  int eig_nx = 0;
  std::vector<double> eig_alpha, eig_beta;
  std::string eig_basis = "identity";  // identity | dft2

  std::vector<std::string> methods;
  std::vector<int> bits;  // strictly increasing log2(M) grid
  std::int64_t trials = 10000;
  std::int64_t trials_task_ignorant = 20000;
  std::uint64_t seed = 1;
  double eta = 3.0;
  std::string out_path;
  std::string format = "csv";  // csv | json
  std::vector<int> set_counts;  // n_s grid for the covariance pipeline
  std::string estimator = "as-printed";  // as-printed | posterior-mean
  bool eig_dither = false;
  int threads = 1;
  int codebook_block = 1;
  int task_ignorant_max_bits = 16;
  int random_code_max_bits = 26;
  bool emit_wall_time = false;
};

/// One sweep result row. `error` is set (and the numeric fields are NaN) when
/// the (method, grid point) combination is undefined; the sweep keeps going.
struct SweepRecord {
  std::string method;
  int log2_m = 0;
  std::optional<int> n_s;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double ci = std::numeric_limits<double>::quiet_NaN();
  double theoretical = std::numeric_limits<double>::quiet_NaN();
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_ms = 0;
  std::string error;

  // in-memory diagnostics, not serialized: distortion measured against the
  // MMSE estimate instead of the true parameter (design-based methods only)
  double estimate_to_mmse = std::numeric_limits<double>::quiet_NaN();
  double ci_to_mmse = std::numeric_limits<double>::quiet_NaN();
};

/// Equality of the serialized fields (the in-memory diagnostics are ignored).
bool same_serialized(const SweepRecord& a, const SweepRecord& b);

SweepConfig parse_sweep_config(const std::string& text);
SweepConfig load_sweep_config(const std::string& path);

/// Known method names for each scenario family.
bool is_channel_method(const std::string& name);
bool is_eig_method(const std::string& name);

std::vector<SweepRecord> run_channel_sweep(const SweepConfig& cfg, const ChannelScenario& s);
std::vector<SweepRecord> run_eig_sweep(const SweepConfig& cfg, const EigScenario& s);

/// Loads the scenario a config refers to (preset or custom).
ScenarioPreset load_scenario(const SweepConfig& cfg);
/// Runs whichever sweep matches the scenario kind.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

enum class ResultFormat { Csv, Json };

/// Writes records with the fixed column order
///   method, logM, n_s, estimate, ci, theoretical, trials, seed, wall_ms.
/// Numbers are locale-independent shortest round-trip decimals. Wall times
/// are zeroed unless include_wall_time is set, keeping repeated runs of the
/// same config byte-identical.
void emit_results(std::span<const SweepRecord> records, const std::string& path,
                  ResultFormat format, bool include_wall_time = false);

std::vector<SweepRecord> records_from_json_text(const std::string& text);
std::vector<SweepRecord> records_from_json_file(const std::string& path);

}  // namespace tq
