// Command line front end: design hardware-limited quantization systems,
// simulate them, evaluate vector-quantizer bounds, and run full sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taskquant/bounds.hpp"
#include "taskquant/errors.hpp"
#include "taskquant/scenarios.hpp"
#include "taskquant/sweep.hpp"
#include "taskquant/system_design.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

int default_threads() {
  if (const char* env = std::getenv("TASKQUANT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 0) return v;
  }
  return 1;
}

tq::ScenarioPreset load_scenario_arg(const std::string& arg) {
  if (tq::is_preset_name(arg)) return tq::load_preset(arg);
  if (std::filesystem::exists(arg)) return tq::load_scenario(tq::load_sweep_config(arg));
  throw tq::config_error("scenario '" + arg +
                         "' is neither a preset (fig5, fig6, eig-setup1, eig-setup2) nor a "
                         "config file path");
}

const tq::ChannelScenario& require_channel(const tq::ScenarioPreset& preset,
                                           const std::string& what) {
  const auto* channel = std::get_if<tq::ChannelScenario>(&preset);
  if (!channel)
    throw tq::config_error(what + " requires a linear (channel) scenario; "
                                  "eigen-spectrum scenarios are driven through 'sweep'");
  return *channel;
}

void print_records(const std::vector<tq::SweepRecord>& records) {
  std::cout << "method              logM  n_s   estimate      ci            theoretical   "
               "trials  wall_ms\n";
  for (const auto& r : records) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s %5d  %-4s  %-12.6g  %-12.6g  %-12.6g  %-7lld %lld",
                  r.method.c_str(), r.log2_m, r.n_s ? std::to_string(*r.n_s).c_str() : "-",
                  r.estimate, r.ci, r.theoretical, static_cast<long long>(r.trials),
                  static_cast<long long>(r.wall_ms));
    std::cout << line << '\n';
    if (!r.error.empty()) std::cout << "    error: " << r.error << '\n';
  }
}

void write_records(const std::vector<tq::SweepRecord>& records, const std::string& path,
                   const std::string& format, bool timings) {
  const tq::ResultFormat fmt =
      format == "json" ? tq::ResultFormat::Json : tq::ResultFormat::Csv;
  tq::emit_results(records, path, fmt, timings);
  std::cout << "wrote " << records.size() << " records to " << path << '\n';
}

int cmd_design(const std::string& scenario, const std::string& method, int bits, int adc_dim,
               double eta, const std::string& out) {
  const auto preset = load_scenario_arg(scenario);
  const auto& channel = require_channel(preset, "design");
  const auto& model = channel.model;

  tq::HardwareLimitedSystem sys;
  if (method == "thm1") {
    const int p = adc_dim > 0 ? adc_dim : tq::select_output_dimension(model, bits, eta);
    sys = tq::design_optimal(model, p, bits, eta);
  } else if (method == "cor2") {
    sys = tq::design_digital_only(model, bits, eta);
  } else if (method == "cor3") {
    sys = tq::design_quantize_mmse(model, bits, eta);
  } else {
    throw tq::config_error("unknown design method '" + method + "' (thm1, cor2, cor3)");
  }

  const std::string doc = tq::system_to_json(sys, method, model.mmse_floor());
  if (!out.empty()) {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw tq::io_error("cannot open output file '" + out + "'");
    file << doc << '\n';
    if (!file.flush()) throw tq::io_error("failed writing design to '" + out + "'");
  } else {
    std::cout << doc << '\n';
  }
  std::cout << method << ": p=" << sys.adc_dim << " levels=" << sys.quantizer.levels
            << " gamma=" << sys.quantizer.dynamic_range
            << " predicted_mse=" << sys.predicted_mse + model.mmse_floor()
            << " (floor " << model.mmse_floor() << ")\n";
  return kExitOk;
}

tq::SweepConfig scenario_config(const std::string& scenario) {
  if (tq::is_preset_name(scenario)) {
    tq::SweepConfig cfg;
    cfg.scenario = scenario;
    return cfg;
  }
  if (std::filesystem::exists(scenario)) return tq::load_sweep_config(scenario);
  throw tq::config_error("scenario '" + scenario + "' is neither a preset nor a config file");
}

int cmd_simulate(const std::string& scenario, const std::string& method, int bits,
                 long long trials, std::uint64_t seed, double eta, int threads, int n_s,
                 const std::string& out, const std::string& format) {
  tq::SweepConfig cfg = scenario_config(scenario);
  cfg.methods = {method};
  cfg.bits = {bits};
  cfg.trials = trials;
  cfg.trials_task_ignorant = trials;
  cfg.seed = seed;
  cfg.eta = eta;
  cfg.threads = threads;
  if (n_s > 0) cfg.set_counts = {n_s};
  if (method == "eig-pipeline" && cfg.set_counts.empty())
    throw tq::config_error("eig-pipeline needs --n-s");
  const auto records = tq::run_sweep(cfg);
  print_records(records);
  if (!out.empty()) write_records(records, out, format, false);
  for (const auto& r : records)
    if (!r.error.empty()) throw tq::infeasible_error(r.error);
  return kExitOk;
}

int cmd_bounds(const std::string& scenario, const std::vector<int>& bits, long long trials,
               std::uint64_t seed, double eta, int threads,
               std::vector<std::string> methods, const std::string& out,
               const std::string& format) {
  tq::SweepConfig cfg = scenario_config(scenario);
  if (methods.empty()) {
    if (tq::is_preset_name(cfg.scenario) && cfg.scenario.rfind("eig", 0) == 0)
      methods = {"prop1-upper", "mmse-floor", "prior-mean"};
    else if (cfg.scenario == "eig")
      methods = {"prop1-upper", "mmse-floor", "prior-mean"};
    else
      methods = {"prop1-lower", "prop1-upper", "task-ignorant-emp", "task-ignorant-approx"};
  }
  cfg.methods = std::move(methods);
  cfg.bits = bits;
  cfg.trials = trials;
  cfg.trials_task_ignorant = trials;
  cfg.seed = seed;
  cfg.eta = eta;
  cfg.threads = threads;
  const auto records = tq::run_sweep(cfg);
  print_records(records);
  if (!out.empty()) write_records(records, out, format, false);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override, int threads,
              bool timings) {
  tq::SweepConfig cfg = tq::load_sweep_config(config_path);
  if (!out_override.empty()) cfg.out_path = out_override;
  if (threads >= 0) cfg.threads = threads;
  if (cfg.out_path.empty())
    throw tq::config_error("no output path: set 'out' in the config or pass --out");
  const auto records = tq::run_sweep(cfg);
  print_records(records);
  write_records(records, cfg.out_path, cfg.format, timings || cfg.emit_wall_time);
  return kExitOk;
}

int cmd_presets() {
  std::cout << "fig5        channel estimation, 2 taps, 120 observations\n"
               "fig6        channel estimation, 8 taps, 120 observations\n"
               "eig-setup1  eigen-spectrum recovery, k=2, n_x=20, 2-point transform basis\n"
               "eig-setup2  eigen-spectrum recovery, k=4, n_x=60, identity basis\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "taskquant: hardware-limited task-based quantization designs, bounds and sweeps.\n"
      "Scenario presets: fig5, fig6, eig-setup1, eig-setup2."};
  app.require_subcommand(1);

  std::string scenario, method = "thm1", out, format = "csv", config_path;
  std::vector<int> bits_list;
  int bits = 0, adc_dim = 0, n_s = 0;
  int threads = default_threads();
  long long trials = 10000;
  std::uint64_t seed = 1;
  double eta = 3.0;
  bool timings = false;

  auto* design = app.add_subcommand("design", "Derive a system and write it as JSON");
  design->add_option("--scenario", scenario, "Preset name or config path")->required();
  design->add_option("--method", method, "thm1 | cor2 | cor3");
  design->add_option("--bits", bits, "Total bit budget log2(M)")->required();
  design->add_option("--p", adc_dim, "ADC input dimension (thm1 only; default: best)");
  design->add_option("--eta", eta, "Dynamic range multiplier");
  design->add_option("--out", out, "Output JSON path (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one method at one budget");
  simulate->add_option("--scenario", scenario, "Preset name or config path")->required();
  simulate->add_option("--method", method, "Any sweep method name")->required();
  simulate->add_option("--bits", bits, "Total bit budget log2(M)")->required();
  simulate->add_option("--trials", trials, "Monte Carlo trials");
  simulate->add_option("--seed", seed, "Base seed");
  simulate->add_option("--eta", eta, "Dynamic range multiplier");
  simulate->add_option("--threads", threads, "Worker threads (0 = hardware)");
  simulate->add_option("--n-s", n_s, "Set count for eig-pipeline");
  simulate->add_option("--out", out, "Write the record to this path");
  simulate->add_option("--format", format, "csv | json");

  auto* bounds = app.add_subcommand("bounds", "Vector-quantizer benchmarks over a bit grid");
  bounds->add_option("--scenario", scenario, "Preset name or config path")->required();
  bounds->add_option("--bits-list", bits_list, "Comma separated log2(M) grid")
      ->required()
      ->delimiter(',');
  bounds->add_option("--trials", trials, "Monte Carlo trials");
  bounds->add_option("--seed", seed, "Base seed");
  bounds->add_option("--eta", eta, "Dynamic range multiplier");
  bounds->add_option("--threads", threads, "Worker threads (0 = hardware)");
  std::vector<std::string> bound_methods;
  bounds->add_option("--methods", bound_methods, "Override the bound method list")
      ->delimiter(',');
  bounds->add_option("--out", out, "Write records to this path");
  bounds->add_option("--format", format, "csv | json");

  auto* sweep = app.add_subcommand("sweep", "Run a sweep described by a config file");
  sweep->add_option("--config", config_path, "Sweep config path")->required();
  sweep->add_option("--out", out, "Override the config output path");
  int sweep_threads = -1;
  sweep->add_option("--threads", sweep_threads, "Override worker threads");
  sweep->add_flag("--timings", timings, "Emit measured wall times instead of zeros");

  auto* presets = app.add_subcommand("presets", "List scenario presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (design->parsed()) return cmd_design(scenario, method, bits, adc_dim, eta, out);
    if (simulate->parsed())
      return cmd_simulate(scenario, method, bits, trials, seed, eta, threads, n_s, out, format);
    if (bounds->parsed())
      return cmd_bounds(scenario, bits_list, trials, seed, eta, threads, bound_methods, out,
                        format);
    if (sweep->parsed()) return cmd_sweep(config_path, out, sweep_threads, timings);
    if (presets->parsed()) return cmd_presets();
  } catch (const tq::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tq::infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const tq::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const tq::io_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
