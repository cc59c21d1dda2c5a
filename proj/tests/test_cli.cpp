// Integration tests for the command line tool. Invoked with the CLI binary
// path as the only argument; spawns it and checks exit codes and outputs.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int failures = 0;

#define EXPECT(cond, what)                                                       \
  do {                                                                           \
    if (!(cond)) {                                                               \
      ++failures;                                                                \
      std::cerr << "[cli FAIL] " << __LINE__ << ": " << what << "\n";            \
    }                                                                            \
  } while (0)

std::string cli_path;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string cmd = cli_path + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

void test_presets_and_help() {
  const auto presets = run("presets");
  EXPECT(presets.exit_code == 0, "presets exits 0");
  for (const char* name : {"fig5", "fig6", "eig-setup1", "eig-setup2"})
    EXPECT(presets.output.find(name) != std::string::npos, std::string("presets lists ") + name);

  const auto help = run("--help");
  EXPECT(help.exit_code == 0, "--help exits 0");
  for (const char* name : {"fig5", "fig6", "eig-setup1", "eig-setup2"})
    EXPECT(help.output.find(name) != std::string::npos, std::string("help names ") + name);
}

void test_design() {
  const std::string out = "/tmp/tq_cli_design.json";
  const auto ok = run("design --scenario fig5 --method thm1 --bits 10 --out " + out);
  EXPECT(ok.exit_code == 0, "thm1 design exits 0; got\n" + ok.output);
  const std::string doc = slurp(out);
  EXPECT(doc.find("\"adc_dim\": 2") != std::string::npos, "fig5 design uses both branches");
  EXPECT(doc.find("\"m_per_quantizer\": 32") != std::string::npos,
         "10 bits over 2 quantizers gives 32 levels");
  EXPECT(doc.find("\"predicted_mse_total\"") != std::string::npos, "document carries the MSE");
  std::remove(out.c_str());

  // digital-only needs a bit per observation entry: 10 < 120
  const auto infeasible = run("design --scenario fig5 --method cor2 --bits 10");
  EXPECT(infeasible.exit_code == 3, "cor2 with too few bits exits 3");
  EXPECT(infeasible.output.find("log2(M) >= obs_dim") != std::string::npos,
         "message quotes the constraint; got\n" + infeasible.output);

  // resolution floor: one bit over two quantizers leaves a single level
  const auto floor = run("design --scenario fig5 --method thm1 --bits 1 --p 2");
  EXPECT(floor.exit_code == 3, "sub-resolution design exits 3");
  EXPECT(floor.output.find("fewer than 2 levels") != std::string::npos,
         "message explains the resolution floor");

  const auto unknown = run("design --scenario fig5 --method warp --bits 10");
  EXPECT(unknown.exit_code == 2, "unknown method exits 2");

  const auto badflag = run("design --scenario fig5 --bits 10 --frobnicate");
  EXPECT(badflag.exit_code == 2, "unknown flag exits 2");
}

void test_simulate() {
  const auto r = run("simulate --scenario fig5 --method thm1 --bits 10 --trials 300 --seed 4");
  EXPECT(r.exit_code == 0, "simulate exits 0; got\n" + r.output);
  EXPECT(r.output.find("thm1") != std::string::npos, "summary names the method");
}

void test_bounds() {
  const std::string out = "/tmp/tq_cli_bounds.csv";
  const auto r = run(
      "bounds --scenario fig5 --bits-list 4,6 --trials 400 --seed 2 "
      "--methods prop1-lower,prop1-upper --out " + out);
  EXPECT(r.exit_code == 0, "bounds exits 0; got\n" + r.output);
  const std::string csv = slurp(out);
  EXPECT(csv.find("prop1-lower") != std::string::npos, "lower bound rows present");
  EXPECT(csv.find("prop1-upper") != std::string::npos, "upper bound rows present");
  std::remove(out.c_str());

  // enumeration cap: the record is refused but the run continues
  const auto capped = run(
      "bounds --scenario fig5 --bits-list 20 --trials 10 --methods task-ignorant-emp");
  EXPECT(capped.exit_code == 0, "capped task-ignorant row does not abort the run");
  EXPECT(capped.output.find("task_ignorant_approx") != std::string::npos,
         "error row explains the cap");
}

void test_sweep_determinism() {
  const std::string cfg_path = "/tmp/tq_cli_sweep.cfg";
  write_file(cfg_path,
             "schema_version = 1\n"
             "scenario = channel\n"
             "channel_taps = 2\n"
             "channel_obs = 8\n"
             "methods = thm1, cor3\n"
             "bits = 4, 6\n"
             "trials = 250\n"
             "seed = 11\n"
             "format = csv\n");
  const std::string out1 = "/tmp/tq_cli_sweep1.csv", out2 = "/tmp/tq_cli_sweep2.csv";
  const auto r1 = run("sweep --config " + cfg_path + " --out " + out1);
  const auto r2 = run("sweep --config " + cfg_path + " --out " + out2 + " --threads 4");
  EXPECT(r1.exit_code == 0, "sweep exits 0; got\n" + r1.output);
  EXPECT(r2.exit_code == 0, "sweep with threads exits 0");
  EXPECT(slurp(out1) == slurp(out2), "same config and seed give byte-identical CSV");
  std::remove(out1.c_str());
  std::remove(out2.c_str());

  write_file(cfg_path,
             "schema_version = 1\n"
             "scenario = fig5\n"
             "methods = hyperdrive\n"
             "bits = 4\n");
  const auto bad = run("sweep --config " + cfg_path);
  EXPECT(bad.exit_code == 2, "unknown method in config exits 2");
  EXPECT(bad.output.find("hyperdrive") != std::string::npos, "offending method is named");
  std::remove(cfg_path.c_str());

  const auto missing = run("sweep --config /tmp/does_not_exist.cfg");
  EXPECT(missing.exit_code == 5, "missing config file exits 5");
}

void test_eig_sweep() {
  const std::string cfg_path = "/tmp/tq_cli_eig.cfg";
  write_file(cfg_path,
             "schema_version = 1\n"
             "scenario = eig-setup1\n"
             "methods = eig-pipeline, prior-mean\n"
             "bits = 40\n"
             "n_s = 2, 10\n"
             "trials = 200\n"
             "seed = 8\n"
             "estimator = posterior-mean\n"
             "out = /tmp/tq_cli_eig.csv\n");
  const auto r = run("sweep --config " + cfg_path);
  EXPECT(r.exit_code == 0, "eig sweep exits 0; got\n" + r.output);
  const std::string csv = slurp("/tmp/tq_cli_eig.csv");
  EXPECT(csv.find("eig-pipeline,40,2,") != std::string::npos, "pipeline row for n_s = 2");
  EXPECT(csv.find("eig-pipeline,40,10,") != std::string::npos, "pipeline row for n_s = 10");
  std::remove(cfg_path.c_str());
  std::remove("/tmp/tq_cli_eig.csv");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: taskquant_cli_tests <path-to-cli>\n";
    return 2;
  }
  cli_path = argv[1];
  test_presets_and_help();
  test_design();
  test_simulate();
  test_bounds();
  test_sweep_determinism();
  test_eig_sweep();
  if (failures == 0) {
    std::cout << "cli tests: all passed\n";
    return 0;
  }
  std::cerr << "cli tests: " << failures << " failure(s)\n";
  return 1;
}
