// Command-line front end; all numerics go through the shared-library C API.
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adapttikh/adapttikh.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

int exit_code_of(at_status status) {
  switch (status) {
    case AT_OK: return kExitOk;
    case AT_ERR_INVALID_ARGUMENT: return kExitUsage;
    default: return kExitNumerical;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Takes ownership of a C-API string.
std::string take(char* s) {
  std::string out = s ? s : "";
  at_string_free(s);
  return out;
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << std::endl;
    return kExitOk;
  }
  std::ofstream os(out_path);
  os << text << '\n';
  if (!os) {
    std::cerr << "error: cannot write " << out_path << std::endl;
    return kExitNumerical;
  }
  return kExitOk;
}

int resolve_threads(int flag_value) {
  if (const char* env = std::getenv("ADAPTTIKH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return flag_value > 0 ? flag_value : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Tikhonov regularization with functional error "
               "estimators (ring-source benchmark)"};
  app.require_subcommand(1);

  std::string config_path, out_path, regularizer = "measure";
  double alpha = 0.0;
  int mesh_levels = -1, threads = 1;

  auto* solve = app.add_subcommand(
      "solve", "Solve one regularized problem on the benchmark data");
  solve->add_option("--regularizer", regularizer,
                    "Regularizer: l2 | ivanov | measure");
  solve->add_option("--alpha", alpha, "Regularization parameter (> 0)");
  solve->add_option("--mesh-levels", mesh_levels,
                    "Uniform refinements of the initial disk mesh");
  solve->add_option("--config", config_path, "RunConfig JSON file");
  solve->add_option("--out", out_path, "Output file (default: stdout)");

  int levels = 4;
  std::string refinement = "uniform";
  auto* rate = app.add_subcommand(
      "rate-study", "Estimator vs true error over a refinement sequence");
  rate->add_option("--refinement", refinement, "uniform | adaptive");
  rate->add_option("--levels", levels, "Number of study levels (>= 3)");
  rate->add_option("--config", config_path, "RunConfig JSON file");
  rate->add_option("--out", out_path, "CSV output file (default: stdout)");

  std::vector<double> deltas;
  auto* dstudy = app.add_subcommand(
      "delta-study", "Adaptive runs over a range of noise levels");
  dstudy->add_option("--deltas", deltas, "Noise levels, positive decreasing");
  dstudy->add_option("--threads", threads,
                     "Parallel study rows (env ADAPTTIKH_THREADS overrides)");
  dstudy->add_option("--config", config_path, "RunConfig JSON file");
  dstudy->add_option("--out", out_path, "CSV output file (default: stdout)");

  double sigma = 4.0, gamma = 2.0;
  long long samples = 100000;
  std::uint64_t seed = 1;
  auto* lemma = app.add_subcommand(
      "check-lemma", "Closed-form (sigma, gamma) admissibility vs randomized test");
  lemma->add_option("--sigma", sigma, "sigma");
  lemma->add_option("--gamma", gamma, "gamma");
  lemma->add_option("--samples", samples, "Randomized sample count");
  lemma->add_option("--seed", seed, "Random seed");

  auto* adaptrun = app.add_subcommand(
      "adaptive", "Run the discrepancy-principle adaptive loop once");
  adaptrun->add_option("--regularizer", regularizer,
                       "Regularizer: l2 | ivanov | measure");
  adaptrun->add_option("--config", config_path, "RunConfig JSON file");
  adaptrun->add_option("--out", out_path, "CSV output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  std::string config_json;
  try {
    if (!config_path.empty()) config_json = read_file(config_path);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  }

  if (solve->parsed()) {
    at_solution* sol = nullptr;
    const at_status st = at_solve_benchmark(config_json.c_str(),
                                            regularizer.c_str(), alpha,
                                            mesh_levels, &sol);
    if (st != AT_OK) {
      std::cerr << "error: " << at_last_error() << std::endl;
      return exit_code_of(st);
    }
    char *summary = nullptr, *report = nullptr;
    at_solution_summary_json(sol, &summary);
    const at_status rst = at_solution_report_json(sol, 0, &report);
    at_solution_free(sol);
    nlohmann::json j = nlohmann::json::parse(take(summary));
    if (rst == AT_OK) j["estimator_report"] = nlohmann::json::parse(take(report));
    return write_output(j.dump(2), out_path);
  }

  if (rate->parsed()) {
    char *csv = nullptr, *json = nullptr;
    const at_status st = at_rate_study(config_json.c_str(), refinement.c_str(),
                                       levels, &csv, &json);
    if (st != AT_OK) {
      std::cerr << "error: " << at_last_error() << std::endl;
      return exit_code_of(st);
    }
    const nlohmann::json notes = nlohmann::json::parse(take(json))["notes"];
    for (const auto& [key, value] : notes.items())
      std::cerr << key << " = " << value << std::endl;
    return write_output(take(csv), out_path);
  }

  if (dstudy->parsed()) {
    char *csv = nullptr, *json = nullptr;
    const at_status st =
        at_delta_study(config_json.c_str(), deltas.empty() ? nullptr : deltas.data(),
                       static_cast<int>(deltas.size()), resolve_threads(threads),
                       &csv, &json);
    if (st != AT_OK) {
      std::cerr << "error: " << at_last_error() << std::endl;
      return exit_code_of(st);
    }
    const nlohmann::json parsed = nlohmann::json::parse(take(json));
    for (const auto& [key, value] : parsed["notes"].items())
      std::cerr << key << " = " << value << std::endl;
    if (deltas.size() == 1)
      std::cerr << "warning: a slope fit needs at least 2 noise levels"
                << std::endl;
    return write_output(take(csv), out_path);
  }

  if (lemma->parsed()) {
    char* json = nullptr;
    const at_status st = at_check_lemma(sigma, gamma, samples, seed, &json);
    if (st != AT_OK) {
      std::cerr << "error: " << at_last_error() << std::endl;
      return exit_code_of(st);
    }
    const nlohmann::json j = nlohmann::json::parse(take(json));
    std::cout << "sigma_gamma_check(" << sigma << ", " << gamma << ") = "
              << (j["check"].get<bool>() ? "true" : "false") << '\n'
              << "violations: " << j["violations"] << " / " << samples << '\n';
    if (j["counterexample_found"].get<bool>()) {
      const auto& c = j["counterexample"];
      std::cout << "counterexample: a=" << c["a"] << " b=" << c["b"]
                << " c=" << c["c"] << " d=" << c["d"]
                << " (margin " << c["margin"] << ")\n";
    }
    const bool consistent = j["consistent"].get<bool>();
    std::cout << (consistent ? "consistent" : "INCONSISTENT") << std::endl;
    return consistent ? kExitOk : kExitNumerical;
  }

  if (adaptrun->parsed()) {
    char *csv = nullptr, *json = nullptr;
    const at_status st = at_run_adaptive(config_json.c_str(),
                                         regularizer.c_str(), &csv, &json);
    if (st != AT_OK) {
      std::cerr << "error: " << at_last_error() << std::endl;
      return exit_code_of(st);
    }
    const nlohmann::json parsed = nlohmann::json::parse(take(json));
    std::cerr << "termination: " << parsed["termination"].get<std::string>()
              << ", final alpha " << parsed["final_alpha"] << ", ndof "
              << parsed["final_ndof"] << std::endl;
    return write_output(take(csv), out_path);
  }

  return kExitUsage;
}
