#include "adapttikh/adapttikh.h"

#include <cstdlib>
#include <cstring>
#include <ios>
#include <memory>
#include <string>

#include "adapttikh/adaptive.hpp"
#include "adapttikh/benchmark.hpp"
#include "adapttikh/config.hpp"
#include "adapttikh/estimators.hpp"
#include "adapttikh/fem.hpp"
#include "adapttikh/mesh.hpp"
#include "adapttikh/tikhonov.hpp"
#include "json.hpp"

using namespace adapttikh;

struct at_mesh {
  std::shared_ptr<const Mesh> mesh;
};

struct at_solution {
  RunConfig config;
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<Problem> problem;
  TikhonovSolution solution;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

at_status fail(at_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
at_status guarded(Fn&& fn) {
  try {
    fn();
    return AT_OK;
  } catch (const NumericalFailure& e) {
    return fail(AT_ERR_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(AT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(AT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(AT_ERR_IO, e.what());
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (what.find("cannot open") != std::string::npos ||
        what.find("write failed") != std::string::npos)
      return fail(AT_ERR_IO, what);
    return fail(AT_ERR_INTERNAL, what);
  }
}

RunConfig parse_config(const char* config_json) {
  if (config_json == nullptr || config_json[0] == '\0') return RunConfig{};
  return RunConfig::from_json(config_json);
}

FeFunction benchmark_data(const RunConfig& cfg,
                          std::shared_ptr<const Mesh> mesh) {
  FeFunction g = interpolate_exact_data(std::move(mesh), cfg.benchmark.rho,
                                        cfg.benchmark.alpha);
  if (cfg.benchmark.delta > 0.0)
    g = add_noise(g, cfg.benchmark.delta, cfg.benchmark.seed);
  return g;
}

}  // namespace

extern "C" {

const char* at_version(void) { return "adapttikh 1.0.0"; }

const char* at_last_error(void) { return g_last_error.c_str(); }

void at_string_free(char* s) { std::free(s); }

at_status at_mesh_create_disk(int n_boundary, double radius, int levels,
                              at_mesh** out) {
  if (!out) return fail(AT_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = new at_mesh{make_disk_mesh(n_boundary, radius, levels)};
  });
}

at_status at_mesh_read(const char* path, at_mesh** out) {
  if (!out || !path) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new at_mesh{read_mesh(path)}; });
}

at_status at_mesh_write(const at_mesh* mesh, const char* path) {
  if (!mesh || !path) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { write_mesh(*mesh->mesh, path); });
}

at_status at_mesh_refine_uniform(const at_mesh* mesh, at_mesh** out) {
  if (!mesh || !out) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new at_mesh{uniform_refine(*mesh->mesh).mesh}; });
}

at_status at_mesh_refine_marked(const at_mesh* mesh, const int* triangle_ids,
                                int count, at_mesh** out) {
  if (!mesh || !out || (count > 0 && !triangle_ids))
    return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new at_mesh{
        refine(*mesh->mesh, std::span<const int>(triangle_ids,
                                                 static_cast<size_t>(count)))
            .mesh};
  });
}

int at_mesh_num_vertices(const at_mesh* mesh) {
  return mesh ? mesh->mesh->num_vertices() : -1;
}

int at_mesh_num_triangles(const at_mesh* mesh) {
  return mesh ? mesh->mesh->num_triangles() : -1;
}

double at_mesh_min_angle(const at_mesh* mesh) {
  return mesh ? mesh->mesh->min_angle() : -1.0;
}

double at_mesh_total_area(const at_mesh* mesh) {
  return mesh ? mesh->mesh->total_area() : -1.0;
}

void at_mesh_free(at_mesh* mesh) { delete mesh; }

double at_exact_state(double rho, double x, double y) {
  return exact_state(rho, {x, y});
}

double at_exact_data(double rho, double alpha, double x, double y) {
  return exact_data(rho, alpha, {x, y});
}

double at_exact_source_mass(double rho) { return exact_source_mass(rho); }

at_status at_config_default(char** json_out) {
  if (!json_out) return fail(AT_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] { *json_out = dup_string(RunConfig{}.to_json()); });
}

at_status at_config_validate(const char* config_json) {
  if (!config_json) return fail(AT_ERR_INVALID_ARGUMENT, "config is null");
  return guarded([&] { (void)RunConfig::from_json(config_json); });
}

at_status at_solve_benchmark(const char* config_json, const char* regularizer,
                             double alpha_override, int mesh_levels_override,
                             at_solution** out) {
  if (!out || !regularizer) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto sol = std::make_unique<at_solution>();
    sol->config = parse_config(config_json);
    const RegularizerKind kind = regularizer_from_string(regularizer);
    if (alpha_override != 0.0 && !(alpha_override > 0.0))
      throw std::invalid_argument("alpha must be > 0");
    if (alpha_override > 0.0) sol->config.benchmark.alpha = alpha_override;
    if (mesh_levels_override >= 0) sol->config.mesh_levels = mesh_levels_override;
    sol->config.validate();
    sol->mesh = make_disk_mesh(sol->config.n_boundary, sol->config.radius,
                               sol->config.mesh_levels);
    sol->problem =
        std::make_unique<Problem>(sol->mesh, benchmark_data(sol->config, sol->mesh));
    sol->solution =
        solve(*sol->problem, {kind, sol->config.benchmark.alpha}, {});
    *out = sol.release();
  });
}

at_status at_solution_summary_json(const at_solution* sol, char** json_out) {
  if (!sol || !json_out) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    const TikhonovSolution& s = sol->solution;
    j["regularizer"] = to_string(s.reg.kind);
    j["alpha"] = s.reg.alpha;
    j["J_value"] = s.J_value;
    j["discrepancy"] = s.discrepancy;
    j["optimality_residual"] = s.optimality_residual;
    j["iterations"] = s.iterations;
    j["ndof"] = sol->problem->dofs().num_free();
    j["num_vertices"] = sol->mesh->num_vertices();
    j["num_triangles"] = sol->mesh->num_triangles();
    if (s.reg.kind == RegularizerKind::MeasureNorm) {
      int nonzero = 0;
      for (int i = 0; i < s.u_measure.weight.size(); ++i)
        if (s.u_measure.weight[i] != 0.0) ++nonzero;
      j["atoms_nonzero"] = nonzero;
      j["tv_norm"] = s.u_measure.tv_norm();
      j["signed_mass"] = s.u_measure.signed_mass();
    } else {
      j["control_max_abs"] = s.u_ctrl.size()
                                 ? s.u_ctrl.lpNorm<Eigen::Infinity>()
                                 : 0.0;
    }
    *json_out = dup_string(j.dump(2));
  });
}

at_status at_solution_report_json(const at_solution* sol, int with_elements,
                                  char** json_out) {
  if (!sol || !json_out) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const EstimatorReport rep =
        make_report(*sol->problem, sol->solution, sol->config.constants);
    *json_out = dup_string(rep.to_json(with_elements != 0));
  });
}

void at_solution_free(at_solution* sol) { delete sol; }

at_status at_rate_study(const char* config_json, const char* refinement,
                        int levels, char** csv_out, char** json_out) {
  if (!csv_out || !refinement) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const RunConfig cfg = parse_config(config_json);
    RateStudyOptions opts;
    opts.levels = levels;
    const std::string mode = refinement;
    if (mode == "uniform")
      opts.refinement = RefinementMode::Uniform;
    else if (mode == "adaptive")
      opts.refinement = RefinementMode::Adaptive;
    else
      throw std::invalid_argument("refinement must be 'uniform' or 'adaptive'");
    opts.n_boundary = cfg.n_boundary;
    opts.initial_levels = cfg.mesh_levels;
    opts.theta_mark = cfg.adaptive.theta_mark;
    opts.constants = cfg.constants;
    const StudyTable table = rate_study(cfg.benchmark, opts);
    *csv_out = dup_string(table.to_csv());
    if (json_out) *json_out = dup_string(table.to_json());
  });
}

at_status at_delta_study(const char* config_json, const double* deltas,
                         int n_deltas, int threads, char** csv_out,
                         char** json_out) {
  if (!csv_out) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const RunConfig cfg = parse_config(config_json);
    DeltaStudyOptions opts;
    if (deltas && n_deltas > 0)
      opts.deltas.assign(deltas, deltas + n_deltas);
    opts.adaptive = cfg.adaptive;
    opts.adaptive.alpha0 = cfg.adaptive.alpha0;
    opts.n_boundary = cfg.n_boundary;
    opts.initial_levels = cfg.mesh_levels;
    opts.constants = cfg.constants;
    opts.threads = threads > 0 ? threads : 1;
    const StudyTable table = delta_study(cfg.benchmark, opts);
    *csv_out = dup_string(table.to_csv());
    if (json_out) *json_out = dup_string(table.to_json());
  });
}

at_status at_run_adaptive(const char* config_json, const char* regularizer,
                          char** csv_out, char** json_out) {
  if (!csv_out || !regularizer) return fail(AT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const RunConfig cfg = parse_config(config_json);
    const RegularizerKind kind = regularizer_from_string(regularizer);
    const auto mesh = make_disk_mesh(cfg.n_boundary, cfg.radius, cfg.mesh_levels);
    FeFunction g = interpolate_exact_state(mesh, cfg.benchmark.rho);
    AdaptiveConfig acfg = cfg.adaptive;
    acfg.delta = cfg.benchmark.delta > 0.0 ? cfg.benchmark.delta : cfg.adaptive.delta;
    g = add_noise(g, acfg.delta, cfg.benchmark.seed);
    const AdaptiveTrace trace = run_adaptive(acfg, mesh, kind, g, cfg.constants);
    *csv_out = dup_string(trace.to_csv());
    if (json_out) *json_out = dup_string(trace.to_json());
  });
}

int at_sigma_gamma_check(double sigma, double gamma) {
  return sigma_gamma_check(sigma, gamma) ? 1 : 0;
}

at_status at_check_lemma(double sigma, double gamma, long long samples,
                         uint64_t seed, char** json_out) {
  if (!json_out) return fail(AT_ERR_INVALID_ARGUMENT, "out is null");
  if (samples <= 0) return fail(AT_ERR_INVALID_ARGUMENT, "samples must be > 0");
  return guarded([&] {
    const LemmaTestResult res = lemma_implication_test(sigma, gamma, samples, seed);
    nlohmann::json j;
    j["sigma"] = sigma;
    j["gamma"] = gamma;
    j["samples"] = samples;
    j["check"] = res.check;
    j["violations"] = res.violations;
    j["counterexample_found"] = res.counterexample_found;
    j["consistent"] = res.consistent();
    if (res.counterexample_found)
      j["counterexample"] = {{"a", res.a}, {"b", res.b}, {"c", res.c},
                             {"d", res.d}, {"margin", res.margin}};
    *json_out = dup_string(j.dump(2));
  });
}

}  // extern "C"
