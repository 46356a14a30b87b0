#include "adapttikh/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace adapttikh {

void AdaptiveConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("adaptive: delta must be > 0");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("adaptive: alpha0 must be > 0");
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("adaptive: c1, c2 must be > 0");
  const double floor = std::max(std::sqrt(1.0 + 2.0 * c2), 1.0 + c1);
  if (!(tau_lower >= floor) || !(tau_upper > tau_lower))
    throw std::invalid_argument(
        "adaptive: need tau_upper > tau_lower >= max(sqrt(1+2c2), 1+c1)");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("adaptive: theta must be in (0,1)");
  if (!(theta_mark > 0.0 && theta_mark <= 1.0))
    throw std::invalid_argument("adaptive: theta_mark must be in (0,1]");
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("adaptive: iteration caps must be >= 1");
}

std::vector<int> dorfler_mark(std::span<const double> indicators,
                              double theta_mark) {
  const int n = static_cast<int>(indicators.size());
  double total = 0.0;
  for (double v : indicators) total += v * v;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
    return a < b;
  });
  std::vector<int> marked;
  if (total <= 0.0) return marked;
  const double target = theta_mark * theta_mark * total;
  double acc = 0.0;
  for (int id : order) {
    if (acc >= target) break;
    if (indicators[id] <= 0.0) break;
    marked.push_back(id);
    acc += indicators[id] * indicators[id];
  }
  return marked;
}

namespace {

Eigen::VectorXd prolong_vector(const Eigen::VectorXd& old_vals,
                               const std::vector<int>& old_ids,
                               const RefinementResult& step,
                               const std::vector<int>& new_ids, bool average) {
  // Scatter to per-vertex storage on the old mesh, prolongate, gather.
  std::vector<double> by_vertex;
  {
    int max_old = 0;
    for (const auto& vp : step.vertex_parents)
      max_old = std::max({max_old, vp[0] + 1, vp[1] + 1});
    by_vertex.assign(max_old, 0.0);
  }
  for (int j = 0; j < static_cast<int>(old_ids.size()); ++j)
    by_vertex[old_ids[j]] = old_vals[j];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(new_ids.size());
  for (int j = 0; j < static_cast<int>(new_ids.size()); ++j) {
    const int v = new_ids[j];
    const auto [a, b] = step.vertex_parents[v];
    if (average)
      out[j] = 0.5 * (by_vertex[a] + by_vertex[b]);
    else if (a == b)
      out[j] = by_vertex[a];  // atoms keep their sites; midpoints start at 0
  }
  return out;
}

}  // namespace

AdaptiveTrace run_adaptive(const AdaptiveConfig& config,
                           std::shared_ptr<const Mesh> mesh0,
                           RegularizerKind kind, const FeFunction& g_delta0,
                           const EstimatorConstants& constants) {
  config.validate();
  constants.validate();
  if (g_delta0.mesh.get() != mesh0.get())
    throw std::invalid_argument("run_adaptive: data not given on the initial mesh");

  AdaptiveTrace trace;
  std::shared_ptr<const Mesh> mesh = std::move(mesh0);
  FeFunction g = g_delta0;
  auto problem = std::make_unique<Problem>(mesh, g);
  Eigen::VectorXd warm;  // previous coefficients in the solver's space
  bool have_warm = false;

  const double delta = config.delta;
  for (int k = 0; k < config.max_outer; ++k) {
    const double alpha = config.alpha0 * std::pow(config.theta, k);
    for (int inner = 0; inner < config.max_inner; ++inner) {
      SolverOptions opts;
      if (have_warm) opts.warm_start = &warm;
      const Regularizer reg{kind, alpha};
      const TikhonovSolution sol = solve(*problem, reg, opts);
      warm = kind == RegularizerKind::MeasureNorm ? sol.u_measure.weight
                                                  : sol.u_ctrl;
      have_warm = true;
      const EstimatorReport report = make_report(*problem, sol, constants);

      AdaptiveRecord rec;
      rec.outer = k;
      rec.alpha = alpha;
      rec.inner = inner;
      rec.ndof = static_cast<int>(problem->dofs().num_free());
      rec.h_min = mesh->h_min();
      rec.h_max = mesh->h_max();
      rec.discrepancy = sol.discrepancy;
      rec.J_value = sol.J_value;
      rec.residual_bound = report.residual_bound;
      rec.functional_bound = report.functional_bound;
      rec.discrepancy_gap = report.discrepancy_gap_bound;
      rec.eta_w = report.eta_w;
      rec.eta_y = report.eta_y;
      rec.eta_kappa = report.eta_kappa;
      rec.inner_accepted = rec.discrepancy_gap <= config.c1 * delta &&
                           rec.functional_bound <= config.c2 * delta * delta;
      trace.records.push_back(rec);

      if (!rec.inner_accepted) {
        if (inner == config.max_inner - 1) {
          trace.termination = "max_inner";
          trace.final_index = static_cast<int>(trace.records.size()) - 1;
          return trace;
        }
        const std::vector<int> marked = dorfler_mark(
            {report.indicators.data(),
             static_cast<size_t>(report.indicators.size())},
            config.theta_mark);
        RefinementResult refined =
            marked.empty() ? uniform_refine(*mesh) : refine(*mesh, marked);
        // Data is P1 on the initial mesh, so nodal prolongation is exact.
        g = prolongate(g, refined);
        auto next = std::make_unique<Problem>(refined.mesh, g);
        warm = kind == RegularizerKind::MeasureNorm
                   ? prolong_vector(warm, problem->atom_vertices(), refined,
                                    next->atom_vertices(), false)
                   : prolong_vector(warm, problem->ctrl_vertices(), refined,
                                    next->ctrl_vertices(), true);
        mesh = refined.mesh;
        problem = std::move(next);
        continue;
      }

      // Inner accuracy reached: apply the relaxed discrepancy principle.
      if (rec.discrepancy > config.tau_upper * delta) break;  // decrease alpha
      auto& final_rec = trace.records.back();
      trace.final_index = static_cast<int>(trace.records.size()) - 1;
      trace.final_alpha = alpha;
      trace.final_ndof = rec.ndof;
      if (rec.discrepancy < config.tau_lower * delta) {
        trace.termination = "overshoot";
        return trace;
      }
      final_rec.accepted = true;
      trace.success = true;
      trace.termination = "accepted";
      return trace;
    }
  }
  trace.termination = "max_outer";
  trace.final_index = static_cast<int>(trace.records.size()) - 1;
  return trace;
}

std::string AdaptiveTrace::to_csv() const {
  std::ostringstream os;
  os << "k,alpha,inner,ndof,h_min,h_max,discrepancy,residual_bound,"
        "functional_bound,discrepancy_gap,eta_w,eta_y,eta_kappa,accepted\n";
  os.precision(17);
  for (const auto& r : records)
    os << r.outer << ',' << r.alpha << ',' << r.inner << ',' << r.ndof << ','
       << r.h_min << ',' << r.h_max << ',' << r.discrepancy << ','
       << r.residual_bound << ',' << r.functional_bound << ','
       << r.discrepancy_gap << ',' << r.eta_w << ',' << r.eta_y << ','
       << r.eta_kappa << ',' << (r.accepted ? 1 : 0) << '\n';
  return os.str();
}

std::string AdaptiveTrace::to_json() const {
  nlohmann::json j;
  j["success"] = success;
  j["termination"] = termination;
  j["final_index"] = final_index;
  j["final_alpha"] = final_alpha;
  j["final_ndof"] = final_ndof;
  j["records"] = nlohmann::json::array();
  for (const auto& r : records)
    j["records"].push_back({{"k", r.outer},
                            {"alpha", r.alpha},
                            {"inner", r.inner},
                            {"ndof", r.ndof},
                            {"h_min", r.h_min},
                            {"h_max", r.h_max},
                            {"discrepancy", r.discrepancy},
                            {"J_value", r.J_value},
                            {"residual_bound", r.residual_bound},
                            {"functional_bound", r.functional_bound},
                            {"discrepancy_gap", r.discrepancy_gap},
                            {"eta_w", r.eta_w},
                            {"eta_y", r.eta_y},
                            {"eta_kappa", r.eta_kappa},
                            {"inner_accepted", r.inner_accepted},
                            {"accepted", r.accepted}});
  return j.dump(2);
}

}  // namespace adapttikh
