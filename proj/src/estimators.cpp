#include "adapttikh/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "json.hpp"

namespace adapttikh {

void EstimatorConstants::validate() const {
  if (c_interp <= 0.0 || c_stab <= 0.0 || c_dirac <= 0.0 || c_inf <= 0.0)
    throw std::invalid_argument("estimator constants must be positive");
  if (!sigma_gamma_check(sigma, gamma))
    throw std::invalid_argument("(sigma, gamma) violates the admissibility condition");
}

bool sigma_gamma_check(double sigma, double gamma) {
  // Admissible iff q(z) = (gamma-1) z^2 - 2(2-gamma) z + (sigma-4) >= 0 for
  // all z >= 0. Requires sigma >= 4 (z = 0) and gamma > 1 (z -> inf); for
  // gamma >= 2 the minimum sits at z <= 0, otherwise nonnegativity of the
  // vertex value amounts to gamma^2 - gamma sigma + sigma <= 0.
  if (!(sigma >= 4.0) || !(gamma > 1.0)) return false;
  if (gamma >= 2.0) return true;
  return gamma * gamma - gamma * sigma + sigma <= 0.0;
}

namespace {

double lemma_defect(double sigma, double gamma, double z) {
  return (gamma - 1.0) * z * z - 2.0 * (2.0 - gamma) * z + (sigma - 4.0);
}

}  // namespace

LemmaTestResult lemma_implication_test(double sigma, double gamma,
                                       long long samples, std::uint64_t seed) {
  LemmaTestResult res;
  res.check = sigma_gamma_check(sigma, gamma);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto violated = [&](double a, double b, double c, double d) {
    const double lhs = a + (b + d) * (b + d);
    const double rhs = gamma * c + sigma * d * d;
    return lhs > rhs + 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs));
  };
  for (long long i = 0; i < samples; ++i) {
    double a, b, c, d;
    if (i % 2 == 0) {
      // generic admissible quadruple over several magnitudes
      const double scale = std::pow(10.0, 4.0 * unit(rng) - 2.0);
      c = scale * unit(rng);
      d = scale * unit(rng);
      b = unit(rng) * std::sqrt(c + d * d);
      a = unit(rng) * (c + d * d - b * b);
    } else {
      // boundary family a = 0, b = sqrt(c + d^2): the tight case
      const double z = 10.0 * unit(rng);
      d = 0.25 + 4.0 * unit(rng);
      b = (z + 1.0) * d;
      c = ((z + 1.0) * (z + 1.0) - 1.0) * d * d;
      a = 0.0;
    }
    if (violated(a, b, c, d)) {
      ++res.violations;
      if (!res.counterexample_found) {
        res.counterexample_found = true;
        res.a = a; res.b = b; res.c = c; res.d = d;
        res.margin = a + (b + d) * (b + d) - gamma * c - sigma * d * d;
      }
    }
  }
  if (!res.check && !res.counterexample_found) {
    // Guided search: minimize the defect polynomial in z and lift the
    // minimizer back to (a, b, c, d) = (0, z+1, (z+1)^2 - 1, 1).
    std::vector<double> candidates = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0,
                                      1e2,  1e4, 1e6};
    if (gamma > 1.0)
      candidates.push_back(std::max(0.0, (2.0 - gamma) / (gamma - 1.0)));
    double best_z = 0.0, best_q = lemma_defect(sigma, gamma, 0.0);
    for (double z : candidates) {
      const double q = lemma_defect(sigma, gamma, z);
      if (q < best_q) { best_q = q; best_z = z; }
    }
    if (best_q < 0.0) {
      const double z = best_z;
      res.a = 0.0;
      res.b = z + 1.0;
      res.c = (z + 1.0) * (z + 1.0) - 1.0;
      res.d = 1.0;
      res.margin = res.a + (res.b + res.d) * (res.b + res.d) -
                   gamma * res.c - sigma * res.d * res.d;
      res.counterexample_found = res.margin > 0.0;
    }
  }
  return res;
}

namespace {

// ---- exact integrals of affine data over clipped triangles ----

struct ClipPoint {
  Vec2 p;
  double f = 0.0;  // clipping value
  double g = 0.0;  // integrand value
};

// Keeps the part of a convex polygon where sign*f >= 0.
std::vector<ClipPoint> clip_by_f(const std::vector<ClipPoint>& poly, double sign) {
  std::vector<ClipPoint> out;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const ClipPoint& a = poly[i];
    const ClipPoint& b = poly[(i + 1) % n];
    const double fa = sign * a.f, fb = sign * b.f;
    if (fa >= 0.0) out.push_back(a);
    if ((fa < 0.0) != (fb < 0.0)) {
      const double t = fa / (fa - fb);
      ClipPoint c;
      c.p = a.p + t * (b.p - a.p);
      c.f = a.f + t * (b.f - a.f);
      c.g = a.g + t * (b.g - a.g);
      out.push_back(c);
    }
  }
  return out;
}

double integral_g(const std::vector<ClipPoint>& poly) {
  double total = 0.0;
  for (size_t i = 1; i + 1 < poly.size(); ++i) {
    const double area =
        0.5 * cross(poly[i].p - poly[0].p, poly[i + 1].p - poly[0].p);
    total += area * (poly[0].g + poly[i].g + poly[i + 1].g) / 3.0;
  }
  return total;
}

double integral_abs_g(std::vector<ClipPoint> poly) {
  for (ClipPoint& c : poly) c.f = c.g;
  return integral_g(clip_by_f(poly, 1.0)) - integral_g(clip_by_f(poly, -1.0));
}

std::vector<ClipPoint> triangle_poly(const Mesh& mesh, int t,
                                     const std::array<double, 3>& f,
                                     const std::array<double, 3>& g) {
  std::vector<ClipPoint> poly(3);
  for (int i = 0; i < 3; ++i) {
    poly[i].p = mesh.vertices[mesh.triangles[t][i]];
    poly[i].f = f[i];
    poly[i].g = g[i];
  }
  return poly;
}

}  // namespace

double p1_l2sq_on_triangle(const Mesh& mesh, int t,
                           const std::array<double, 3>& v) {
  const double area = mesh.triangle_area(t);
  return area / 6.0 *
         (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[0] * v[1] +
          v[1] * v[2] + v[2] * v[0]);
}

double p1_l1_on_triangle(const Mesh& mesh, int t,
                         const std::array<double, 3>& v) {
  return integral_abs_g(triangle_poly(mesh, t, v, v));
}

double rho_u_l1_on_triangle(const Mesh& mesh, int t, double alpha,
                            const std::array<double, 3>& u,
                            const std::array<double, 3>& w) {
  std::array<double, 3> au{alpha * u[0], alpha * u[1], alpha * u[2]};
  if (w[0] == 0.0 && w[1] == 0.0 && w[2] == 0.0)
    return p1_l1_on_triangle(mesh, t, au);  // sign(0) = 0 convention
  auto poly = triangle_poly(mesh, t, w, au);
  auto pos = clip_by_f(poly, 1.0);
  for (ClipPoint& c : pos) c.g -= 1.0;
  auto neg = clip_by_f(poly, -1.0);
  for (ClipPoint& c : neg) c.g += 1.0;
  return integral_abs_g(pos) + integral_abs_g(neg);
}

namespace {

std::array<double, 3> tri_values(const Mesh& mesh, int t,
                                 const Eigen::VectorXd& nodal) {
  const auto& tri = mesh.triangles[t];
  return {nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]};
}

struct ElementJumpData {
  Eigen::VectorXd jump;  // per edge
  // Per-triangle accumulations over interior boundary edges.
  Eigen::VectorXd sq;    // sum of jump^2 * length
  Eigen::VectorXd l1;    // sum of |jump| * length
  Eigen::VectorXd linf;  // max |jump|
};

ElementJumpData edge_jumps(const Mesh& mesh, const Eigen::VectorXd& nodal) {
  ElementJumpData d;
  const int ne = static_cast<int>(mesh.edges.size());
  d.jump.resize(ne);
  const std::span<const double> vals{nodal.data(),
                                     static_cast<size_t>(nodal.size())};
  for (int e = 0; e < ne; ++e) d.jump[e] = edge_jump_normal_gradient(mesh, vals, e);
  const int nt = mesh.num_triangles();
  d.sq = Eigen::VectorXd::Zero(nt);
  d.l1 = Eigen::VectorXd::Zero(nt);
  d.linf = Eigen::VectorXd::Zero(nt);
  for (int t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.tri_edges[t][i];
      if (mesh.edges[e].boundary) continue;
      const double len =
          norm(mesh.vertices[mesh.edges[e].v[1]] - mesh.vertices[mesh.edges[e].v[0]]);
      d.sq[t] += d.jump[e] * d.jump[e] * len;
      d.l1[t] += std::abs(d.jump[e]) * len;
      d.linf[t] = std::max(d.linf[t], std::abs(d.jump[e]));
    }
  return d;
}

// p_K ~ d |log h_K| needs p_K >= d, so the weight is floored at 1.
double log_weight(double h) { return std::max(1.0, std::abs(std::log(h))); }

double max_abs_on_ctrl(const Problem& p, const Eigen::VectorXd& nodal) {
  double m = 0.0;
  for (int v : p.ctrl_vertices()) m = std::max(m, std::abs(nodal[v]));
  return m;
}

// Root-sum-square of the per-family contributions, each family normalized
// by its own total.
Eigen::VectorXd combine_indicators(
    const std::vector<const Eigen::VectorXd*>& families) {
  const int nt = static_cast<int>(families.front()->size());
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(nt);
  for (const Eigen::VectorXd* f : families) {
    const double total = f->sum();
    if (total <= 0.0) continue;
    ind += (*f / total).cwiseAbs2();
  }
  return ind.cwiseSqrt();
}

void check_kind(const TikhonovSolution& s, RegularizerKind expected,
                const char* who) {
  if (s.reg.kind != expected)
    throw std::invalid_argument(std::string(who) + ": wrong regularizer kind");
}

}  // namespace

EstimatorReport hilbert_report(const Problem& problem,
                               const TikhonovSolution& solution,
                               const EstimatorConstants& constants) {
  check_kind(solution, RegularizerKind::HilbertL2, "hilbert_report");
  constants.validate();
  const Mesh& mesh = problem.mesh();
  const int nt = mesh.num_triangles();
  const double alpha = solution.reg.alpha;

  EstimatorReport rep;
  rep.kind = solution.reg.kind;
  rep.constants = constants;
  rep.data_misfit = problem.discrepancy_of(solution.y);

  const Eigen::VectorXd misfit_nodal = solution.y.values - problem.data().values;
  const FeFunction u_fe = solution.control_function(problem);
  const ElementJumpData jw = edge_jumps(mesh, solution.w.values);
  const ElementJumpData jy = edge_jumps(mesh, solution.y.values);

  rep.eta_w_elems.resize(nt);
  rep.eta_y_elems.resize(nt);
  rep.rho_u_elems.resize(nt);
  Eigen::VectorXd rho_u_nodal = alpha * u_fe.values - solution.w.values;
  for (int t = 0; t < nt; ++t) {
    const double h = mesh.h[t];
    const double h2 = h * h;
    // rho_w reduces to chi_{omega_o}(y_h - g) for P1 elements.
    const double dw = mesh.in_omega_o[t]
                          ? p1_l2sq_on_triangle(mesh, t, tri_values(mesh, t, misfit_nodal))
                          : 0.0;
    rep.eta_w_elems[t] = h2 * h2 * dw + 0.5 * h2 * h * jw.sq[t];
    const double dy = mesh.in_omega_c[t]
                          ? p1_l2sq_on_triangle(mesh, t, tri_values(mesh, t, u_fe.values))
                          : 0.0;
    rep.eta_y_elems[t] = h2 * h2 * dy + 0.5 * h2 * h * jy.sq[t];
    rep.rho_u_elems[t] =
        mesh.in_omega_c[t]
            ? p1_l2sq_on_triangle(mesh, t, tri_values(mesh, t, rho_u_nodal))
            : 0.0;
  }
  rep.eta_w = std::sqrt(rep.eta_w_elems.sum());
  rep.eta_y = std::sqrt(rep.eta_y_elems.sum());
  rep.rho_u_term = std::sqrt(rep.rho_u_elems.sum());

  const double cT = constants.c_T();
  const double lin = cT * rep.eta_w + rep.rho_u_term;
  rep.residual_bound = constants.gamma / alpha * lin * lin +
                       constants.sigma * cT * cT * rep.eta_y * rep.eta_y;
  rep.functional_bound =
      lin * lin / (2.0 * alpha) + cT * rep.eta_y * rep.data_misfit;
  rep.discrepancy_gap_bound = cT * rep.eta_y + std::sqrt(rep.residual_bound);
  rep.indicators = combine_indicators(
      {&rep.eta_w_elems, &rep.eta_y_elems, &rep.rho_u_elems});
  return rep;
}

EstimatorReport ivanov_report(const Problem& problem,
                              const TikhonovSolution& solution,
                              const EstimatorConstants& constants) {
  check_kind(solution, RegularizerKind::IvanovLinf, "ivanov_report");
  constants.validate();
  const Mesh& mesh = problem.mesh();
  const int nt = mesh.num_triangles();
  const double alpha = solution.reg.alpha;

  EstimatorReport rep;
  rep.kind = solution.reg.kind;
  rep.constants = constants;
  rep.data_misfit = problem.discrepancy_of(solution.y);

  const Eigen::VectorXd misfit_nodal = solution.y.values - problem.data().values;
  const FeFunction u_fe = solution.control_function(problem);
  const ElementJumpData jw = edge_jumps(mesh, solution.w.values);
  const ElementJumpData jy = edge_jumps(mesh, solution.y.values);

  rep.eta_w_elems.resize(nt);
  rep.eta_y_elems.resize(nt);
  rep.rho_u_elems.resize(nt);
  rep.eta_w_inf_elems.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const double h = mesh.h[t];
    const double h2 = h * h;
    const auto mis = tri_values(mesh, t, misfit_nodal);
    const double l1_data =
        mesh.in_omega_o[t] ? p1_l1_on_triangle(mesh, t, mis) : 0.0;
    rep.eta_w_elems[t] = log_weight(h) * h2 * (l1_data + jw.l1[t]);
    const double dy = mesh.in_omega_c[t]
                          ? p1_l2sq_on_triangle(mesh, t, tri_values(mesh, t, u_fe.values))
                          : 0.0;
    rep.eta_y_elems[t] = h2 * h2 * dy + 0.5 * h2 * h * jy.sq[t];
    rep.rho_u_elems[t] =
        mesh.in_omega_c[t]
            ? rho_u_l1_on_triangle(mesh, t, alpha, tri_values(mesh, t, u_fe.values),
                                   tri_values(mesh, t, solution.w.values))
            : 0.0;
    const double linf_data =
        mesh.in_omega_o[t]
            ? std::max({std::abs(mis[0]), std::abs(mis[1]), std::abs(mis[2])})
            : 0.0;
    rep.eta_w_inf_elems[t] = h2 * linf_data + h * jw.linf[t];
  }
  rep.eta_w = rep.eta_w_elems.sum();
  rep.eta_y = std::sqrt(rep.eta_y_elems.sum());
  const double logmin = log_weight(mesh.h_min());
  rep.eta_w_inf = logmin * logmin * rep.eta_w_inf_elems.maxCoeff();

  const double cT = constants.c_T();
  const double rho_u_l1 = rep.rho_u_elems.sum();
  const double w_inf = max_abs_on_ctrl(problem, solution.w.values);
  rep.rho_u_term = rho_u_l1 * (w_inf + constants.c_inf * rep.eta_w_inf);
  rep.bregman_term = 2.0 / alpha * cT * rep.eta_w;
  rep.residual_bound =
      2.0 * constants.gamma / alpha * (rep.rho_u_term + rep.bregman_term) +
      constants.sigma * cT * cT * rep.eta_y * rep.eta_y;
  rep.functional_bound = (rep.rho_u_term + rep.bregman_term) / alpha +
                         cT * rep.eta_y * rep.data_misfit;
  rep.discrepancy_gap_bound = cT * rep.eta_y + std::sqrt(rep.residual_bound);
  rep.indicators = combine_indicators(
      {&rep.eta_w_elems, &rep.eta_y_elems, &rep.rho_u_elems});
  return rep;
}

EstimatorReport sparse_report(const Problem& problem,
                              const TikhonovSolution& solution,
                              const EstimatorConstants& constants) {
  check_kind(solution, RegularizerKind::MeasureNorm, "sparse_report");
  constants.validate();
  const Mesh& mesh = problem.mesh();
  const int nt = mesh.num_triangles();
  const double alpha = solution.reg.alpha;

  EstimatorReport rep;
  rep.kind = solution.reg.kind;
  rep.constants = constants;
  rep.data_misfit = problem.discrepancy_of(solution.y);

  const Eigen::VectorXd misfit_nodal = solution.y.values - problem.data().values;
  const ElementJumpData jw = edge_jumps(mesh, solution.w.values);
  const ElementJumpData jy = edge_jumps(mesh, solution.y.values);

  rep.eta_y_elems.resize(nt);
  rep.eta_w_inf_elems.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const double h = mesh.h[t];
    // Dirac-data state estimator: jump terms only.
    rep.eta_y_elems[t] = h * h * h * jy.sq[t];
    const auto mis = tri_values(mesh, t, misfit_nodal);
    const double linf_data =
        mesh.in_omega_o[t]
            ? std::max({std::abs(mis[0]), std::abs(mis[1]), std::abs(mis[2])})
            : 0.0;
    rep.eta_w_inf_elems[t] = h * h * linf_data + h * jw.linf[t];
  }
  rep.eta_y = std::sqrt(rep.eta_y_elems.sum());
  rep.eta_w_elems = rep.eta_y_elems * (rep.data_misfit * rep.data_misfit);
  rep.eta_w = rep.eta_y * rep.data_misfit;
  const double logmin = log_weight(mesh.h_min());
  rep.eta_w_inf = logmin * logmin * rep.eta_w_inf_elems.maxCoeff();

  const double w_inf = max_abs_on_ctrl(problem, solution.w.values);
  const double bump = constants.c_inf * rep.eta_w_inf;
  const double denom = w_inf + bump;
  rep.eta_kappa =
      denom > 0.0 ? std::max((w_inf - alpha + bump) / denom, 0.0) : 0.0;
  rep.kappa_lower = 1.0 - rep.eta_kappa;

  const DiscreteMeasure& u = solution.u_measure;
  rep.pairing_uw = 0.0;
  for (int j = 0; j < static_cast<int>(u.vertex.size()); ++j)
    rep.pairing_uw += u.weight[j] * solution.w.values[u.vertex[j]];
  rep.complementarity = alpha * u.tv_norm() - rep.pairing_uw;

  const double quad = constants.c_dirac * rep.eta_y + rep.eta_kappa * rep.data_misfit;
  rep.residual_bound =
      2.0 * constants.gamma *
          (constants.c_3() * rep.eta_w + rep.eta_kappa * rep.pairing_uw) +
      constants.sigma * quad * quad;
  rep.functional_bound = constants.c_3() * rep.eta_w +
                         rep.eta_kappa * rep.pairing_uw +
                         4.0 * quad * rep.data_misfit;
  rep.discrepancy_gap_bound =
      constants.c_dirac * rep.eta_y + std::sqrt(std::max(0.0, rep.residual_bound));
  rep.indicators = combine_indicators(
      {&rep.eta_y_elems, &rep.eta_w_elems, &rep.eta_w_inf_elems});
  return rep;
}

EstimatorReport make_report(const Problem& problem,
                            const TikhonovSolution& solution,
                            const EstimatorConstants& constants) {
  switch (solution.reg.kind) {
    case RegularizerKind::HilbertL2: return hilbert_report(problem, solution, constants);
    case RegularizerKind::IvanovLinf: return ivanov_report(problem, solution, constants);
    case RegularizerKind::MeasureNorm: return sparse_report(problem, solution, constants);
  }
  throw std::invalid_argument("make_report: unknown kind");
}

double discrepancy_gap(const EstimatorReport& report) {
  const double c = report.kind == RegularizerKind::MeasureNorm
                       ? report.constants.c_dirac
                       : report.constants.c_T();
  return c * report.eta_y + std::sqrt(std::max(0.0, report.residual_bound));
}

double duality_gap_bound(const Problem& problem, const Regularizer& reg,
                         const ControlCandidate& v,
                         const Eigen::VectorXd& g_star_nodal) {
  reg.validate();
  const double alpha = reg.alpha;
  const auto& dofs = problem.dofs();

  // w* = A^{-1} C* g*: carries K* g* = w*|_{omega_c} in all three settings.
  Eigen::VectorXd rhs(dofs.num_free());
  const Eigen::VectorXd mg = problem.mass_obs() * g_star_nodal;
  for (int i = 0; i < dofs.num_free(); ++i) rhs[i] = mg[dofs.vertex_of_free[i]];
  const FeFunction w_star = problem.poisson().solve(rhs);

  FeFunction y_v;
  double R_v = 0.0, R_star = 0.0;
  switch (reg.kind) {
    case RegularizerKind::HilbertL2: {
      y_v = problem.state_of_ctrl(v.ctrl);
      const double un = problem.ctrl_norm(v.ctrl);
      R_v = 0.5 * alpha * un * un;
      Eigen::VectorXd w_free(dofs.num_free());
      for (int i = 0; i < dofs.num_free(); ++i)
        w_free[i] = w_star.values[dofs.vertex_of_free[i]];
      const Eigen::VectorXd m = problem.ctrl_load_matrix().transpose() * w_free;
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> gram(problem.ctrl_gram());
      if (gram.info() != Eigen::Success)
        throw std::runtime_error("duality_gap_bound: control gram factorization failed");
      R_star = 0.5 / alpha * m.dot(gram.solve(m));
      break;
    }
    case RegularizerKind::IvanovLinf: {
      if (v.ctrl.lpNorm<Eigen::Infinity>() > 1.0 / alpha * (1.0 + 1e-12))
        return std::numeric_limits<double>::infinity();
      y_v = problem.state_of_ctrl(v.ctrl);
      double l1 = 0.0;
      for (int t = 0; t < problem.mesh().num_triangles(); ++t)
        if (problem.mesh().in_omega_c[t])
          l1 += p1_l1_on_triangle(problem.mesh(), t,
                                  tri_values(problem.mesh(), t, w_star.values));
      R_star = l1 / alpha;
      break;
    }
    case RegularizerKind::MeasureNorm: {
      double winf = 0.0;
      for (int a : problem.atom_vertices())
        winf = std::max(winf, std::abs(w_star.values[a]));
      if (winf > alpha * (1.0 + 1e-9))
        throw std::invalid_argument(
            "duality_gap_bound: infeasible certificate, ||K* g*||_inf = " +
            std::to_string(winf) + " > alpha; rescale by kappa");
      y_v = problem.state_of_atoms(v.atoms);
      R_v = alpha * v.atoms.lpNorm<1>();
      break;
    }
  }

  const double G_Kv = [&] {
    const double d = problem.discrepancy_of(y_v);
    return 0.5 * d * d;
  }();
  const double gnorm = problem.obs_norm(g_star_nodal);
  const double G_star =
      0.5 * gnorm * gnorm - problem.obs_inner(g_star_nodal, problem.data().values);
  return 2.0 * (R_v + R_star + G_Kv + G_star);
}

std::string EstimatorReport::to_json(bool with_elements) const {
  nlohmann::json j;
  j["regularizer"] = to_string(kind);
  j["totals"] = {{"eta_w", eta_w},
                 {"eta_y", eta_y},
                 {"eta_w_inf", eta_w_inf},
                 {"eta_kappa", eta_kappa},
                 {"kappa_lower", kappa_lower},
                 {"rho_u_term", rho_u_term},
                 {"bregman_term", bregman_term},
                 {"pairing_uw", pairing_uw},
                 {"complementarity", complementarity},
                 {"data_misfit", data_misfit},
                 {"residual_bound", residual_bound},
                 {"functional_bound", functional_bound},
                 {"discrepancy_gap_bound", discrepancy_gap_bound}};
  j["constants"] = {{"c_interp", constants.c_interp},
                    {"c_stab", constants.c_stab},
                    {"c_dirac", constants.c_dirac},
                    {"c_inf", constants.c_inf},
                    {"sigma", constants.sigma},
                    {"gamma", constants.gamma}};
  j["calibration"] = {{"residual", calibration_residual},
                      {"functional", calibration_functional}};
  if (with_elements) {
    auto vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["elements"] = {{"indicators", vec(indicators)},
                     {"eta_w", vec(eta_w_elems)},
                     {"eta_y", vec(eta_y_elems)},
                     {"eta_w_inf", vec(eta_w_inf_elems)},
                     {"rho_u", vec(rho_u_elems)}};
  }
  return j.dump(2);
}

}  // namespace adapttikh
