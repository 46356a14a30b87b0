#include "adapttikh/tikhonov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace adapttikh {

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::HilbertL2: return "l2";
    case RegularizerKind::IvanovLinf: return "ivanov";
    case RegularizerKind::MeasureNorm: return "measure";
  }
  return "?";
}

RegularizerKind regularizer_from_string(const std::string& name) {
  if (name == "l2") return RegularizerKind::HilbertL2;
  if (name == "ivanov") return RegularizerKind::IvanovLinf;
  if (name == "measure") return RegularizerKind::MeasureNorm;
  throw std::invalid_argument("unknown regularizer '" + name +
                              "' (expected l2 | ivanov | measure)");
}

FeFunction TikhonovSolution::control_function(const Problem& problem) const {
  FeFunction f(problem.mesh_ptr());
  if (reg.kind == RegularizerKind::MeasureNorm)
    throw std::logic_error("control_function: measure control is not a P1 function");
  const auto& cv = problem.ctrl_vertices();
  for (int j = 0; j < static_cast<int>(cv.size()); ++j) f.values[cv[j]] = u_ctrl[j];
  return f;
}

namespace {

Eigen::VectorXd restrict_free(const Problem& p, const Eigen::VectorXd& nodal) {
  const auto& d = p.dofs();
  Eigen::VectorXd out(d.num_free());
  for (int i = 0; i < d.num_free(); ++i) out[i] = nodal[d.vertex_of_free[i]];
  return out;
}

Eigen::VectorXd extend_free(const Problem& p, const Eigen::VectorXd& free) {
  const auto& d = p.dofs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.mesh().num_vertices());
  for (int i = 0; i < d.num_free(); ++i) out[d.vertex_of_free[i]] = free[i];
  return out;
}

// One application of S* C* C S for a load-producing matrix Q: returns
// Q^T A^{-1} R M_o R^T A^{-1} (Q u), reusing the state if requested.
struct NormalOperator {
  const Problem& p;
  const Eigen::SparseMatrix<double>& Q;

  Eigen::VectorXd state_free(const Eigen::VectorXd& u) const {
    return p.poisson().solve_free(Q * u);
  }
  Eigen::VectorXd from_state_free(const Eigen::VectorXd& y_free) const {
    const Eigen::VectorXd m = p.mass_obs() * extend_free(p, y_free);
    return Q.transpose() * p.poisson().solve_free(restrict_free(p, m));
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    return from_state_free(state_free(u));
  }
  // Q^T A^{-1} R (M_o g): the data term of the normal equations.
  Eigen::VectorXd data_term() const {
    const Eigen::VectorXd m = p.mass_obs() * p.data().values;
    return Q.transpose() * p.poisson().solve_free(restrict_free(p, m));
  }
  double lipschitz(int iterations = 20) const {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> nrm;
    Eigen::VectorXd v(Q.cols());
    for (int i = 0; i < v.size(); ++i) v[i] = nrm(rng);
    if (v.norm() == 0.0) v.setOnes();
    v /= v.norm();
    double lam = 0.0;
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd tv = apply(v);
      lam = tv.norm();
      if (lam <= 0.0) return 0.0;
      v = tv / lam;
    }
    return 1.05 * lam;
  }
};

}  // namespace

TikhonovSolution solve_hilbert(const Problem& problem, double alpha,
                               const SolverOptions& opts) {
  Regularizer reg{RegularizerKind::HilbertL2, alpha};
  reg.validate();
  const NormalOperator op{problem, problem.ctrl_load_matrix()};
  const Eigen::SparseMatrix<double>& G = problem.ctrl_gram();
  const int n = static_cast<int>(problem.ctrl_vertices().size());
  const Eigen::VectorXd b = op.data_term();

  const Eigen::VectorXd jacobi =
      (alpha * G.diagonal().array()).max(1e-300).matrix();
  auto apply = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return alpha * (G * u) + op.apply(u);
  };

  Eigen::VectorXd u =
      opts.warm_start ? *opts.warm_start : Eigen::VectorXd::Zero(n);
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10000;
  const double tol = 1e-11 * opts.tolerance_scale * std::max(b.norm(), 1e-300);
  int it = 0;
  Eigen::VectorXd r = b - apply(u);
  if (b.norm() == 0.0) {
    u.setZero();
    r.setZero();
  } else if (r.norm() > tol) {
    Eigen::VectorXd z = r.cwiseQuotient(jacobi);
    Eigen::VectorXd d = z;
    double rz = r.dot(z);
    for (; it < max_it; ++it) {
      const Eigen::VectorXd ad = apply(d);
      const double da = d.dot(ad);
      if (da <= 0.0) break;  // operator is SPD; this only triggers at roundoff
      const double step = rz / da;
      u += step * d;
      r -= step * ad;
      if (r.norm() <= tol) break;
      z = r.cwiseQuotient(jacobi);
      const double rz_new = r.dot(z);
      d = z + (rz_new / rz) * d;
      rz = rz_new;
    }
    if (r.norm() > tol)
      throw NumericalFailure("solve_hilbert: CG stagnation", r.norm(), it);
  }

  TikhonovSolution sol;
  sol.reg = reg;
  sol.u_ctrl = u;
  sol.y = problem.state_of_ctrl(u);
  sol.w = problem.adjoint_of(sol.y);
  sol.discrepancy = problem.discrepancy_of(sol.y);
  const double un = problem.ctrl_norm(u);
  sol.J_value = 0.5 * sol.discrepancy * sol.discrepancy + 0.5 * alpha * un * un;
  const Eigen::VectorXd btw =
      problem.ctrl_load_matrix().transpose() * restrict_free(problem, sol.w.values);
  sol.optimality_residual =
      (alpha * (G * u) - btw).norm() / std::max(1.0, b.norm());
  sol.iterations = it;
  return sol;
}

TikhonovSolution solve_ivanov(const Problem& problem, double alpha,
                              const SolverOptions& opts) {
  Regularizer reg{RegularizerKind::IvanovLinf, alpha};
  reg.validate();
  const NormalOperator op{problem, problem.ctrl_load_matrix()};
  const double bound = 1.0 / alpha;
  const int n = static_cast<int>(problem.ctrl_vertices().size());
  const Eigen::VectorXd b = op.data_term();

  auto clamp = [&](Eigen::VectorXd v) {
    return v.cwiseMax(-bound).cwiseMin(bound);
  };
  auto grad_at = [&](const Eigen::VectorXd& u, Eigen::VectorXd* y_free) {
    Eigen::VectorXd yf = op.state_free(u);
    Eigen::VectorXd g = op.from_state_free(yf) - b;
    if (y_free) *y_free = std::move(yf);
    return g;
  };
  auto value_of_state = [&](const Eigen::VectorXd& y_free) {
    const Eigen::VectorXd diff = extend_free(problem, y_free) - problem.data().values;
    return 0.5 * diff.dot(problem.mass_obs() * diff);
  };

  Eigen::VectorXd u = clamp(opts.warm_start ? *opts.warm_start
                                            : Eigen::VectorXd::Zero(n));
  Eigen::VectorXd y_free;
  Eigen::VectorXd g = grad_at(u, &y_free);
  double f = value_of_state(y_free);
  const double g0 = g.norm();
  const double tol = 1e-8 * (1.0 + g0) * opts.tolerance_scale;
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 20000;

  // Spectral projected gradient with a nonmonotone (Grippo) line search.
  std::deque<double> recent{f};
  double lambda = 1.0 / std::max(g0, 1e-12);
  int it = 0;
  double pg = (clamp(u - g) - u).norm();
  for (; it < max_it && pg > tol; ++it) {
    const Eigen::VectorXd d = clamp(u - lambda * g) - u;
    const double gd = g.dot(d);
    if (d.norm() == 0.0 || gd >= 0.0) break;
    const double fref = *std::max_element(recent.begin(), recent.end());
    double t = 1.0;
    Eigen::VectorXd u_new, g_new, y_new;
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      u_new = clamp(u + t * d);
      g_new = grad_at(u_new, &y_new);
      f_new = value_of_state(y_new);
      if (f_new <= fref + 1e-4 * t * gd) break;
      t *= 0.5;
    }
    const Eigen::VectorXd s = u_new - u;
    const Eigen::VectorXd dg = g_new - g;
    const double sdg = s.dot(dg);
    lambda = sdg > 0.0 ? std::clamp(s.dot(s) / sdg, 1e-12, 1e12)
                       : 1.0 / std::max(g_new.norm(), 1e-12);
    u = std::move(u_new);
    g = std::move(g_new);
    y_free = std::move(y_new);
    f = f_new;
    recent.push_back(f);
    if (recent.size() > 10) recent.pop_front();
    pg = (clamp(u - g) - u).norm();
  }
  if (pg > tol)
    throw NumericalFailure("solve_ivanov: projected gradient did not converge",
                           pg, it);

  TikhonovSolution sol;
  sol.reg = reg;
  sol.u_ctrl = u;
  sol.y = problem.poisson().solve(problem.ctrl_load_matrix() * u);
  sol.w = problem.adjoint_of(sol.y);
  sol.discrepancy = problem.discrepancy_of(sol.y);
  sol.J_value = 0.5 * sol.discrepancy * sol.discrepancy;
  // Variational-inequality defect over vertex-supported directions.
  const Eigen::VectorXd btw =
      problem.ctrl_load_matrix().transpose() * restrict_free(problem, sol.w.values);
  double vi = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = btw[j];
    vi = std::max(vi, t > 0.0 ? (bound - u[j]) * t : (-bound - u[j]) * t);
  }
  sol.optimality_residual = vi;
  sol.iterations = it;
  return sol;
}

double sparse_objective(const Problem& problem, double alpha,
                        const Eigen::VectorXd& u_atoms) {
  const FeFunction y = problem.state_of_atoms(u_atoms);
  const double d = problem.discrepancy_of(y);
  return 0.5 * d * d + alpha * u_atoms.lpNorm<1>();
}

namespace {

double sparse_gap_from_state(const Problem& problem, double alpha,
                             const Eigen::VectorXd& u_atoms,
                             const Eigen::VectorXd& w_atoms,
                             const Eigen::VectorXd& r_nodal) {
  const double rr = r_nodal.dot(problem.mass_obs() * r_nodal);
  const double maxw = w_atoms.size() ? w_atoms.lpNorm<Eigen::Infinity>() : 0.0;
  const double kappa = maxw > alpha ? alpha / maxw : 1.0;
  const double rg = r_nodal.dot(problem.mass_obs() * problem.data().values);
  return alpha * u_atoms.lpNorm<1>() + 0.5 * (1.0 + kappa * kappa) * rr +
         kappa * rg;
}

}  // namespace

double sparse_duality_gap(const Problem& problem, double alpha,
                          const Eigen::VectorXd& u_atoms) {
  const NormalOperator op{problem, problem.atom_load_matrix()};
  const Eigen::VectorXd yf = op.state_free(u_atoms);
  const Eigen::VectorXd r = extend_free(problem, yf) - problem.data().values;
  const Eigen::VectorXd w_atoms = op.data_term() - op.from_state_free(yf);
  return sparse_gap_from_state(problem, alpha, u_atoms, w_atoms, r);
}

TikhonovSolution solve_sparse(const Problem& problem, double alpha,
                              const SolverOptions& opts) {
  Regularizer reg{RegularizerKind::MeasureNorm, alpha};
  reg.validate();
  const NormalOperator op{problem, problem.atom_load_matrix()};
  const int n = static_cast<int>(problem.atom_vertices().size());
  const Eigen::VectorXd b = op.data_term();

  auto shrink = [&](Eigen::VectorXd v, double thr) {
    for (int i = 0; i < v.size(); ++i) {
      const double a = std::abs(v[i]);
      v[i] = a <= thr ? 0.0 : (v[i] > 0.0 ? v[i] - thr : v[i] + thr);
    }
    return v;
  };

  const double L = op.lipschitz();
  const double gap_tol_factor = 1e-9 * opts.tolerance_scale;
  TikhonovSolution sol;
  sol.reg = reg;

  Eigen::VectorXd x = opts.warm_start ? *opts.warm_start : Eigen::VectorXd::Zero(n);
  double gap = 0.0, J = 0.0;
  int it = 0;
  bool converged = false;
  if (L <= 0.0) {
    x.setZero();
    converged = true;
    J = sparse_objective(problem, alpha, x);
  } else {
    const double step = 1.0 / L;
    Eigen::VectorXd z = x;
    double t = 1.0;
    const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 50000;
    for (; it < max_it; ++it) {
      const Eigen::VectorXd grad_z = op.apply(z) - b;
      Eigen::VectorXd x_new = shrink(z - step * grad_z, step * alpha);
      if ((z - x_new).dot(x_new - x) > 0.0) {
        t = 1.0;  // adaptive restart
        z = x_new;
      } else {
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = x_new + ((t - 1.0) / t_new) * (x_new - x);
        t = t_new;
      }
      x = std::move(x_new);
      if (it % 10 == 0 || it == max_it - 1) {
        const Eigen::VectorXd yf = op.state_free(x);
        const Eigen::VectorXd r = extend_free(problem, yf) - problem.data().values;
        const Eigen::VectorXd w_atoms = b - op.from_state_free(yf);
        J = 0.5 * r.dot(problem.mass_obs() * r) + alpha * x.lpNorm<1>();
        gap = sparse_gap_from_state(problem, alpha, x, w_atoms, r);
        if (gap <= gap_tol_factor * (1.0 + J)) {
          converged = true;
          break;
        }
      }
    }
    if (!converged)
      throw NumericalFailure("solve_sparse: FISTA did not reach the gap tolerance",
                             gap, it);
  }

  sol.u_measure = problem.make_measure(x);
  sol.y = problem.state_of_atoms(x);
  sol.w = problem.adjoint_of(sol.y);
  sol.discrepancy = problem.discrepancy_of(sol.y);
  sol.J_value = 0.5 * sol.discrepancy * sol.discrepancy + alpha * x.lpNorm<1>();
  sol.optimality_residual = gap;
  sol.iterations = it;
  return sol;
}

TikhonovSolution solve(const Problem& problem, const Regularizer& reg,
                       const SolverOptions& opts) {
  switch (reg.kind) {
    case RegularizerKind::HilbertL2: return solve_hilbert(problem, reg.alpha, opts);
    case RegularizerKind::IvanovLinf: return solve_ivanov(problem, reg.alpha, opts);
    case RegularizerKind::MeasureNorm: return solve_sparse(problem, reg.alpha, opts);
  }
  throw std::invalid_argument("solve: unknown regularizer kind");
}

}  // namespace adapttikh
