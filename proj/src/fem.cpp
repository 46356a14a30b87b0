#include "adapttikh/fem.hpp"

#include <stdexcept>

namespace adapttikh {

DofMap make_dof_map(const Mesh& mesh) {
  DofMap map;
  map.free_of_vertex.assign(mesh.num_vertices(), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.boundary_vertex[v]) {
      map.free_of_vertex[v] = static_cast<int>(map.vertex_of_free.size());
      map.vertex_of_free.push_back(v);
    }
  return map;
}

std::vector<int> control_sites(const Mesh& mesh) {
  std::vector<char> in_ctrl(mesh.num_vertices(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (mesh.in_omega_c[t])
      for (int i : mesh.triangles[t]) in_ctrl[i] = 1;
  std::vector<int> sites;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (in_ctrl[v]) sites.push_back(v);
  return sites;
}

std::vector<int> atom_sites(const Mesh& mesh) {
  std::vector<int> sites;
  for (int v : control_sites(mesh))
    if (!mesh.boundary_vertex[v]) sites.push_back(v);
  return sites;
}

namespace {

using Trip = Eigen::Triplet<double>;

void add_local_stiffness(const Mesh& mesh, int t, const DofMap& dofs,
                         std::vector<Trip>& trips) {
  const double area = mesh.triangle_area(t);
  if (area <= 0.0) throw std::runtime_error("assemble: degenerate triangle");
  const auto g = mesh.hat_gradients(t);
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) {
    const int fi = dofs.free_of_vertex[tri[i]];
    if (fi < 0) continue;
    for (int j = 0; j < 3; ++j) {
      const int fj = dofs.free_of_vertex[tri[j]];
      if (fj < 0) continue;
      trips.emplace_back(fi, fj, area * dot(g[i], g[j]));
    }
  }
}

void add_local_mass(const Mesh& mesh, int t, std::vector<Trip>& trips) {
  const double area = mesh.triangle_area(t);
  if (area <= 0.0) throw std::runtime_error("assemble: degenerate triangle");
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      trips.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
}

}  // namespace

SparseOperator assemble(const Mesh& mesh, OperatorKind kind) {
  SparseOperator op;
  op.kind = kind;
  std::vector<Trip> trips;
  trips.reserve(9 * mesh.num_triangles());
  if (kind == OperatorKind::Stiffness) {
    op.dofs = make_dof_map(mesh);
    for (int t = 0; t < mesh.num_triangles(); ++t)
      add_local_stiffness(mesh, t, op.dofs, trips);
    op.matrix.resize(op.dofs.num_free(), op.dofs.num_free());
  } else {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (kind == OperatorKind::ObservationMass && !mesh.in_omega_o[t]) continue;
      if (kind == OperatorKind::ControlMass && !mesh.in_omega_c[t]) continue;
      add_local_mass(mesh, t, trips);
    }
    op.matrix.resize(mesh.num_vertices(), mesh.num_vertices());
  }
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

PoissonSolver::PoissonSolver(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)) {
  auto op = assemble(*mesh_, OperatorKind::Stiffness);
  dofs_ = std::move(op.dofs);
  stiffness_ = std::move(op.matrix);
  llt_.compute(stiffness_);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("PoissonSolver: Cholesky factorization failed");
}

Eigen::VectorXd PoissonSolver::solve_free(const Eigen::VectorXd& rhs_free) const {
  if (rhs_free.size() != dofs_.num_free())
    throw std::invalid_argument("solve_poisson: rhs not indexed over free vertices");
  Eigen::VectorXd y = llt_.solve(rhs_free);
  const double rhs_norm = rhs_free.norm();
  if (rhs_norm > 0.0) {
    const double res = (stiffness_ * y - rhs_free).norm() / rhs_norm;
    if (res > 1e-10)
      throw std::runtime_error("solve_poisson: residual " + std::to_string(res) +
                               " exceeds tolerance");
  }
  return y;
}

FeFunction PoissonSolver::solve(const Eigen::VectorXd& rhs_free) const {
  Eigen::VectorXd y = solve_free(rhs_free);
  FeFunction f(mesh_);
  for (int i = 0; i < dofs_.num_free(); ++i) f.values[dofs_.vertex_of_free[i]] = y[i];
  return f;
}

FeFunction solve_poisson(std::shared_ptr<const Mesh> mesh,
                         const Eigen::VectorXd& rhs_free) {
  return PoissonSolver(std::move(mesh)).solve(rhs_free);
}

Eigen::VectorXd measure_load(const DofMap& dofs, const DiscreteMeasure& u) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.num_free());
  for (int j = 0; j < static_cast<int>(u.vertex.size()); ++j) {
    const int f = dofs.free_of_vertex[u.vertex[j]];
    if (f < 0)
      throw std::invalid_argument("measure_load: atom on a boundary vertex");
    load[f] += u.weight[j];
  }
  return load;
}

Problem::Problem(std::shared_ptr<const Mesh> mesh, FeFunction g_delta)
    : mesh_(std::move(mesh)), g_delta_(std::move(g_delta)) {
  if (g_delta_.values.size() != mesh_->num_vertices())
    throw std::invalid_argument("Problem: data size mismatch");
  poisson_ = std::make_unique<PoissonSolver>(mesh_);
  mass_obs_ = assemble(*mesh_, OperatorKind::ObservationMass).matrix;
  mass_ctrl_ = assemble(*mesh_, OperatorKind::ControlMass).matrix;

  const int nv = mesh_->num_vertices();
  ctrl_vertices_ = control_sites(*mesh_);
  ctrl_of_vertex_.assign(nv, -1);
  for (int j = 0; j < static_cast<int>(ctrl_vertices_.size()); ++j)
    ctrl_of_vertex_[ctrl_vertices_[j]] = j;
  atom_vertices_ = atom_sites(*mesh_);
  if (atom_vertices_.empty())
    throw std::invalid_argument("Problem: control region has no interior vertex");

  const int nc = static_cast<int>(ctrl_vertices_.size());
  const int nf = dofs().num_free();
  std::vector<Trip> gt, bt;
  for (int k = 0; k < mass_ctrl_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mass_ctrl_, k); it; ++it) {
      const int ci = ctrl_of_vertex_[it.row()];
      const int cj = ctrl_of_vertex_[it.col()];
      if (ci >= 0 && cj >= 0) gt.emplace_back(ci, cj, it.value());
      const int fi = dofs().free_of_vertex[it.row()];
      if (fi >= 0 && cj >= 0) bt.emplace_back(fi, cj, it.value());
    }
  ctrl_gram_.resize(nc, nc);
  ctrl_gram_.setFromTriplets(gt.begin(), gt.end());
  B_.resize(nf, nc);
  B_.setFromTriplets(bt.begin(), bt.end());

  std::vector<Trip> pt;
  for (int j = 0; j < static_cast<int>(atom_vertices_.size()); ++j)
    pt.emplace_back(dofs().free_of_vertex[atom_vertices_[j]], j, 1.0);
  P_.resize(nf, static_cast<int>(atom_vertices_.size()));
  P_.setFromTriplets(pt.begin(), pt.end());
}

FeFunction Problem::state_of_ctrl(const Eigen::VectorXd& u_ctrl) const {
  return poisson_->solve(B_ * u_ctrl);
}

FeFunction Problem::state_of_atoms(const Eigen::VectorXd& u_atoms) const {
  return poisson_->solve(P_ * u_atoms);
}

FeFunction Problem::adjoint_of(const FeFunction& y) const {
  const Eigen::VectorXd r = mass_obs_ * (y.values - g_delta_.values);
  Eigen::VectorXd rhs(dofs().num_free());
  for (int i = 0; i < dofs().num_free(); ++i) rhs[i] = -r[dofs().vertex_of_free[i]];
  return poisson_->solve(rhs);
}

double Problem::obs_norm(const Eigen::VectorXd& nodal) const {
  return std::sqrt(std::max(0.0, nodal.dot(mass_obs_ * nodal)));
}

double Problem::obs_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return a.dot(mass_obs_ * b);
}

double Problem::discrepancy_of(const FeFunction& y) const {
  return obs_norm(y.values - g_delta_.values);
}

double Problem::ctrl_norm(const Eigen::VectorXd& u_ctrl) const {
  return std::sqrt(std::max(0.0, u_ctrl.dot(ctrl_gram_ * u_ctrl)));
}

DiscreteMeasure Problem::make_measure(const Eigen::VectorXd& u_atoms) const {
  DiscreteMeasure m;
  m.mesh = mesh_;
  m.vertex = atom_vertices_;
  m.weight = u_atoms;
  return m;
}

FeFunction prolongate(const FeFunction& f, const RefinementResult& refined) {
  FeFunction out(refined.mesh);
  for (int v = 0; v < refined.mesh->num_vertices(); ++v) {
    const auto [a, b] = refined.vertex_parents[v];
    out.values[v] = 0.5 * (f.values[a] + f.values[b]);
  }
  return out;
}

}  // namespace adapttikh
