#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "adapttikh/mesh.hpp"

namespace adapttikh {

/// Piecewise-linear function as one coefficient per mesh vertex.
struct FeFunction {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;

  FeFunction() = default;
  explicit FeFunction(std::shared_ptr<const Mesh> m)
      : mesh(std::move(m)), values(Eigen::VectorXd::Zero(mesh->num_vertices())) {}
  FeFunction(std::shared_ptr<const Mesh> m, Eigen::VectorXd v)
      : mesh(std::move(m)), values(std::move(v)) {}

  std::span<const double> span() const {
    return {values.data(), static_cast<size_t>(values.size())};
  }
};

/// Linear combination of Dirac measures sitting on interior mesh vertices
/// inside the control region.
struct DiscreteMeasure {
  std::shared_ptr<const Mesh> mesh;
  std::vector<int> vertex;   // distinct interior vertex ids in omega_c
  Eigen::VectorXd weight;

  double tv_norm() const { return weight.lpNorm<1>(); }
  double signed_mass() const { return weight.sum(); }
};

/// Maps mesh vertices to free (non-Dirichlet) indices and back.
struct DofMap {
  std::vector<int> free_of_vertex;  // -1 on boundary vertices
  std::vector<int> vertex_of_free;

  int num_free() const { return static_cast<int>(vertex_of_free.size()); }
};

DofMap make_dof_map(const Mesh& mesh);

/// Vertices carried by elements of omega_c (the L2/Linf control dofs).
std::vector<int> control_sites(const Mesh& mesh);
/// Interior vertices in omega_c: the admissible Dirac atom sites.
std::vector<int> atom_sites(const Mesh& mesh);

enum class OperatorKind { Stiffness, Mass, ObservationMass, ControlMass };

/// Sparse symmetric P1 operator. Stiffness is assembled over free vertices
/// (Dirichlet rows/columns eliminated); the mass variants over all vertices.
struct SparseOperator {
  OperatorKind kind;
  Eigen::SparseMatrix<double> matrix;
  DofMap dofs;  // populated for Stiffness only
};

SparseOperator assemble(const Mesh& mesh, OperatorKind kind);

/// Homogeneous-Dirichlet Poisson solves on one mesh, factorized once.
class PoissonSolver {
public:
  explicit PoissonSolver(std::shared_ptr<const Mesh> mesh);

  /// Galerkin solution for a load over free vertices; boundary values zero.
  FeFunction solve(const Eigen::VectorXd& rhs_free) const;
  Eigen::VectorXd solve_free(const Eigen::VectorXd& rhs_free) const;

  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  const DofMap& dofs() const { return dofs_; }
  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

private:
  std::shared_ptr<const Mesh> mesh_;
  DofMap dofs_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

FeFunction solve_poisson(std::shared_ptr<const Mesh> mesh,
                         const Eigen::VectorXd& rhs_free);

/// Load vector of a discrete measure: u_j at the free index of x_j
/// (nodal basis duality e_i(x_j) = delta_ij).
Eigen::VectorXd measure_load(const DofMap& dofs, const DiscreteMeasure& u);

/// Discrete realization of the operators A, B, C and the data for one mesh;
/// shared by the Tikhonov solvers and the error estimators.
class Problem {
public:
  Problem(std::shared_ptr<const Mesh> mesh, FeFunction g_delta);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const PoissonSolver& poisson() const { return *poisson_; }
  const DofMap& dofs() const { return poisson_->dofs(); }
  const FeFunction& data() const { return g_delta_; }
  const Eigen::SparseMatrix<double>& mass_obs() const { return mass_obs_; }
  const Eigen::SparseMatrix<double>& mass_ctrl() const { return mass_ctrl_; }

  /// Vertices carried by elements of omega_c: the L2/Linf control dofs.
  const std::vector<int>& ctrl_vertices() const { return ctrl_vertices_; }
  const std::vector<int>& ctrl_of_vertex() const { return ctrl_of_vertex_; }
  /// Interior vertices in omega_c: the admissible Dirac atom sites.
  const std::vector<int>& atom_vertices() const { return atom_vertices_; }

  /// Gram matrix of the control dofs in L2(omega_c).
  const Eigen::SparseMatrix<double>& ctrl_gram() const { return ctrl_gram_; }
  /// B in coefficients: load on free vertices induced by a control function.
  const Eigen::SparseMatrix<double>& ctrl_load_matrix() const { return B_; }
  /// Atom injection: columns are unit loads at atom sites.
  const Eigen::SparseMatrix<double>& atom_load_matrix() const { return P_; }

  FeFunction state_of_ctrl(const Eigen::VectorXd& u_ctrl) const;
  FeFunction state_of_atoms(const Eigen::VectorXd& u_atoms) const;
  /// Adjoint state: solves A w = -C*(C y - g_delta).
  FeFunction adjoint_of(const FeFunction& y) const;

  double obs_norm(const Eigen::VectorXd& nodal) const;
  double obs_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  /// || C y - g_delta ||_{L2(omega_o)}
  double discrepancy_of(const FeFunction& y) const;
  double ctrl_norm(const Eigen::VectorXd& u_ctrl) const;

  DiscreteMeasure make_measure(const Eigen::VectorXd& u_atoms) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  FeFunction g_delta_;
  std::unique_ptr<PoissonSolver> poisson_;
  Eigen::SparseMatrix<double> mass_obs_, mass_ctrl_;
  std::vector<int> ctrl_vertices_, ctrl_of_vertex_, atom_vertices_;
  Eigen::SparseMatrix<double> ctrl_gram_, B_, P_;
};

/// Exact prolongation of a P1 function to a bisection refinement.
FeFunction prolongate(const FeFunction& f, const RefinementResult& refined);

}  // namespace adapttikh
