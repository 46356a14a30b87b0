#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "adapttikh/fem.hpp"

namespace adapttikh {

enum class RegularizerKind { HilbertL2, IvanovLinf, MeasureNorm };

std::string to_string(RegularizerKind kind);
RegularizerKind regularizer_from_string(const std::string& name);

struct Regularizer {
  RegularizerKind kind = RegularizerKind::HilbertL2;
  double alpha = 1e-2;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("regularizer: alpha must be > 0");
  }
};

/// Thrown when an iterative solver exhausts its budget; carries the last
/// residual for diagnostics.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string& what, double residual, int iterations)
      : std::runtime_error(what + " (residual " + std::to_string(residual) +
                           " after " + std::to_string(iterations) + " iterations)"),
        residual(residual),
        iterations(iterations) {}
  double residual;
  int iterations;
};

/// Minimizer of the discrete Tikhonov problem for one regularizer on one
/// mesh. The control lives in u_ctrl (coefficients over Problem's control
/// vertices) for the L2 and Linf regularizers and in u_measure for the
/// measure-norm regularizer.
struct TikhonovSolution {
  Regularizer reg;
  Eigen::VectorXd u_ctrl;
  DiscreteMeasure u_measure;
  FeFunction y;
  FeFunction w;
  double J_value = 0.0;
  double discrepancy = 0.0;
  double optimality_residual = 0.0;
  int iterations = 0;

  /// Control scattered to a P1 function (zero outside the control dofs).
  FeFunction control_function(const Problem& problem) const;
};

struct SolverOptions {
  int max_iterations = 0;              // 0: per-solver default
  double tolerance_scale = 1.0;        // <1 tightens the stopping tests
  const Eigen::VectorXd* warm_start = nullptr;
};

/// Quadratic L2(omega_c) regularization: reduced normal equations in u,
/// solved by preconditioned CG (every apply costs two Poisson solves).
TikhonovSolution solve_hilbert(const Problem& problem, double alpha,
                               const SolverOptions& opts = {});

/// Ivanov regularization (|u| <= 1/alpha pointwise): projected gradient
/// with Barzilai-Borwein steps and nodal clamping.
TikhonovSolution solve_ivanov(const Problem& problem, double alpha,
                              const SolverOptions& opts = {});

/// Measure-norm (sparsity) regularization: FISTA with restart on the atom
/// coefficients, stopped by the discrete duality gap.
TikhonovSolution solve_sparse(const Problem& problem, double alpha,
                              const SolverOptions& opts = {});

TikhonovSolution solve(const Problem& problem, const Regularizer& reg,
                       const SolverOptions& opts = {});

/// Discrete duality gap used as the FISTA stopping test; nonnegative for
/// any coefficients by weak duality.
double sparse_duality_gap(const Problem& problem, double alpha,
                          const Eigen::VectorXd& u_atoms);

double sparse_objective(const Problem& problem, double alpha,
                        const Eigen::VectorXd& u_atoms);

}  // namespace adapttikh
