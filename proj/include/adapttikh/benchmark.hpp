#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adapttikh/adaptive.hpp"
#include "adapttikh/estimators.hpp"
#include "adapttikh/fem.hpp"

namespace adapttikh {

/// Ring-source test problem on the unit disk: the state is the truncated
/// logarithm, the source a uniform line measure on the circle of radius
/// rho, and the data is constructed so that the source is the exact
/// minimizer of the measure-norm Tikhonov problem at the given alpha.
struct RingBenchmark {
  double rho = 0.5;
  double alpha = 1e-2;
  double delta = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// y(x) = -(1/2pi) ln(max{rho, |x|}).
double exact_state(double rho, Vec2 point);

/// Total-variation mass of the ring source: the rho-dependence cancels.
double exact_source_mass(double rho);

/// Radial profile of the perturbation making the ring the exact minimizer.
double ring_phi(double rho, double r);

/// exact_state + alpha * phi(|x|).
double exact_data(double rho, double alpha, Vec2 point);

FeFunction interpolate_exact_state(std::shared_ptr<const Mesh> mesh, double rho);
FeFunction interpolate_exact_data(std::shared_ptr<const Mesh> mesh, double rho,
                                  double alpha);

/// Adds a nodal Gaussian perturbation rescaled so that its L2(omega_o)
/// norm equals delta exactly; deterministic for a fixed seed.
FeFunction add_noise(const FeFunction& g, double delta, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x), skipping non-positive
/// entries. Returns 0 when fewer than two usable points remain.
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Column-oriented result table with named scalar annotations.
struct StudyTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> notes;  // fitted slopes etc.
  std::vector<std::string> flags;       // per-row status, empty = ok

  double at(int row, const std::string& column) const;
  std::string to_csv() const;
  std::string to_json() const;
};

enum class RefinementMode { Uniform, Adaptive };

struct RateStudyOptions {
  int levels = 5;
  RefinementMode refinement = RefinementMode::Uniform;
  int n_boundary = 16;
  int initial_levels = 2;  // uniform refinements of the fan mesh
  double theta_mark = 0.5;
  EstimatorConstants constants;
  bool calibrate = true;  // fit per-family factors on the coarsest level
};

/// Solves the sparsity benchmark with its closed-form data on a refinement
/// sequence and compares estimator totals with the true errors against a
/// reference two uniform levels beyond the finest mesh.
/// Columns: level ndof h_min h_max true_res_err true_J_err eta_w eta_y
/// eta_w_inf eta_kappa residual_bound functional_bound discrepancy_gap
/// residual_bound_cal functional_bound_cal J_value discrepancy.
StudyTable rate_study(const RingBenchmark& bench, const RateStudyOptions& opts);

struct DeltaStudyOptions {
  std::vector<double> deltas{4e-2, 2e-2, 1e-2, 5e-3};
  AdaptiveConfig adaptive;
  int n_boundary = 16;
  int initial_levels = 2;
  EstimatorConstants constants;
  int threads = 1;
};

/// Runs the adaptive loop for each noise level on noisy interpolated exact
/// data. Columns: delta alpha discrepancy J_value ndof records accepted.
StudyTable delta_study(const RingBenchmark& bench,
                       const DeltaStudyOptions& opts);

}  // namespace adapttikh
