#pragma once

#include <span>
#include <string>
#include <vector>

#include "adapttikh/estimators.hpp"
#include "adapttikh/fem.hpp"
#include "adapttikh/tikhonov.hpp"

namespace adapttikh {

/// Parameters of the relaxed discrepancy principle and the inner accuracy
/// conditions; validate() enforces tau_upper > tau_lower >=
/// max(sqrt(1+2 c2), 1+c1), theta in (0,1), theta_mark in (0,1].
struct AdaptiveConfig {
  double tau_lower = 1.5;
  double tau_upper = 2.0;
  double c1 = 0.4;
  double c2 = 0.5;
  double alpha0 = 1e-2;
  double theta = 0.6;
  double theta_mark = 0.5;
  int max_outer = 25;
  int max_inner = 30;
  double delta = 1e-2;

  void validate() const;
};

struct AdaptiveRecord {
  int outer = 0;
  double alpha = 0.0;
  int inner = 0;
  int ndof = 0;
  double h_min = 0.0, h_max = 0.0;
  double discrepancy = 0.0;
  double J_value = 0.0;
  double residual_bound = 0.0;
  double functional_bound = 0.0;
  double discrepancy_gap = 0.0;
  double eta_w = 0.0, eta_y = 0.0, eta_kappa = 0.0;
  bool inner_accepted = false;
  bool accepted = false;
};

struct AdaptiveTrace {
  std::vector<AdaptiveRecord> records;
  bool success = false;
  // "accepted" | "overshoot" | "max_outer" | "max_inner"
  std::string termination;
  int final_index = -1;
  double final_alpha = 0.0;
  int final_ndof = 0;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Minimal-cardinality bulk set: greedy by descending indicator (ties by
/// lower id) until sum_{K in M} ind_K^2 >= theta_mark^2 sum_K ind_K^2.
std::vector<int> dorfler_mark(std::span<const double> indicators,
                              double theta_mark);

/// Outer loop over alpha_k = alpha0 theta^k with an estimator-driven inner
/// refinement loop. Inner acceptance: discrepancy_gap <= c1 delta and
/// functional_bound <= c2 delta^2. Outer acceptance: discrepancy in
/// [tau_lower delta, tau_upper delta]; larger discrepancies decrease alpha,
/// smaller ones terminate with the "overshoot" flag.
AdaptiveTrace run_adaptive(const AdaptiveConfig& config,
                           std::shared_ptr<const Mesh> mesh0,
                           RegularizerKind kind, const FeFunction& g_delta0,
                           const EstimatorConstants& constants = {});

}  // namespace adapttikh
