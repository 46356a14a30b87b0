#pragma once

#include <string>

#include "adapttikh/adaptive.hpp"
#include "adapttikh/benchmark.hpp"
#include "adapttikh/estimators.hpp"

namespace adapttikh {

/// Full run configuration for the CLI and the C API. JSON (de)serialization
/// is strict: unknown keys are rejected with the offending key named.
struct RunConfig {
  int n_boundary = 16;
  double radius = 1.0;
  int mesh_levels = 2;
  RingBenchmark benchmark;
  AdaptiveConfig adaptive;
  EstimatorConstants constants;
  std::string out_path;  // empty: standard output

  void validate() const;
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

}  // namespace adapttikh
