#pragma once

/// @file problem.hpp
/// @brief Full parameterization of one simulation: domain, material, kernels,
/// coupling, initial data, numerics and output settings.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvwave/grid.hpp"
#include "kvwave/memory.hpp"
#include "kvwave/model.hpp"

namespace kvwave {

/// amplitude * prod_axis sin(index[axis] * pi * x_axis / L_axis).
struct SineMode {
  std::array<int, 2> index{1, 1};
  double amplitude = 0.0;

  friend bool operator==(const SineMode&, const SineMode&) = default;
};

struct DomainSpec {
  int dim = 1;
  std::array<double, 2> lengths{1.0, 1.0};
  std::array<int, 2> n_cells{99, 1};

  Grid grid() const;
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

struct InitialData {
  std::vector<SineMode> u0, u1, v0, v1;

  friend bool operator==(const InitialData&, const InitialData&) = default;
};

struct NumericsConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  /// Unset selects direct for up to kDirectStepLimit steps and prony beyond.
  std::optional<MemoryMode> memory_mode;
  LinearSolverConfig linear_solver;
  double divergence_threshold = 1e12;
  /// dt <= cfl_safety * h_min / sqrt(M_max).
  double cfl_safety = 0.5;

  static constexpr long kDirectStepLimit = 10000;

  long steps() const;
  MemoryMode resolved_memory_mode() const;
  friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

struct OutputConfig {
  std::string series_path = "series.csv";
  std::string report_path = "report.json";
  int stride = 1;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

/// Random search settings for the embedding constant eta.
struct CertifyConfig {
  int eta_trials = 2000;
  int refine_steps = 200;
  int modes_per_axis = 8;
  int audit_samples = 1000;

  friend bool operator==(const CertifyConfig&, const CertifyConfig&) = default;
};

struct ProblemSpec {
  DomainSpec domain;
  Material material;
  PronyKernel g1;
  PronyKernel g2;
  Coupling coupling;
  InitialData initial;
  NumericsConfig numerics;
  OutputConfig outputs;
  CertifyConfig certify;
  std::uint64_t seed = 20240101;

  Grid grid() const { return domain.grid(); }
  /// Checks every invariant; throws std::invalid_argument naming the field.
  void validate() const;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

/// Evaluates a sine-mode expansion at the interior nodes of grid.
Field sample_modes(const Grid& grid, const std::vector<SineMode>& modes);

}  // namespace kvwave
