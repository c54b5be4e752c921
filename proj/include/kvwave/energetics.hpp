#pragma once

/// @file energetics.hpp
/// @brief Energy functionals I, J, E of a snapshot and the discrete
/// dissipation balance.
///
///   I = (m0 - int_0^t g1)||grad u||^2 + (m0 - int_0^t g2)||grad v||^2
///       + (g1 o grad u) + (g2 o grad v) - 2(p+2) int F(u, v)
///   J = 1/2 [(m0 - int_0^t g1)||grad u||^2 + (m0 - int_0^t g2)||grad v||^2]
///       - int F + 1/2 [(g1 o grad u) + (g2 o grad v)
///       + m1/(gamma+1) (||grad u||^{2(gamma+1)} + ||grad v||^{2(gamma+1)})]
///   E = 1/2 (||u_t||^2 + ||v_t||^2) + J
///
/// Along solutions E' = -D with
///   D = ||grad u_t||^2 + ||grad v_t||^2 + 1/2 [g1(t)||grad u||^2 + g2(t)||grad v||^2]
///       - 1/2 [(g1' o grad u) + (g2' o grad v)] >= 0.

#include <vector>

#include "kvwave/integrator.hpp"
#include "kvwave/problem.hpp"

namespace kvwave {

struct EnergyRecord {
  double t = 0.0;
  double kinetic = 0.0;    ///< 1/2 (||u_t||^2 + ||v_t||^2)
  double stiffness = 0.0;  ///< 1/2 sum (m0 - int_0^t g_i) ||grad w_i||^2
  double kirchhoff = 0.0;  ///< 1/2 m1/(gamma+1) sum ||grad w_i||^{2(gamma+1)}
  double memory = 0.0;     ///< 1/2 [(g1 o grad u) + (g2 o grad v)]
  double potential = 0.0;  ///< int F(u, v) dx
  double I_value = 0.0;
  double J_value = 0.0;
  double E_value = 0.0;
  double dissipation_rate = 0.0;      ///< D(t)
  double dissipation_residual = 0.0;  ///< (E_n - E_{n-1})/dt + (D_{n-1} + D_n)/2
  double alpha = 0.0;  ///< (k1||grad u||^2 + k2||grad v||^2 + memory terms)^{1/2}
  double grad_u_sq = 0.0;
  double grad_v_sq = 0.0;
};

double compute_I(const Snapshot& s, const ProblemSpec& spec);
double compute_J(const Snapshot& s, const ProblemSpec& spec);
/// Full record; dissipation_residual is left at 0.
EnergyRecord compute_E(const Snapshot& s, const ProblemSpec& spec);

/// Discrete form of E' + D = 0 between consecutive records (trapezoid in D).
double dissipation_residual(const EnergyRecord& prev, const EnergyRecord& next);

/// Observer that turns snapshots into a record series.
class EnergyRecorder {
 public:
  explicit EnergyRecorder(const ProblemSpec& spec) : spec_(spec) {}

  void operator()(const Snapshot& s, const SimState&) { record(s); }
  const EnergyRecord& record(const Snapshot& s);
  const std::vector<EnergyRecord>& series() const { return series_; }

 private:
  ProblemSpec spec_;
  std::vector<EnergyRecord> series_;
};

}  // namespace kvwave
