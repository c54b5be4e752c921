#pragma once

/// @file certify.hpp
/// @brief Stable-set thresholds, decay-theorem constants and the empirical
/// checks of the potential-well invariance and exponential energy decay.
///
/// The embedding constant eta of
///   ||u+v||_{2(p+2)}^{2(p+2)} + 2||uv||_{p+2}^{p+2} <= eta (k1||grad u||^2 + k2||grad v||^2)^{p+2}
/// is estimated on the discrete space by random search, which gives a lower
/// bound of the optimal constant. Every downstream threshold uses that one
/// value.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvwave/energetics.hpp"
#include "kvwave/grid.hpp"
#include "kvwave/model.hpp"
#include "kvwave/problem.hpp"

namespace kvwave {

/// R(u, v) = 2(p+2) int F(u, v) / (k1||grad u||^2 + k2||grad v||^2)^{p+2}.
/// For a = b = 1 the numerator is ||u+v||_{2(p+2)}^{2(p+2)} + 2||uv||_{p+2}^{p+2}.
/// Returns 0 for a zero denominator.
double eta_ratio(const Field& u, const Field& v, double k1, double k2, const Coupling& c);

struct EtaSearchConfig {
  int trials = 2000;
  int refine_steps = 200;
  int modes_per_axis = 8;
  double initial_step = 0.1;
  double final_step = 1e-4;
  std::uint64_t seed = 0;
};

struct EtaEstimate {
  double eta = 0.0;
  double best_random = 0.0;  ///< best ratio before refinement
  long evaluations = 0;
};

/// Random truncated sine series (standard normal coefficients), best of
/// `trials`, then coordinate ascent with geometrically decaying steps.
EtaEstimate estimate_eta(const Grid& grid, double k1, double k2, const Coupling& c,
                         const EtaSearchConfig& cfg);

struct EtaAudit {
  int samples = 0;
  int violations = 0;
  double max_ratio = 0.0;
};
/// Counts fresh random pairs with R(u, v) > eta.
EtaAudit audit_eta(const Grid& grid, double eta, double k1, double k2, const Coupling& c,
                   int samples, int modes_per_axis, std::uint64_t seed);

struct Thresholds {
  double B = 0.0;
  double alpha_star = 0.0;
  double E1 = 0.0;
};
/// B = eta^{1/(2(p+2))}, alpha* = B^{-(p+2)/(p+1)}, E1 = (1/2 - 1/(2(p+2))) alpha*^2.
Thresholds thresholds(double eta, double p);

/// G(alpha) = alpha^2/2 - B^{2(p+2)}/(2(p+2)) alpha^{2(p+2)}.
double well_G(double alpha, double B, double p);

/// lambda = 1 - eta (2(p+2) E0/(p+1))^{p+1} - 5 (m0 - k)(p+2) / (2k(p+1)).
double decay_lambda(double eta, double p, double E0, double m0, double k);

struct TheoremConstants {
  double C_p = 0.0;
  double C1 = 0.0;  ///< (p+2)/(k(p+1)) C_p^2 + 1
  double C3 = 0.0;  ///< 2(p+2)/(k(p+1))
  double C0 = 0.0;  ///< 2 C1 + 2 C_p^2 + C3
};
TheoremConstants theorem_constants(double p, double k, double C_p);

struct CertificationReport {
  double eta_estimate = 0.0;
  double eta_best_random = 0.0;
  int eta_audit_samples = 0;
  int eta_audit_violations = 0;
  double B = 0.0;
  double alpha_star = 0.0;
  double E1 = 0.0;
  double k1 = 0.0, k2 = 0.0, k = 0.0;
  double C_p = 0.0, C1 = 0.0, C3 = 0.0, C0 = 0.0;
  double lambda = 0.0;
  double E0 = 0.0;
  double initial_well_norm = 0.0;

  bool hyp_E0_below_E1 = false;
  bool hyp_initial_in_well = false;
  bool hyp_lambda_positive = false;

  bool trajectory_checked = false;
  bool trajectory_in_well = true;
  bool well_G_bound_holds = true;  ///< G(alpha(t)) <= E(t) + 1e-8 at every sample
  bool energy_chain_holds = true;  ///< I >= 0 and J >= (p+1)/(2(p+2)) alpha^2
  double max_alpha = 0.0;
  long samples_monitored = 0;

  bool fit_available = false;
  double fitted_rate = 0.0;
  double fit_window_start = 0.0;
  double fit_window_end = 0.0;
  long fit_samples = 0;

  double theorem_rate_bound = 0.0;  ///< lambda / C0
  bool bound_applicable = false;    ///< lambda > 0
  bool bound_satisfied = false;     ///< lambda <= 0, or the bound held on t >= C0/lambda
  long bound_samples_checked = 0;
  double proof_rate_bound = 0.0;    ///< 2 lambda / C0
  bool proof_bound_satisfied = false;
  long proof_bound_samples_checked = 0;

  std::uint64_t seed = 0;
  std::vector<std::string> notes;
};

/// Fills eta, thresholds, stiffness and theorem constants. Zero coupling
/// (a = b = 0) gives eta = 0 and infinite alpha*, E1.
CertificationReport prepare_report(const ProblemSpec& spec, const Grid& grid);

/// Sets E0 and the three hypothesis flags (plus lambda) from the t = 0 record.
void check_hypotheses(CertificationReport& report, const EnergyRecord& initial,
                      const ProblemSpec& spec);

/// Per-sample check of alpha(t) < alpha*, G(alpha(t)) <= E(t) + 1e-8 and the
/// I/J positivity chain.
class WellMonitor {
 public:
  WellMonitor(const CertificationReport& report, const ProblemSpec& spec);
  bool observe(const EnergyRecord& r);
  void finish(CertificationReport& report) const;

 private:
  double alpha_star_;
  double B_;
  double p_;
  bool in_well_ = true;
  bool g_bound_ = true;
  bool chain_ = true;
  double max_alpha_ = 0.0;
  long samples_ = 0;
};

/// Least-squares slope of ln E over [0.2 T, T] and both decay-bound checks.
void decay_fit(const std::vector<EnergyRecord>& series, CertificationReport& report);

}  // namespace kvwave
