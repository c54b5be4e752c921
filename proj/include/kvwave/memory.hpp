#pragma once

/// @file memory.hpp
/// @brief Relaxation kernels and the Volterra history terms.
///
/// Kernels are Prony series g(t) = sum_j a_j exp(-b_j t). Two backends
/// evaluate int_0^{t_n} g(t_n - s) X(s) ds over a uniformly sampled series X:
///
///  - direct: every sample is stored and the integral is a composite
///    trapezoid sum, O(n) work per evaluation. This is the reference backend.
///  - prony: one accumulator per term, A_j^{n+1} = e^{-b_j dt} A_j^n + incr,
///    where incr integrates e^{-b_j (t_{n+1}-s)} against the linear
///    interpolant of X on [t_n, t_{n+1}] exactly. O(1) work per step.
///
/// Samples may be vectors (grid functions) or scalars (width 1).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kvwave/grid.hpp"
#include "kvwave/model.hpp"

namespace kvwave {

/// One exponential a * exp(-b t). The rate must be positive; the weight may
/// have either sign so that derivative kernels reuse the same machinery.
struct PronyTerm {
  double a = 0.0;
  double b = 1.0;

  friend bool operator==(const PronyTerm&, const PronyTerm&) = default;
};

/// Relaxation kernel with a_j >= 0 and b_j > 0, hence g >= 0 and g' <= 0.
class PronyKernel {
 public:
  PronyKernel() = default;
  /// Throws std::invalid_argument on a negative weight or non-positive rate.
  explicit PronyKernel(std::vector<PronyTerm> terms);

  std::span<const PronyTerm> terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// Terms of g'(t) = -sum a_j b_j exp(-b_j t).
  std::vector<PronyTerm> derivative_terms() const;

  friend bool operator==(const PronyKernel&, const PronyKernel&) = default;

 private:
  std::vector<PronyTerm> terms_;
};

double kernel_eval(std::span<const PronyTerm> terms, double t);
double kernel_eval(const PronyKernel& k, double t);
/// g'(t).
double kernel_derivative(const PronyKernel& k, double t);
/// int_0^t g(s) ds in closed form.
double kernel_integral(const PronyKernel& k, double t);
/// int_0^infinity g(s) ds = sum a_j / b_j.
double kernel_mass(const PronyKernel& k);

/// Residual stiffness constants k_i = m0 - int g_i and k = min(k1, k2).
struct StiffnessConstants {
  double k1 = 0.0;
  double k2 = 0.0;
  double k = 0.0;
};

/// Throws std::invalid_argument ("kernel mass exceeds base stiffness") if
/// either k_i <= 0.
StiffnessConstants check_admissible(const PronyKernel& g1, const PronyKernel& g2,
                                    const Material& mat);

enum class MemoryMode { direct, prony };

std::string to_string(MemoryMode mode);
/// Accepts "direct" or "prony".
MemoryMode memory_mode_from_string(const std::string& s);

/// Exact one-step weights for a single exponential of rate b over dt:
/// int_0^dt e^{-b s} [x_old * s/dt + x_new * (1 - s/dt)] ds
///   = dt * (w_old * x_old + w_new * x_new).
struct PronyStepWeights {
  double decay = 1.0;  ///< e^{-b dt}
  double w_old = 0.5;
  double w_new = 0.5;
};
PronyStepWeights prony_step_weights(double rate, double dt);

/// Stored history of a sampled series X(t_0), X(t_1), ... with t_n = n dt.
class HistoryBuffer {
 public:
  /// Direct mode keeps every sample. Prony mode keeps one accumulator per
  /// entry of `terms` (the accumulator is the unweighted integral of
  /// e^{-b_j (t_n - s)} X(s)).
  HistoryBuffer(MemoryMode mode, std::size_t width, double dt,
                std::span<const PronyTerm> terms = {});

  MemoryMode mode() const { return mode_; }
  std::size_t width() const { return width_; }
  double dt() const { return dt_; }
  /// Number of samples pushed so far; the latest sample sits at t_{levels-1}.
  std::size_t levels() const { return levels_; }

  void push(std::span<const double> x);
  void push(double x) { push(std::span<const double>(&x, 1)); }

  /// Direct mode only.
  std::span<const double> snapshot(std::size_t level) const;
  /// Prony mode only.
  std::span<const double> accumulator(std::size_t term) const;
  std::span<const PronyTerm> terms() const { return terms_; }

 private:
  friend void convolve_prony_step(HistoryBuffer& state, std::span<const double> x_new,
                                  std::span<const double> x_old, double dt);

  MemoryMode mode_;
  std::size_t width_;
  double dt_;
  std::size_t levels_ = 0;
  std::vector<double> samples_;  // direct: levels * width
  std::vector<PronyTerm> terms_;
  std::vector<PronyStepWeights> weights_;
  std::vector<double> acc_;      // prony: terms * width
  std::vector<double> last_;     // prony: latest sample
};

/// Composite trapezoid approximation of int_0^{t_n} g(t_n - s) X(s) ds over
/// the stored samples 0..n. Returns zeros for n = 0. Throws if the history
/// is not in direct mode or holds fewer than n + 1 samples.
std::vector<double> convolve_direct(const HistoryBuffer& history,
                                    std::span<const PronyTerm> kernel, double dt,
                                    std::size_t n);

/// Same as above for several kernels in one pass over the history.
std::vector<std::vector<double>> convolve_direct(
    const HistoryBuffer& history, std::span<const std::span<const PronyTerm>> kernels,
    double dt, std::size_t n);

/// Advances every accumulator of a prony-mode buffer by one step.
void convolve_prony_step(HistoryBuffer& state, std::span<const double> x_new,
                         std::span<const double> x_old, double dt);

/// sum_j c_j A_j over the accumulators; `weights` must align with the
/// buffer's terms (same rates).
std::vector<double> prony_value(const HistoryBuffer& state, std::span<const PronyTerm> weights);

/// Trapezoid sum of the kernel itself over levels 0..n, i.e. convolve_direct
/// applied to X = 1.
double trapezoid_kernel_mass(std::span<const PronyTerm> kernel, double dt, std::size_t n);

/// History terms needed for one component w of the system.
struct MemoryTerms {
  Field conv_lap;             ///< int_0^t g(t-s) Lap w(s) ds
  double g_circ = 0.0;        ///< (g o grad w)(t)
  double gprime_circ = 0.0;   ///< (g' o grad w)(t)
  int clamped = 0;            ///< tiny negative values set to 0 in this evaluation
};

/// Keeps the history of Lap w and ||grad w||^2 for one component and
/// evaluates the memory terms at the latest level.
///
/// (g o grad w)(t) is expanded as
///   W ||grad w(t)||^2 + int g(t-s)||grad w(s)||^2 ds + 2 <w(t), int g(t-s) Lap w(s) ds>
/// where W is the same quadrature applied to X = 1. Both backends then
/// integrate the nonnegative integrand ||grad w(t) - grad w(s)||^2 with
/// nonnegative weights, so the result is nonnegative up to round-off.
class FieldMemory {
 public:
  FieldMemory(const PronyKernel& kernel, MemoryMode mode, const Grid& grid, double dt);

  void push(const Field& w, const Field& lap_w);
  std::size_t levels() const { return lap_.levels(); }
  const PronyKernel& kernel() const { return kernel_; }

  /// Memory terms at t_{levels-1}; w must be the latest pushed sample.
  MemoryTerms evaluate(const Field& w) const;

 private:
  PronyKernel kernel_;
  std::vector<PronyTerm> derivative_;
  Grid grid_;
  double dt_;
  HistoryBuffer lap_;
  HistoryBuffer grad_sq_;
  double latest_grad_sq_ = 0.0;
};

/// Clamps |x| <= 1e-12 negatives of a provably nonnegative functional to 0;
/// throws std::runtime_error with `what` for larger negatives.
double clamp_nonnegative(double x, const char* what);

}  // namespace kvwave
