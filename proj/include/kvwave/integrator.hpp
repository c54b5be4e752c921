#pragma once

/// @file integrator.hpp
/// @brief Time stepping for the coupled viscoelastic Kirchhoff system
///
///   u_tt - M(||grad u||^2) Lap u + int_0^t g1(t-s) Lap u(s) ds - Lap u_t = f1(u, v)
///   v_tt - M(||grad v||^2) Lap v + int_0^t g2(t-s) Lap v(s) ds - Lap v_t = f2(u, v)
///
/// with zero Dirichlet data. Inertia uses central differences, the strong
/// damping is taken implicitly through the centered velocity
/// (u^{n+1} - u^{n-1}) / (2 dt), and the Kirchhoff, memory and coupling terms
/// are explicit at t_n:
///
///   (I/dt^2 - Lap/(2dt)) u^{n+1} = (2u^n - u^{n-1})/dt^2 - Lap u^{n-1}/(2dt)
///                                  + M^n Lap u^n - C^n + f1(u^n, v^n)
///
/// One SPD solve per component per step. The first step is a second-order
/// Taylor expansion from the initial data.

#include <functional>
#include <stdexcept>
#include <vector>

#include "kvwave/grid.hpp"
#include "kvwave/memory.hpp"
#include "kvwave/problem.hpp"

namespace kvwave {

/// Everything the energy functionals need at one time level t_n.
struct Snapshot {
  double t = 0.0;
  long level = 0;
  Field u, v;
  Field u_t, v_t;
  double grad_u_sq = 0.0;
  double grad_v_sq = 0.0;
  double g1_circ_u = 0.0;   ///< (g1 o grad u)(t)
  double g2_circ_v = 0.0;   ///< (g2 o grad v)(t)
  double g1p_circ_u = 0.0;  ///< (g1' o grad u)(t) <= 0
  double g2p_circ_v = 0.0;  ///< (g2' o grad v)(t) <= 0
};

struct SimState {
  double t = 0.0;        ///< time of u, v
  long step_index = 0;   ///< n with t = n dt
  Field u, v;
  Field u_prev, v_prev;
  FieldMemory u_hist;
  FieldMemory v_hist;
  bool diverged = false;
  double max_grad_sq = 0.0;  ///< running max of ||grad u||^2, ||grad v||^2
  long memory_clamps = 0;    ///< tiny negative memory functionals set to 0 so far
};

/// Optional forcing added to f1, f2 (manufactured solutions).
using SourceFn = std::function<void(double t, Field& s1, Field& s2)>;

/// Raised when dt exceeds the wave CFL bound.
class CflError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Integrator {
 public:
  /// Validates the spec; throws std::invalid_argument on inadmissible
  /// exponents or kernels before any stepping.
  explicit Integrator(ProblemSpec spec, SourceFn source = {});

  const ProblemSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  MemoryMode memory_mode() const { return mode_; }

  /// State at step_index = 1 and the record inputs for t = 0.
  SimState initialize(Snapshot* initial = nullptr) const;

  /// Advances u^n -> u^{n+1} and returns the snapshot of level n, which needs
  /// u^{n+1} for the centered velocity. Sets state.diverged instead of
  /// throwing when the solution leaves the finite range.
  Snapshot step(SimState& state) const;

 private:
  void check_cfl(double grad_sq) const;
  void check_divergence(SimState& state, const Field& u, const Field& v) const;

  ProblemSpec spec_;
  Grid grid_;
  SourceFn source_;
  MemoryMode mode_;
  double dt_;
  ShiftedLaplacianSolver solver_;
};

using Observer = std::function<void(const Snapshot&, const SimState&)>;

struct RunResult {
  SimState final_state;
  bool diverged = false;
  long steps_taken = 0;
  long records = 0;
  double wall_seconds = 0.0;
};

/// Steps until t_end or divergence. Observers see the t = 0 snapshot, every
/// `stride`-th level and the final level.
RunResult run(const Integrator& integrator, const std::vector<Observer>& observers,
              int stride = 1);
RunResult run(const ProblemSpec& spec, const std::vector<Observer>& observers);

}  // namespace kvwave
