#include "kvwave/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kvwave {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

void check_modes(const std::vector<SineMode>& modes, int dim, const std::string& name) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    const std::string field = "initial." + name + "[" + std::to_string(i) + "]";
    for (int axis = 0; axis < dim; ++axis) {
      if (m.index[axis] < 1) fail(field, "mode indices must be >= 1");
    }
    if (!std::isfinite(m.amplitude)) fail(field, "amplitude must be finite");
  }
}

}  // namespace

Grid DomainSpec::grid() const {
  if (dim == 1) return Grid(lengths[0], n_cells[0]);
  if (dim == 2) return Grid(lengths[0], lengths[1], n_cells[0], n_cells[1]);
  throw std::invalid_argument("domain.dim: only 1 and 2 are supported");
}

long NumericsConfig::steps() const { return std::lround(t_end / dt); }

MemoryMode NumericsConfig::resolved_memory_mode() const {
  if (memory_mode) return *memory_mode;
  return steps() <= kDirectStepLimit ? MemoryMode::direct : MemoryMode::prony;
}

void ProblemSpec::validate() const {
  if (domain.dim != 1 && domain.dim != 2) fail("domain.dim", "must be 1 or 2");
  try {
    (void)domain.grid();
  } catch (const std::invalid_argument& e) {
    fail("domain", e.what());
  }
  material.validate();
  if (coupling.n != domain.dim) fail("coupling.n", "must equal domain.dim");
  coupling.validate();
  try {
    (void)check_admissible(g1, g2, material);
  } catch (const std::invalid_argument& e) {
    fail("kernels", e.what());
  }
  check_modes(initial.u0, domain.dim, "u0_modes");
  check_modes(initial.u1, domain.dim, "u1_modes");
  check_modes(initial.v0, domain.dim, "v0_modes");
  check_modes(initial.v1, domain.dim, "v1_modes");

  const auto& nm = numerics;
  if (!(nm.dt > 0.0) || !std::isfinite(nm.dt)) fail("numerics.dt", "must be positive");
  if (!(nm.t_end >= 0.0) || !std::isfinite(nm.t_end)) fail("numerics.t_end", "must be >= 0");
  if (nm.t_end > 0.0 && nm.t_end < nm.dt) fail("numerics.t_end", "must be 0 or >= dt");
  if (!(nm.linear_solver.tolerance > 0.0) || nm.linear_solver.tolerance > 1e-4) {
    fail("numerics.linear_solver.tolerance", "must lie in (0, 1e-4]");
  }
  if (nm.linear_solver.max_iterations < 1) {
    fail("numerics.linear_solver.max_iterations", "must be >= 1");
  }
  if (nm.linear_solver.kind == LinearSolverConfig::Kind::tridiagonal && domain.dim != 1) {
    fail("numerics.linear_solver.kind", "tridiagonal requires dim = 1");
  }
  if (!(nm.divergence_threshold > 0.0)) fail("numerics.divergence_threshold", "must be > 0");
  if (!(nm.cfl_safety > 0.0) || nm.cfl_safety > 1.0) {
    fail("numerics.cfl_safety", "must lie in (0, 1]");
  }
  if (outputs.stride < 1) fail("outputs.stride", "must be >= 1");
  if (certify.eta_trials < 1) fail("certify.eta_trials", "must be >= 1");
  if (certify.refine_steps < 0) fail("certify.refine_steps", "must be >= 0");
  if (certify.modes_per_axis < 1) fail("certify.modes_per_axis", "must be >= 1");
  if (certify.audit_samples < 0) fail("certify.audit_samples", "must be >= 0");
}

Field sample_modes(const Grid& grid, const std::vector<SineMode>& modes) {
  const double pi = std::numbers::pi;
  Field f(grid);
  for (const auto& m : modes) {
    const double kx = m.index[0] * pi / grid.length(0);
    if (grid.dim() == 1) {
      for (int i = 0; i < grid.n_cells(0); ++i) {
        f[i] += m.amplitude * std::sin(kx * grid.coord(0, i));
      }
      continue;
    }
    const double ky = m.index[1] * pi / grid.length(1);
    const int nx = grid.n_cells(0);
    for (int j = 0; j < grid.n_cells(1); ++j) {
      const double sy = std::sin(ky * grid.coord(1, j));
      for (int i = 0; i < nx; ++i) {
        f[i + static_cast<std::size_t>(nx) * j] += m.amplitude * std::sin(kx * grid.coord(0, i)) * sy;
      }
    }
  }
  return f;
}

}  // namespace kvwave
