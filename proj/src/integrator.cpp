#include "kvwave/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace kvwave {

namespace {

ProblemSpec validated(ProblemSpec spec) {
  spec.validate();
  return spec;
}

}  // namespace

Integrator::Integrator(ProblemSpec spec, SourceFn source)
    : spec_(validated(std::move(spec))),
      grid_(spec_.grid()),
      source_(std::move(source)),
      mode_(spec_.numerics.resolved_memory_mode()),
      dt_(spec_.numerics.dt),
      solver_(grid_, 1.0 / (dt_ * dt_), 1.0 / (2.0 * dt_), spec_.numerics.linear_solver) {}

void Integrator::check_cfl(double grad_sq) const {
  const double m_max = kirchhoff_M(grad_sq, spec_.material);
  const double bound = spec_.numerics.cfl_safety * grid_.h_min() / std::sqrt(m_max);
  if (dt_ > bound) {
    std::ostringstream os;
    os << "CFL violation: dt = " << dt_ << " exceeds " << spec_.numerics.cfl_safety
       << " * h_min / sqrt(M_max) = " << bound << " (M_max = " << m_max << ")";
    throw CflError(os.str());
  }
}

void Integrator::check_divergence(SimState& state, const Field& u, const Field& v) const {
  const double limit = spec_.numerics.divergence_threshold;
  if (!(max_norm(u.values()) <= limit) || !(max_norm(v.values()) <= limit)) {
    state.diverged = true;
  }
}

SimState Integrator::initialize(Snapshot* initial) const {
  const auto& ic = spec_.initial;
  const Field u0 = sample_modes(grid_, ic.u0);
  const Field u1 = sample_modes(grid_, ic.u1);
  const Field v0 = sample_modes(grid_, ic.v0);
  const Field v1 = sample_modes(grid_, ic.v1);

  const Field lap_u0 = laplacian_apply(u0);
  const Field lap_v0 = laplacian_apply(v0);
  const Field lap_u1 = laplacian_apply(u1);
  const Field lap_v1 = laplacian_apply(v1);
  const double gu = std::max(0.0, -l2_inner(lap_u0, u0));
  const double gv = std::max(0.0, -l2_inner(lap_v0, v0));
  check_cfl(std::max(gu, gv));

  Field s1(grid_), s2(grid_);
  if (source_) source_(0.0, s1, s2);

  const double mu = kirchhoff_M(gu, spec_.material);
  const double mv = kirchhoff_M(gv, spec_.material);
  const double half_dt2 = 0.5 * dt_ * dt_;
  Field u_next(grid_), v_next(grid_);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double f1 = coupling_f1(u0[i], v0[i], spec_.coupling) + s1[i];
    const double f2 = coupling_f2(u0[i], v0[i], spec_.coupling) + s2[i];
    u_next[i] = u0[i] + dt_ * u1[i] + half_dt2 * (mu * lap_u0[i] + lap_u1[i] + f1);
    v_next[i] = v0[i] + dt_ * v1[i] + half_dt2 * (mv * lap_v0[i] + lap_v1[i] + f2);
  }

  SimState state{
      .t = dt_,
      .step_index = 1,
      .u = u_next,
      .v = v_next,
      .u_prev = u0,
      .v_prev = v0,
      .u_hist = FieldMemory(spec_.g1, mode_, grid_, dt_),
      .v_hist = FieldMemory(spec_.g2, mode_, grid_, dt_),
      .diverged = false,
      .max_grad_sq = std::max(gu, gv),
  };
  state.u_hist.push(u0, lap_u0);
  state.v_hist.push(v0, lap_v0);
  check_divergence(state, u_next, v_next);
  if (!state.diverged) {
    state.u_hist.push(u_next, laplacian_apply(u_next));
    state.v_hist.push(v_next, laplacian_apply(v_next));
  }

  if (initial) {
    *initial = Snapshot{.t = 0.0,
                        .level = 0,
                        .u = u0,
                        .v = v0,
                        .u_t = u1,
                        .v_t = v1,
                        .grad_u_sq = gu,
                        .grad_v_sq = gv};
  }
  return state;
}

Snapshot Integrator::step(SimState& state) const {
  if (state.diverged) throw std::logic_error("step: state has diverged");
  const Field lap_u = laplacian_apply(state.u);
  const Field lap_v = laplacian_apply(state.v);
  const Field lap_up = laplacian_apply(state.u_prev);
  const Field lap_vp = laplacian_apply(state.v_prev);
  const double gu = std::max(0.0, -l2_inner(lap_u, state.u));
  const double gv = std::max(0.0, -l2_inner(lap_v, state.v));
  state.max_grad_sq = std::max({state.max_grad_sq, gu, gv});
  check_cfl(state.max_grad_sq);

  const MemoryTerms mem_u = state.u_hist.evaluate(state.u);
  const MemoryTerms mem_v = state.v_hist.evaluate(state.v);

  state.memory_clamps += mem_u.clamped + mem_v.clamped;

  Field s1(grid_), s2(grid_);
  if (source_) source_(state.t, s1, s2);

  const double mu = kirchhoff_M(gu, spec_.material);
  const double mv = kirchhoff_M(gv, spec_.material);
  const double idt2 = 1.0 / (dt_ * dt_);
  const double i2dt = 1.0 / (2.0 * dt_);
  const std::size_t n = grid_.size();
  Field rhs_u(grid_), rhs_v(grid_);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = state.u[i];
    const double v = state.v[i];
    const double f1 = coupling_f1(u, v, spec_.coupling) + s1[i];
    const double f2 = coupling_f2(u, v, spec_.coupling) + s2[i];
    rhs_u[i] = (2.0 * u - state.u_prev[i]) * idt2 - lap_up[i] * i2dt + mu * lap_u[i] -
               mem_u.conv_lap[i] + f1;
    rhs_v[i] = (2.0 * v - state.v_prev[i]) * idt2 - lap_vp[i] * i2dt + mv * lap_v[i] -
               mem_v.conv_lap[i] + f2;
  }

  // Extrapolated initial guess for the iterative path.
  Field u_next(grid_), v_next(grid_);
  for (std::size_t i = 0; i < n; ++i) {
    u_next[i] = 2.0 * state.u[i] - state.u_prev[i];
    v_next[i] = 2.0 * state.v[i] - state.v_prev[i];
  }
  solver_.solve(rhs_u.values(), u_next.values());
  solver_.solve(rhs_v.values(), v_next.values());

  Snapshot snap{.t = state.t,
                .level = state.step_index,
                .u = state.u,
                .v = state.v,
                .u_t = Field(grid_),
                .v_t = Field(grid_),
                .grad_u_sq = gu,
                .grad_v_sq = gv,
                .g1_circ_u = mem_u.g_circ,
                .g2_circ_v = mem_v.g_circ,
                .g1p_circ_u = mem_u.gprime_circ,
                .g2p_circ_v = mem_v.gprime_circ};
  for (std::size_t i = 0; i < n; ++i) {
    snap.u_t[i] = (u_next[i] - state.u_prev[i]) * i2dt;
    snap.v_t[i] = (v_next[i] - state.v_prev[i]) * i2dt;
  }

  check_divergence(state, u_next, v_next);
  if (state.diverged) return snap;

  state.u_prev = std::move(state.u);
  state.v_prev = std::move(state.v);
  state.u = std::move(u_next);
  state.v = std::move(v_next);
  state.u_hist.push(state.u, laplacian_apply(state.u));
  state.v_hist.push(state.v, laplacian_apply(state.v));
  state.step_index += 1;
  state.t = state.step_index * dt_;
  return snap;
}

RunResult run(const Integrator& integrator, const std::vector<Observer>& observers, int stride) {
  const auto start = std::chrono::steady_clock::now();
  if (stride < 1) throw std::invalid_argument("run: stride must be >= 1");
  const long n_steps = integrator.spec().numerics.steps();

  Snapshot first;
  SimState state = integrator.initialize(&first);
  long records = 0;
  auto emit = [&](const Snapshot& s) {
    for (const auto& obs : observers) obs(s, state);
    ++records;
  };
  emit(first);

  long taken = 0;
  // Level n is reported once u^{n+1} exists, so reaching level n_steps takes
  // one look-ahead solve beyond t_end.
  for (long level = 1; level <= n_steps && !state.diverged; ++level) {
    const Snapshot snap = integrator.step(state);
    if (state.diverged) break;
    taken = level;
    if (level % stride == 0 || level == n_steps) emit(snap);
  }

  RunResult result{.final_state = std::move(state),
                   .diverged = false,
                   .steps_taken = taken,
                   .records = records,
                   .wall_seconds = 0.0};
  result.diverged = result.final_state.diverged;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunResult run(const ProblemSpec& spec, const std::vector<Observer>& observers) {
  const Integrator integrator(spec);
  return run(integrator, observers, spec.outputs.stride);
}

}  // namespace kvwave
