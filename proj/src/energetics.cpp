#include "kvwave/energetics.hpp"

#include <algorithm>
#include <cmath>

namespace kvwave {

namespace {

double potential_integral(const Snapshot& s, const Coupling& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) sum += coupling_F(s.u[i], s.v[i], c);
  return s.u.grid().cell_measure() * sum;
}

struct Parts {
  double stiffness;
  double kirchhoff;
  double memory;
  double potential;
};

Parts energy_parts(const Snapshot& s, const ProblemSpec& spec) {
  const auto& mat = spec.material;
  const double c1 = mat.m0 - kernel_integral(spec.g1, s.t);
  const double c2 = mat.m0 - kernel_integral(spec.g2, s.t);
  Parts p{};
  p.stiffness = 0.5 * (c1 * s.grad_u_sq + c2 * s.grad_v_sq);
  if (mat.m1 != 0.0) {
    const double e = mat.gamma + 1.0;
    p.kirchhoff = 0.5 * mat.m1 / e * (std::pow(s.grad_u_sq, e) + std::pow(s.grad_v_sq, e));
  }
  p.memory = 0.5 * (s.g1_circ_u + s.g2_circ_v);
  p.potential = potential_integral(s, spec.coupling);
  return p;
}

}  // namespace

double compute_I(const Snapshot& s, const ProblemSpec& spec) {
  const Parts p = energy_parts(s, spec);
  return 2.0 * p.stiffness + 2.0 * p.memory - 2.0 * (spec.coupling.p + 2.0) * p.potential;
}

double compute_J(const Snapshot& s, const ProblemSpec& spec) {
  const Parts p = energy_parts(s, spec);
  return p.stiffness + p.kirchhoff + p.memory - p.potential;
}

EnergyRecord compute_E(const Snapshot& s, const ProblemSpec& spec) {
  const Parts p = energy_parts(s, spec);
  EnergyRecord r;
  r.t = s.t;
  r.grad_u_sq = s.grad_u_sq;
  r.grad_v_sq = s.grad_v_sq;
  r.kinetic = 0.5 * (l2_inner(s.u_t, s.u_t) + l2_inner(s.v_t, s.v_t));
  r.stiffness = p.stiffness;
  r.kirchhoff = p.kirchhoff;
  r.memory = p.memory;
  r.potential = p.potential;
  r.I_value = 2.0 * p.stiffness + 2.0 * p.memory - 2.0 * (spec.coupling.p + 2.0) * p.potential;
  r.J_value = p.stiffness + p.kirchhoff + p.memory - p.potential;
  r.E_value = r.kinetic + r.J_value;

  r.dissipation_rate = grad_norm_sq(s.u_t) + grad_norm_sq(s.v_t) +
                       0.5 * (kernel_eval(spec.g1, s.t) * s.grad_u_sq +
                              kernel_eval(spec.g2, s.t) * s.grad_v_sq) -
                       0.5 * (s.g1p_circ_u + s.g2p_circ_v);

  const StiffnessConstants k = check_admissible(spec.g1, spec.g2, spec.material);
  r.alpha = std::sqrt(std::max(
      0.0, k.k1 * s.grad_u_sq + k.k2 * s.grad_v_sq + s.g1_circ_u + s.g2_circ_v));
  return r;
}

double dissipation_residual(const EnergyRecord& prev, const EnergyRecord& next) {
  const double dt = next.t - prev.t;
  if (!(dt > 0.0)) return 0.0;
  return (next.E_value - prev.E_value) / dt +
         0.5 * (prev.dissipation_rate + next.dissipation_rate);
}

const EnergyRecord& EnergyRecorder::record(const Snapshot& s) {
  EnergyRecord r = compute_E(s, spec_);
  if (!series_.empty()) r.dissipation_residual = dissipation_residual(series_.back(), r);
  series_.push_back(r);
  return series_.back();
}

}  // namespace kvwave
