#include "kvwave/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "kvwave/memory.hpp"

namespace kvwave {

namespace {

// |x|^q with a multiply-only path for small integer q.
double abs_pow(double x, double q) {
  x = std::fabs(x);
  const double qi = std::round(q);
  if (qi == q && qi >= 0.0 && qi <= 16.0) {
    double r = 1.0;
    double base = x;
    for (int e = static_cast<int>(qi); e > 0; e >>= 1) {
      if (e & 1) r *= base;
      base *= base;
    }
    return r;
  }
  return std::pow(x, q);
}

double ratio_numerator(std::span<const double> u, std::span<const double> v, const Coupling& c,
                       double measure) {
  const double q = c.p + 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double term = 0.0;
    if (c.a != 0.0) term += c.a * abs_pow(u[i] + v[i], 2.0 * q);
    if (c.b != 0.0) term += 2.0 * c.b * abs_pow(u[i] * v[i], q);
    sum += term;
  }
  return measure * sum;
}

// Sine modes sampled on the grid, index k_x + modes * k_y.
class SineBasis {
 public:
  SineBasis(const Grid& grid, int modes_per_axis) : grid_(grid) {
    if (modes_per_axis < 1) throw std::invalid_argument("eta search: modes_per_axis must be >= 1");
    const int ky_max = grid.dim() == 2 ? modes_per_axis : 1;
    for (int ky = 1; ky <= ky_max; ++ky) {
      for (int kx = 1; kx <= modes_per_axis; ++kx) {
        std::vector<SineMode> m{SineMode{.index = {kx, ky}, .amplitude = 1.0}};
        Field f = sample_modes(grid, m);
        lap_.push_back(laplacian_apply(f));
        basis_.push_back(std::move(f));
      }
    }
  }

  std::size_t size() const { return basis_.size(); }
  const Field& mode(std::size_t k) const { return basis_[k]; }
  const Field& lap(std::size_t k) const { return lap_[k]; }

  Field combine(std::span<const double> coeffs, Field* lap_out) const {
    Field f(grid_);
    Field lf(grid_);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      const double ck = coeffs[k];
      if (ck == 0.0) continue;
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] += ck * basis_[k][i];
        lf[i] += ck * lap_[k][i];
      }
    }
    if (lap_out) *lap_out = std::move(lf);
    return f;
  }

 private:
  Grid grid_;
  std::vector<Field> basis_;
  std::vector<Field> lap_;
};

void normalize(std::vector<double>& c) {
  double s = 0.0;
  for (double x : c) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& x : c) x /= s;
}

// Candidate pair (u, v) kept with its Laplacians so gradient norms are cheap.
struct Candidate {
  Field u, v, lu, lv;
};

Candidate build(const SineBasis& basis, const std::vector<double>& c) {
  const std::size_t m = basis.size();
  Candidate out;
  out.u = basis.combine(std::span<const double>(c.data(), m), &out.lu);
  out.v = basis.combine(std::span<const double>(c.data() + m, m), &out.lv);
  return out;
}

double ratio_of(const Candidate& x, double k1, double k2, const Coupling& c) {
  const Grid& g = x.u.grid();
  const double gu = std::max(0.0, -l2_inner(x.lu, x.u));
  const double gv = std::max(0.0, -l2_inner(x.lv, x.v));
  const double den = k1 * gu + k2 * gv;
  if (!(den > 0.0)) return 0.0;
  return ratio_numerator(x.u.values(), x.v.values(), c, g.cell_measure()) /
         abs_pow(den, c.p + 2.0);
}

std::vector<double> random_coefficients(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(n);
  for (double& x : c) x = normal(rng);
  normalize(c);
  return c;
}

}  // namespace

double eta_ratio(const Field& u, const Field& v, double k1, double k2, const Coupling& c) {
  require_same_grid(u, v);
  const double den = k1 * grad_norm_sq(u) + k2 * grad_norm_sq(v);
  if (!(den > 0.0)) return 0.0;
  return ratio_numerator(u.values(), v.values(), c, u.grid().cell_measure()) /
         abs_pow(den, c.p + 2.0);
}

EtaEstimate estimate_eta(const Grid& grid, double k1, double k2, const Coupling& c,
                         const EtaSearchConfig& cfg) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw std::invalid_argument("estimate_eta: k1, k2 must be > 0");
  if (cfg.trials < 1) throw std::invalid_argument("estimate_eta: trials must be >= 1");
  if (!admissible_p(grid.dim(), c.p))
    throw std::invalid_argument("estimate_eta: coupling exponent p is not admissible");

  const SineBasis basis(grid, cfg.modes_per_axis);
  const std::size_t m = basis.size();
  std::mt19937_64 rng(cfg.seed);

  EtaEstimate est;
  std::vector<double> best;
  for (int t = 0; t < cfg.trials; ++t) {
    std::vector<double> coeffs = random_coefficients(rng, 2 * m);
    const double r = ratio_of(build(basis, coeffs), k1, k2, c);
    ++est.evaluations;
    if (best.empty() || r > est.best_random) {
      est.best_random = r;
      best = std::move(coeffs);
    }
  }
  est.eta = est.best_random;

  if (cfg.refine_steps > 0 && est.eta > 0.0) {
    Candidate cur = build(basis, best);
    const double decay =
        cfg.refine_steps > 1
            ? std::pow(cfg.final_step / cfg.initial_step, 1.0 / (cfg.refine_steps - 1))
            : 1.0;
    double h = cfg.initial_step;
    for (int s = 0; s < cfg.refine_steps; ++s, h *= decay) {
      for (std::size_t k = 0; k < 2 * m; ++k) {
        const bool on_u = k < m;
        const std::size_t mode = on_u ? k : k - m;
        Field& f = on_u ? cur.u : cur.v;
        Field& lf = on_u ? cur.lu : cur.lv;
        const Field& phi = basis.mode(mode);
        const Field& lphi = basis.lap(mode);
        double best_delta = 0.0;
        for (double delta : {h, -h}) {
          for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] += delta * phi[i];
            lf[i] += delta * lphi[i];
          }
          const double r = ratio_of(cur, k1, k2, c);
          ++est.evaluations;
          for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] -= delta * phi[i];
            lf[i] -= delta * lphi[i];
          }
          if (r > est.eta) {
            est.eta = r;
            best_delta = delta;
          }
        }
        if (best_delta != 0.0) {
          best[k] += best_delta;
          for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] += best_delta * phi[i];
            lf[i] += best_delta * lphi[i];
          }
        }
      }
      // The ratio is scale invariant; rescaling only keeps the step size meaningful.
      normalize(best);
      cur = build(basis, best);
      est.eta = std::max(est.eta, ratio_of(cur, k1, k2, c));
    }
  }
  return est;
}

EtaAudit audit_eta(const Grid& grid, double eta, double k1, double k2, const Coupling& c,
                   int samples, int modes_per_axis, std::uint64_t seed) {
  const SineBasis basis(grid, modes_per_axis);
  std::mt19937_64 rng(seed);
  EtaAudit audit;
  for (int s = 0; s < samples; ++s) {
    const double r = ratio_of(build(basis, random_coefficients(rng, 2 * basis.size())), k1, k2, c);
    audit.max_ratio = std::max(audit.max_ratio, r);
    if (r > eta) ++audit.violations;
    ++audit.samples;
  }
  return audit;
}

Thresholds thresholds(double eta, double p) {
  if (!(eta > 0.0)) throw std::invalid_argument("thresholds: eta must be > 0");
  Thresholds t;
  t.B = std::pow(eta, 1.0 / (2.0 * (p + 2.0)));
  t.alpha_star = std::pow(t.B, -(p + 2.0) / (p + 1.0));
  t.E1 = (0.5 - 1.0 / (2.0 * (p + 2.0))) * t.alpha_star * t.alpha_star;
  return t;
}

double well_G(double alpha, double B, double p) {
  const double q = 2.0 * (p + 2.0);
  return 0.5 * alpha * alpha - std::pow(B, q) / q * std::pow(alpha, q);
}

double decay_lambda(double eta, double p, double E0, double m0, double k) {
  return 1.0 - eta * std::pow(2.0 * (p + 2.0) * E0 / (p + 1.0), p + 1.0) -
         5.0 * (m0 - k) * (p + 2.0) / (2.0 * k * (p + 1.0));
}

TheoremConstants theorem_constants(double p, double k, double C_p) {
  if (!(k > 0.0)) throw std::invalid_argument("theorem_constants: k must be > 0");
  TheoremConstants c;
  c.C_p = C_p;
  c.C1 = (p + 2.0) / (k * (p + 1.0)) * C_p * C_p + 1.0;
  c.C3 = 2.0 * (p + 2.0) / (k * (p + 1.0));
  c.C0 = 2.0 * c.C1 + 2.0 * C_p * C_p + c.C3;
  return c;
}

CertificationReport prepare_report(const ProblemSpec& spec, const Grid& grid) {
  CertificationReport r;
  const StiffnessConstants k = check_admissible(spec.g1, spec.g2, spec.material);
  r.k1 = k.k1;
  r.k2 = k.k2;
  r.k = k.k;
  r.seed = spec.seed;
  const double p = spec.coupling.p;

  if (spec.coupling.a == 0.0 && spec.coupling.b == 0.0) {
    r.eta_estimate = 0.0;
    r.B = 0.0;
    r.alpha_star = std::numeric_limits<double>::infinity();
    r.E1 = std::numeric_limits<double>::infinity();
    r.notes.push_back("coupling vanishes (a = b = 0): eta = 0, alpha_star and E1 are infinite");
  } else {
    EtaSearchConfig cfg;
    cfg.trials = spec.certify.eta_trials;
    cfg.refine_steps = spec.certify.refine_steps;
    cfg.modes_per_axis = spec.certify.modes_per_axis;
    cfg.seed = spec.seed;
    const EtaEstimate est = estimate_eta(grid, k.k1, k.k2, spec.coupling, cfg);
    r.eta_estimate = est.eta;
    r.eta_best_random = est.best_random;
    const EtaAudit audit = audit_eta(grid, est.eta, k.k1, k.k2, spec.coupling,
                                     spec.certify.audit_samples, spec.certify.modes_per_axis,
                                     spec.seed + 1);
    r.eta_audit_samples = audit.samples;
    r.eta_audit_violations = audit.violations;
    const Thresholds th = thresholds(est.eta, p);
    r.B = th.B;
    r.alpha_star = th.alpha_star;
    r.E1 = th.E1;
    if (spec.coupling.a != 1.0 || spec.coupling.b != 1.0)
      r.notes.push_back("eta ratio uses the weighted numerator 2(p+2) int F(u, v) (a, b != 1)");
  }
  r.notes.push_back("eta is estimated on the discrete space and lower-bounds the optimal constant");

  if (kernel_mass(spec.g1) == 0.0 && kernel_mass(spec.g2) == 0.0)
    r.notes.push_back(
        "kernels vanish: k = m0 and the memory terms are identically zero");

  const TheoremConstants tc = theorem_constants(p, k.k, poincare_constant(grid));
  r.C_p = tc.C_p;
  r.C1 = tc.C1;
  r.C3 = tc.C3;
  r.C0 = tc.C0;
  return r;
}

void check_hypotheses(CertificationReport& report, const EnergyRecord& initial,
                      const ProblemSpec& spec) {
  const double p = spec.coupling.p;
  report.E0 = initial.E_value;
  report.initial_well_norm =
      std::sqrt(std::max(0.0, report.k1 * initial.grad_u_sq + report.k2 * initial.grad_v_sq));
  report.hyp_E0_below_E1 = report.E0 < report.E1;
  report.hyp_initial_in_well = report.initial_well_norm < report.alpha_star;
  report.lambda = decay_lambda(report.eta_estimate, p, std::max(0.0, report.E0),
                               spec.material.m0, report.k);
  report.hyp_lambda_positive = report.lambda > 0.0;
}

WellMonitor::WellMonitor(const CertificationReport& report, const ProblemSpec& spec)
    : alpha_star_(report.alpha_star), B_(report.B), p_(spec.coupling.p) {}

bool WellMonitor::observe(const EnergyRecord& r) {
  ++samples_;
  max_alpha_ = std::max(max_alpha_, r.alpha);
  const bool inside = r.alpha < alpha_star_;
  in_well_ = in_well_ && inside;
  if (!(well_G(r.alpha, B_, p_) <= r.E_value + 1e-8)) g_bound_ = false;

  const double scale = std::max(1.0, r.alpha * r.alpha);
  const double chain_floor = (p_ + 1.0) / (2.0 * (p_ + 2.0)) * r.alpha * r.alpha;
  if (inside && (r.I_value < -1e-12 * scale || r.J_value < chain_floor - 1e-12 * scale))
    chain_ = false;
  return inside;
}

void WellMonitor::finish(CertificationReport& report) const {
  report.trajectory_checked = samples_ > 0;
  report.trajectory_in_well = in_well_;
  report.well_G_bound_holds = g_bound_;
  report.energy_chain_holds = chain_;
  report.max_alpha = max_alpha_;
  report.samples_monitored = samples_;
}

namespace {

struct BoundCheck {
  bool satisfied = true;
  long samples = 0;
};

BoundCheck check_bound(const std::vector<EnergyRecord>& series, double E0, double rate,
                       double t_start) {
  BoundCheck b;
  for (const auto& r : series) {
    if (r.t < t_start) continue;
    ++b.samples;
    const double bound = E0 * std::exp(1.0 - rate * r.t);
    if (!(r.E_value <= bound * (1.0 + 1e-12))) b.satisfied = false;
  }
  return b;
}

}  // namespace

void decay_fit(const std::vector<EnergyRecord>& series, CertificationReport& report) {
  report.fit_available = false;
  report.fitted_rate = 0.0;
  report.fit_samples = 0;
  report.theorem_rate_bound = report.C0 > 0.0 ? report.lambda / report.C0 : 0.0;
  report.proof_rate_bound = 2.0 * report.theorem_rate_bound;
  report.bound_applicable = report.lambda > 0.0;
  report.bound_satisfied = true;
  report.proof_bound_satisfied = true;
  report.bound_samples_checked = 0;
  report.proof_bound_samples_checked = 0;
  if (series.empty()) return;

  const double E0 = series.front().E_value;
  const double T = series.back().t;
  report.fit_window_start = 0.2 * T;
  report.fit_window_end = T;

  std::vector<double> ts, ys;
  for (const auto& r : series) {
    if (!(r.E_value > 0.0) || r.E_value < 1e-14 * E0) break;
    if (r.t < report.fit_window_start) continue;
    ts.push_back(r.t);
    ys.push_back(std::log(r.E_value));
  }
  if (ts.size() >= 10) {
    // Shift by the first sample so a constant series gives an exact zero slope.
    const double t0 = ts.front();
    const double y0 = ys.front();
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i] - t0;
      my += ys[i] - y0;
    }
    mt /= static_cast<double>(ts.size());
    my /= static_cast<double>(ts.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double dx = ts[i] - t0 - mt;
      sxy += dx * (ys[i] - y0 - my);
      sxx += dx * dx;
    }
    if (sxx > 0.0) {
      report.fit_available = true;
      report.fitted_rate = -sxy / sxx;
      report.fit_samples = static_cast<long>(ts.size());
      report.fit_window_end = ts.back();
    }
  }
  if (!report.fit_available) report.notes.push_back("decay fit unavailable: fewer than 10 samples in window");

  if (report.bound_applicable) {
    const BoundCheck th = check_bound(series, E0, report.theorem_rate_bound,
                                      report.C0 / report.lambda);
    report.bound_satisfied = th.satisfied;
    report.bound_samples_checked = th.samples;
    const BoundCheck pr = check_bound(series, E0, report.proof_rate_bound,
                                      report.C0 / (2.0 * report.lambda));
    report.proof_bound_satisfied = pr.satisfied;
    report.proof_bound_samples_checked = pr.samples;
    if (th.samples == 0)
      report.notes.push_back("run ends before C0/lambda: decay bound has no samples to check");
  } else {
    report.notes.push_back("lambda <= 0: the decay theorem's hypothesis fails, bound not checked");
  }
}

}  // namespace kvwave
