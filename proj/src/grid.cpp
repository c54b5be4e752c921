#include "kvwave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kvwave {

namespace {

void check_axis(double length, int n) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("grid: domain length must be positive and finite");
  }
  if (n < 3) {
    throw std::invalid_argument("grid: need at least 3 interior nodes per axis, got " +
                                std::to_string(n));
  }
}

}  // namespace

Grid::Grid(double length, int n) : dim_(1), lengths_{length, 1.0}, n_{n, 1} {
  check_axis(length, n);
}

Grid::Grid(double lx, double ly, int nx, int ny) : dim_(2), lengths_{lx, ly}, n_{nx, ny} {
  check_axis(lx, nx);
  check_axis(ly, ny);
}

double Grid::h_min() const { return dim_ == 1 ? h(0) : std::min(h(0), h(1)); }

std::size_t Grid::size() const {
  return dim_ == 1 ? static_cast<std::size_t>(n_[0])
                   : static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
}

double Grid::cell_measure() const { return dim_ == 1 ? h(0) : h(0) * h(1); }

Field::Field(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field: value count does not match grid size");
  }
}

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid()) || a.size() != b.size()) {
    throw std::invalid_argument("fields live on different grids");
  }
}

void laplacian_apply(const Grid& grid, std::span<const double> in, std::span<double> out) {
  if (in.size() != grid.size() || out.size() != grid.size()) {
    throw std::invalid_argument("laplacian_apply: size mismatch");
  }
  const int nx = grid.n_cells(0);
  const double ihx2 = 1.0 / (grid.h(0) * grid.h(0));
  if (grid.dim() == 1) {
    for (int i = 0; i < nx; ++i) {
      const double left = i > 0 ? in[i - 1] : 0.0;
      const double right = i + 1 < nx ? in[i + 1] : 0.0;
      out[i] = (left - 2.0 * in[i] + right) * ihx2;
    }
    return;
  }
  const int ny = grid.n_cells(1);
  const double ihy2 = 1.0 / (grid.h(1) * grid.h(1));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = i + static_cast<std::size_t>(nx) * j;
      const double c = in[k];
      const double w = i > 0 ? in[k - 1] : 0.0;
      const double e = i + 1 < nx ? in[k + 1] : 0.0;
      const double s = j > 0 ? in[k - nx] : 0.0;
      const double n = j + 1 < ny ? in[k + nx] : 0.0;
      out[k] = (w - 2.0 * c + e) * ihx2 + (s - 2.0 * c + n) * ihy2;
    }
  }
}

Field laplacian_apply(const Field& f) {
  Field out(f.grid());
  laplacian_apply(f.grid(), f.values(), out.values());
  return out;
}

double l2_inner(const Grid& grid, std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw std::invalid_argument("l2_inner: size mismatch");
  return grid.cell_measure() * std::inner_product(f.begin(), f.end(), g.begin(), 0.0);
}

double l2_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return l2_inner(f.grid(), f.values(), g.values());
}

double grad_inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  return -l2_inner(laplacian_apply(f), g);
}

double grad_norm_sq(const Field& f) { return std::max(0.0, grad_inner(f, f)); }

double max_norm(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

double lp_norm(const Field& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lp_norm: q must be >= 1");
  if (std::isinf(q)) return max_norm(f.values());
  double s = 0.0;
  if (q == 2.0) {
    for (double x : f.values()) s += x * x;
  } else {
    for (double x : f.values()) s += std::pow(std::abs(x), q);
  }
  return std::pow(f.grid().cell_measure() * s, 1.0 / q);
}

ShiftedLaplacianSolver::ShiftedLaplacianSolver(const Grid& grid, double alpha, double beta,
                                               LinearSolverConfig config)
    : grid_(grid), alpha_(alpha), beta_(beta), config_(config) {
  if (!(alpha >= 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("ShiftedLaplacianSolver: need alpha >= 0 and beta > 0");
  }
  using Kind = LinearSolverConfig::Kind;
  if (config_.kind == Kind::tridiagonal && grid.dim() != 1) {
    throw std::invalid_argument("tridiagonal solver requires a 1D grid");
  }
  use_tridiagonal_ = grid.dim() == 1 && config_.kind != Kind::conjugate_gradient;
  if (!use_tridiagonal_) return;

  // Thomas factorization of the constant symmetric tridiagonal matrix.
  const int n = grid.n_cells(0);
  const double ih2 = 1.0 / (grid.h(0) * grid.h(0));
  const double diag = alpha + 2.0 * beta * ih2;
  const double off = -beta * ih2;
  c_prime_.resize(n);
  denom_.resize(n);
  denom_[0] = diag;
  c_prime_[0] = off / diag;
  for (int i = 1; i < n; ++i) {
    denom_[i] = diag - off * c_prime_[i - 1];
    c_prime_[i] = off / denom_[i];
  }
}

void ShiftedLaplacianSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  if (rhs.size() != grid_.size() || x.size() != grid_.size()) {
    throw std::invalid_argument("ShiftedLaplacianSolver: size mismatch");
  }
  if (use_tridiagonal_) {
    solve_tridiagonal(rhs, x);
  } else {
    solve_cg(rhs, x);
  }
}

void ShiftedLaplacianSolver::solve_tridiagonal(std::span<const double> rhs,
                                               std::span<double> x) const {
  const int n = grid_.n_cells(0);
  const double off = -beta_ / (grid_.h(0) * grid_.h(0));
  x[0] = rhs[0] / denom_[0];
  for (int i = 1; i < n; ++i) x[i] = (rhs[i] - off * x[i - 1]) / denom_[i];
  for (int i = n - 2; i >= 0; --i) x[i] -= c_prime_[i] * x[i + 1];
  last_iterations_ = 1;
}

void ShiftedLaplacianSolver::solve_cg(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = grid_.size();
  std::vector<double> r(n), p(n), ap(n);
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    laplacian_apply(grid_, in, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha_ * in[i] - beta_ * out[i];
  };
  auto dot = [](std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };

  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    last_iterations_ = 0;
    return;
  }
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  p = r;
  double rr = dot(r, r);
  const double target = config_.tolerance * bnorm;
  int it = 0;
  while (std::sqrt(rr) > target) {
    if (it >= config_.max_iterations) {
      last_iterations_ = it;
      throw std::runtime_error("conjugate gradient did not converge after " +
                               std::to_string(it) + " iterations (residual " +
                               std::to_string(std::sqrt(rr) / bnorm) + ")");
    }
    apply(p, ap);
    const double step = rr / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rr_new = dot(r, r);
    const double ratio = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + ratio * p[i];
    rr = rr_new;
    ++it;
  }
  last_iterations_ = it;
}

EigenEstimate smallest_laplacian_eigenvalue(const Grid& grid, double tolerance,
                                            int max_iterations) {
  LinearSolverConfig cfg;
  cfg.tolerance = 1e-14;
  cfg.max_iterations = 100000;
  const ShiftedLaplacianSolver solver(grid, 0.0, 1.0, cfg);

  const std::size_t n = grid.size();
  // The constant vector overlaps the positive ground mode.
  std::vector<double> x(n, 1.0), y(n, 0.0), lap(n);
  EigenEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const double norm = std::sqrt(l2_inner(grid, x, x));
    for (double& xi : x) xi /= norm;
    std::fill(y.begin(), y.end(), 0.0);
    solver.solve(x, y);
    // Rayleigh quotient of -Lap at the new iterate.
    laplacian_apply(grid, y, lap);
    const double num = -l2_inner(grid, lap, y);
    const double den = l2_inner(grid, y, y);
    est.value = num / den;
    est.iterations = it;
    x.swap(y);
    if (it > 1 && std::abs(est.value - previous) <= tolerance * std::abs(est.value)) {
      est.converged = true;
      break;
    }
    previous = est.value;
  }
  return est;
}

double poincare_constant(const Grid& grid) {
  const EigenEstimate est = smallest_laplacian_eigenvalue(grid);
  if (!est.converged) {
    throw std::runtime_error("poincare_constant: inverse power iteration did not converge");
  }
  return 1.0 / std::sqrt(est.value);
}

}  // namespace kvwave
