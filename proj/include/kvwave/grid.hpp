#pragma once

/// @file grid.hpp
/// @brief Uniform tensor grids on an interval or rectangle with homogeneous
/// Dirichlet boundary values, grid functions and the discrete operators on them.
///
/// Only interior nodes are stored. Boundary values are identically zero and
/// enter the 3/5-point Laplacian as zero ghost values. The discrete Dirichlet
/// form is defined as <-Lap f, f>, so summation by parts holds exactly.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace kvwave {

class Grid {
 public:
  Grid() = default;
  /// 1D interval (0, length) with n interior nodes.
  Grid(double length, int n);
  /// 2D rectangle (0, lx) x (0, ly) with nx * ny interior nodes.
  Grid(double lx, double ly, int nx, int ny);

  int dim() const { return dim_; }
  double length(int axis) const { return lengths_[axis]; }
  int n_cells(int axis) const { return n_[axis]; }
  double h(int axis) const { return lengths_[axis] / (n_[axis] + 1); }
  double h_min() const;
  /// Number of interior unknowns.
  std::size_t size() const;
  /// Quadrature weight of one node (h or h1*h2).
  double cell_measure() const;
  /// Coordinate of interior node i along axis (i = 0 is the first interior node).
  double coord(int axis, int i) const { return (i + 1) * h(axis); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_ = 1;
  std::array<double, 2> lengths_{1.0, 1.0};
  std::array<int, 2> n_{3, 1};
};

/// Grid function over interior nodes. Node (i, j) of a 2D grid is stored at
/// i + nx * j.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument if the fields live on different grids.
void require_same_grid(const Field& a, const Field& b);

/// Samples fn at interior nodes.
template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field f(grid);
  if (grid.dim() == 1) {
    for (int i = 0; i < grid.n_cells(0); ++i) f[i] = fn(grid.coord(0, i), 0.0);
  } else {
    const int nx = grid.n_cells(0);
    for (int j = 0; j < grid.n_cells(1); ++j) {
      for (int i = 0; i < nx; ++i) {
        f[i + static_cast<std::size_t>(nx) * j] = fn(grid.coord(0, i), grid.coord(1, j));
      }
    }
  }
  return f;
}

/// Second-order central differences with zero Dirichlet ghosts.
Field laplacian_apply(const Field& f);
void laplacian_apply(const Grid& grid, std::span<const double> in, std::span<double> out);

/// Discrete Dirichlet form <-Lap f, f>.
double grad_norm_sq(const Field& f);
/// <grad f, grad g> := <-Lap f, g>.
double grad_inner(const Field& f, const Field& g);

double l2_inner(const Field& f, const Field& g);
double l2_inner(const Grid& grid, std::span<const double> f, std::span<const double> g);
/// Discrete L^q norm, q >= 1 (q = infinity allowed).
double lp_norm(const Field& f, double q);
double max_norm(std::span<const double> f);

/// Solver selection for the SPD systems (alpha I - beta Lap) x = rhs.
struct LinearSolverConfig {
  enum class Kind { automatic, tridiagonal, conjugate_gradient };
  Kind kind = Kind::automatic;
  double tolerance = 1e-12;
  int max_iterations = 5000;

  friend bool operator==(const LinearSolverConfig&, const LinearSolverConfig&) = default;
};

/// Solves (alpha I - beta Lap) x = rhs with alpha >= 0, beta > 0.
///
/// In 1D the tridiagonal factorization is computed once at construction.
/// The CG path throws std::runtime_error with the iteration count on
/// non-convergence.
class ShiftedLaplacianSolver {
 public:
  ShiftedLaplacianSolver(const Grid& grid, double alpha, double beta,
                         LinearSolverConfig config = {});

  /// x is used as the initial guess for CG.
  void solve(std::span<const double> rhs, std::span<double> x) const;
  int last_iterations() const { return last_iterations_; }

 private:
  void solve_tridiagonal(std::span<const double> rhs, std::span<double> x) const;
  void solve_cg(std::span<const double> rhs, std::span<double> x) const;

  Grid grid_;
  double alpha_;
  double beta_;
  LinearSolverConfig config_;
  bool use_tridiagonal_ = false;
  std::vector<double> c_prime_;
  std::vector<double> denom_;
  mutable int last_iterations_ = 0;
};

/// Smallest eigenvalue of -Lap by inverse power iteration.
struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};
EigenEstimate smallest_laplacian_eigenvalue(const Grid& grid, double tolerance = 1e-12,
                                            int max_iterations = 10000);

/// C_p = 1/sqrt(lambda_1): ||f||_2 <= C_p ||grad f||_2 on the grid.
double poincare_constant(const Grid& grid);

}  // namespace kvwave
