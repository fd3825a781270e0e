#pragma once

#include "homog/coeffs.hpp"

#include <map>
#include <memory>
#include <set>
#include <shared_mutex>

namespace homog {

/// Uniform periodic grid {j / n}^d on the unit cell, axis 0 fastest.
struct CellGrid {
  int d = 1;
  int n = 64;

  CellGrid() = default;
  /// Throws ProblemError unless n is a power of two >= 8 and d is 1 or 2.
  CellGrid(int d, int n);

  [[nodiscard]] int size() const { return d == 1 ? n : n * n; }
  [[nodiscard]] double h() const { return 1.0 / n; }
  /// Coordinates of node k (offset 0) or of the cell centre after it (offset 0.5).
  [[nodiscard]] Point node(int k, double offset = 0.0) const;
  /// Index of the neighbour of k shifted by s along axis a, periodic.
  [[nodiscard]] int shift(int k, int a, int s) const;
};

/// Auto: conjugate gradients up to 4096 unknowns, a direct factorization above.
enum class CellBackend { Auto, ConjugateGradient, Direct };

struct CellSolverOptions {
  CellBackend backend = CellBackend::Auto;
  double tolerance = 1e-12;       // target relative residual
  double accept_residual = 1e-10; // contract bound
  int max_iter_factor = 20;       // iteration cap = factor * unknowns
};

/// Samples of a matrix field at the cell centres (xi_k + h/2) for fixed x.
std::vector<CMatrix> sample_on_cell(const MatrixField& f, const Point& x, const CellGrid& grid,
                                    double offset);

/// Forward-difference symbol operator B_h: (n N) -> (m N), node-major.
SparseC cell_B_operator(const BStructure& bs, const CellGrid& grid);

/// B_h^H A B_h with A block diagonal per node (m x m blocks). Exactly Hermitian.
SparseC cell_operator(const std::vector<CMatrix>& A_samples, const BStructure& bs,
                      const CellGrid& grid);

struct PeriodicSolution {
  CMatrix values;                 // (n N) x cols, node-major
  std::vector<double> residuals;  // relative residual per column
  std::vector<int> iterations;
};

/// Zero-mean periodic solution of B_h^H A B_h v = f, column by column.
/// rhs is (n N) x cols. Throws SolvabilityViolated or SolverDiverged.
PeriodicSolution solve_periodic_system(const std::vector<CMatrix>& A_samples, const CMatrix& rhs,
                                       const BStructure& bs, const CellGrid& grid,
                                       const CellSolverOptions& opts = {});

/// Same with a pre-assembled cell operator.
PeriodicSolution solve_periodic_system(const SparseC& K, int n, const CMatrix& rhs,
                                       const CellGrid& grid, const CellSolverOptions& opts = {});

/// Componentwise grid mean of an (n N) x cols node-major array, n x cols.
CMatrix cell_mean(const CMatrix& values, int n, const CellGrid& grid);

struct CellCorrectors {
  Point x;
  CellGrid grid;
  std::vector<CMatrix> lambda0;  // n x n per node
  std::vector<CMatrix> lambda1;  // n x m per node
  double residual0 = 0.0;
  double residual1 = 0.0;
};

/// Correctors at slow point x.
CellCorrectors solve_correctors(const CoefficientSet& cs, const Point& x, const CellGrid& grid,
                                const CellSolverOptions& opts = {});

/// Forward difference along axis a of per-node matrices.
std::vector<CMatrix> cell_forward_difference(const std::vector<CMatrix>& f, const CellGrid& grid,
                                             int a);

/// Lazily memoized correctors on a declared set of slow nodes. get() is safe
/// to call from several threads.
class CorrectorCache {
 public:
  CorrectorCache(const CoefficientSet& cs, std::vector<Point> x_nodes, CellGrid grid,
                 CellSolverOptions opts = {});

  /// Correctors at x; computes on first use. Throws CacheMiss for undeclared
  /// nodes and rethrows solver errors with the node appended.
  std::shared_ptr<const CellCorrectors> get(const Point& x) const;
  /// Solves every declared node, in parallel.
  void compute_all() const;

  [[nodiscard]] const std::vector<Point>& nodes() const { return nodes_; }
  [[nodiscard]] const CellGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t computed() const;
  [[nodiscard]] bool contains(const Point& x) const;

 private:
  CoefficientSet cs_;
  std::vector<Point> nodes_;
  std::set<Point> declared_;
  CellGrid grid_;
  CellSolverOptions opts_;
  bool x_independent_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Point, std::shared_ptr<const CellCorrectors>> memo_;
};

}  // namespace homog
