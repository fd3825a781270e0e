#pragma once

#include "homog/cell.hpp"
#include "homog/effective.hpp"

#include <optional>

namespace homog {

/// Periodic torus [0, L)^d with n points per axis, axis 0 fastest.
struct TorusGrid {
  int d = 1;
  double length = kTwoPi;
  int n = 64;

  TorusGrid() = default;
  /// Throws ProblemError unless n >= 16 and d is 1 or 2.
  TorusGrid(int d, double length, int n);

  [[nodiscard]] double h() const { return length / n; }
  [[nodiscard]] int size() const { return d == 1 ? n : n * n; }
  [[nodiscard]] int shift(int k, int a, int s) const;
  [[nodiscard]] Point node(int k) const;
  /// Integer coordinates of node k.
  [[nodiscard]] std::vector<int> index(int k) const;
  /// Volume element h^d.
  [[nodiscard]] double cell_volume() const;
};

/// eps = L / fast_periods with an integer number of fast periods.
struct EpsilonChoice {
  double eps = 1.0;
  int fast_periods = 1;

  /// Throws CommensurabilityError when L / eps is not an integer.
  static EpsilonChoice from_eps(double eps, double length);
  static EpsilonChoice from_periods(int periods, double length);
};

enum class OperatorKind { H_eps, H_0, G_eps, G_0, Identity, Other };

const char* to_string(OperatorKind kind);

struct DiscreteOperator {
  SparseC matrix;
  TorusGrid grid;
  int n = 1;
  OperatorKind kind = OperatorKind::Other;
};

/// Node-major grid function: n values per node.
using DiscreteField = CVector;

/// Fast variable x/eps mod 1 at node k, exact rational arithmetic. With
/// half = true the value at the cell centre after the node.
Point fast_coordinate(const TorusGrid& grid, const EpsilonChoice& eps, int k, bool half);

/// Forward-difference operator D_a^+ on n-vector fields.
SparseC forward_difference(const TorusGrid& grid, int n, int axis);
/// B_h = sum_i B_i D_i^+ on the torus, (m N) x (n N).
SparseC torus_B_operator(const BStructure& bs, const TorusGrid& grid);

/// B_h^H A_eps B_h + T + T^H + V_eps with T = sum_i diag(a_i) D_i^+ diag(b_i).
/// A and a_i are sampled at the cell centres, V at the nodes.
DiscreteOperator assemble_H_eps(const CoefficientSet& cs, const TorusGrid& grid,
                                const EpsilonChoice& eps);
DiscreteOperator assemble_G_eps(const CoefficientSet& cs, const TorusGrid& grid,
                                const EpsilonChoice& eps);
/// Block-diagonal multiplication by the sampled field (node values).
DiscreteOperator multiplication_operator(const MatrixField& f, const TorusGrid& grid,
                                         const EpsilonChoice& eps, int n);
DiscreteOperator identity_operator(const TorusGrid& grid, int n);

/// Coefficients of hc at every torus node. Equal node sets are copied;
/// otherwise hc must live on a uniform slow grid over the same period (or a
/// single node) and is interpolated linearly. Throws NodeMismatch.
HomogenizedCoefficients align_to_grid(const HomogenizedCoefficients& hc, const TorusGrid& grid);

/// B_h^H A2 B_h + K + K^H + T0 + T0^H + A0 with K = diag(A1_right) B_h and
/// T0 = sum_i diag(<a_i>) D_i^+ diag(b_i). The slow derivatives of b_i enter
/// through T0, so A1_zeroth is not added again.
DiscreteOperator assemble_H_0(const HomogenizedCoefficients& hc, const BStructure& bs,
                              const TorusGrid& grid);
DiscreteOperator assemble_G_0(const HomogenizedCoefficients& hc, const TorusGrid& grid);

/// Lambda1(x, x/eps) (B_h u0)(x) + Lambda0(x, x/eps) u0(x) at every node.
/// Throws CacheMiss if a torus node is not declared in the cache.
DiscreteField apply_corrector(const CorrectorCache& cache, const BStructure& bs,
                              const DiscreteField& u0, const TorusGrid& grid,
                              const EpsilonChoice& eps);

double l2_norm(const DiscreteField& u, const TorusGrid& grid);
/// sqrt(||u||^2 + sum_a ||D_a^+ u||^2).
double w1_norm(const DiscreteField& u, const TorusGrid& grid, int n);
/// Samples one slow field per component at the torus nodes (xi = 0).
DiscreteField sample_rhs(const std::vector<ScalarField>& components, const TorusGrid& grid);

enum class ShiftBackend { Direct, Krylov };

struct ShiftedSolverOptions {
  ShiftBackend backend = ShiftBackend::Direct;
  double tolerance = 1e-12;       // Krylov stopping tolerance
  double accept_residual = 1e-10;
  int max_refinement = 3;
  int max_iterations = 0;         // 0: 20 * unknowns
};

/// Factorizes H - lambda G once and solves for many right-hand sides.
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteOperator& H, const DiscreteOperator& G, Complex lambda,
                ShiftedSolverOptions opts = {});
  ~ShiftedSolver();
  ShiftedSolver(const ShiftedSolver&) = delete;
  ShiftedSolver& operator=(const ShiftedSolver&) = delete;

  /// Throws SolverDiverged when the residual contract fails.
  [[nodiscard]] DiscreteField solve(const DiscreteField& f) const;
  [[nodiscard]] double last_residual() const { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0.0;
};

/// Lower edge estimate of the pencil (H, G): mu = min(h / g1, h / g2) with h
/// the smallest eigenvalue of H and g1, g2 the extreme eigenvalues of G.
struct ShiftWindow {
  double h_hat = 0.0;
  double g1 = 1.0;
  double g2 = 1.0;
  double mu_hat = 0.0;
};

ShiftWindow shift_window(const DiscreteOperator& H, const DiscreteOperator& G);

/// Throws ShiftInsideSpectrum for real lambda >= mu_hat - margin.
void check_shift(Complex lambda, const ShiftWindow& window, double margin = 1e-6);

/// (H - lambda G)^{-1} f after checking the shift (window computed if absent).
DiscreteField solve_shifted(const DiscreteOperator& H, const DiscreteOperator& G, Complex lambda,
                            const DiscreteField& f,
                            const std::optional<ShiftWindow>& window = std::nullopt,
                            const ShiftedSolverOptions& opts = {}, double margin = 1e-6);

/// Extreme eigenvalues over the diagonal blocks of a block-diagonal operator.
std::pair<double, double> block_eigen_range(const DiscreteOperator& G);

}  // namespace homog
