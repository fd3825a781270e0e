#pragma once

#include "homog/cell.hpp"

namespace homog {

struct CrossCheckPolicy {
  bool enforce = true;
  double tolerance = 1e-6;
};

/// Principal coefficient at one slow node.
struct A2Forms {
  CMatrix flux;         // <A (B Lambda1 + E)>, Hermitian part
  CMatrix energy;       // <X* A X>
  double discrepancy = 0.0;
};

/// First- and zeroth-order homogenized coefficients at one slow node.
struct LowerOrderForms {
  CMatrix A1_left;             // <A B Lambda0>, m x n
  CMatrix A1_right;            // <(B Lambda0)* A>, n x m
  CMatrix A1_right_simplified; // sum_i <a_i b_i d_i Lambda1>
  CMatrix A1_zeroth;           // sum_i <a_i> d_i b_i - b_i* d_i <a_i>*, n x n
  CMatrix A0;                  // -<(B Lambda0)* A B Lambda0> + <V>
  CMatrix A0_simplified;       // sum_i <a_i b_i d_i Lambda0> + <V>
  std::vector<CMatrix> a_mean; // <a_i>
  std::vector<CMatrix> b;      // b_i(x)
  double discrepancy_A1 = 0.0;
  double discrepancy_A0 = 0.0;
};

/// Throw CrossCheckFailed when a discrepancy exceeds the policy tolerance.
A2Forms assemble_A2(const CellCorrectors& corr, const CoefficientSet& cs,
                    const CrossCheckPolicy& policy = {});
LowerOrderForms assemble_A1_A0(const CellCorrectors& corr, const CoefficientSet& cs,
                               const CrossCheckPolicy& policy = {});
/// Cell mean of G at x on the grid nodes.
CMatrix assemble_G0(const CoefficientSet& cs, const Point& x, const CellGrid& grid);

/// Homogenized coefficients on a uniform periodic slow grid of n_slow nodes
/// per axis (n_slow = 1: a single node at the origin, x-independent data).
struct HomogenizedCoefficients {
  int d = 1;
  int n = 1;
  int m = 1;
  int n_slow = 1;
  double length = kTwoPi;
  CellGrid grid;
  std::vector<Point> x_nodes;
  std::vector<CMatrix> A2, A1_left, A1_right, A1_zeroth, A0, G0;
  std::vector<std::vector<CMatrix>> a_mean;  // [node][i]
  std::vector<std::vector<CMatrix>> b;       // [node][i]
  std::vector<double> discrepancy_A2, discrepancy_A1, discrepancy_A0;

  [[nodiscard]] double max_discrepancy() const;
};

/// Slow nodes k h of the uniform grid with n_slow points per axis.
std::vector<Point> slow_grid_nodes(int d, int n_slow, double length);

/// Computes every coefficient at the cache nodes, which must be the nodes of
/// slow_grid_nodes(d, n_slow, length). Runs per node in parallel.
HomogenizedCoefficients homogenize(const CoefficientSet& cs, const CorrectorCache& cache,
                                   int n_slow, const CrossCheckPolicy& policy = {});

/// Convenience: builds the cache on the slow grid and homogenizes.
HomogenizedCoefficients homogenize(const CoefficientSet& cs, int n_slow, const CellGrid& grid,
                                   const CrossCheckPolicy& policy = {},
                                   const CellSolverOptions& opts = {});

}  // namespace homog
