#pragma once

#include "homog/discrete.hpp"

#include <cstdint>

namespace homog {

struct EigenOptions {
  double tolerance = 1e-12;  // relative residual of the Ritz pairs
  int max_iterations = 1000;
  int dense_limit = 200;     // dense solver up to this many unknowns
  std::uint64_t seed = 7;
};

/// Number of eigenvalues of the pencil (H, G) below sigma, from the inertia
/// of an LDL^H factorization of H - sigma G. G must be positive definite.
int count_below(const SparseC& H, const SparseC& G, double sigma);

/// k smallest eigenvalues of H v = lambda G v, ascending. H, G Hermitian, G
/// positive definite, 1 <= k <= 10. Shift-invert block iteration with
/// Rayleigh-Ritz; the shift comes from an inertia bisection. Throws
/// SolverDiverged when the iteration does not converge.
std::vector<double> lowest_eigenvalues(const SparseC& H, const SparseC& G, int k,
                                       const EigenOptions& opts = {});

std::vector<double> lowest_eigenvalues(const DiscreteOperator& H, const DiscreteOperator& G,
                                       int k, const EigenOptions& opts = {});

}  // namespace homog
