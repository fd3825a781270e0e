#pragma once

#include "homog/discrete.hpp"
#include "homog/eigensolver.hpp"

#include <limits>
#include <string>

namespace homog {

/// Per-leg grids: n_phys = points_per_period * (L / eps) unless n_phys is
/// fixed; the cell grid has n_phys * eps / L points unless n_cell is fixed.
struct GridPlan {
  int points_per_period = 16;
  int n_phys = 0;
  int n_cell = 0;
  CellSolverOptions cell;
  CrossCheckPolicy cross_check;
  bool fd_probe = true;  // grid-doubling estimate of the discretization error
};

struct LegGrids {
  TorusGrid torus;
  CellGrid cell;
  EpsilonChoice eps;
};

/// Throws ProblemError when the plan cannot produce a valid torus and cell grid.
LegGrids plan_leg(const CoefficientSet& cs, const GridPlan& plan, double eps);

struct SpectralWindow {
  double h0_hat = 0.0;
  double mu0_hat = 0.0;
  std::vector<double> h_eps_hat;
  std::vector<double> mu_eps_hat;
};

struct ConvergenceReport {
  std::vector<double> eps_list;
  std::vector<int> n_phys;
  std::vector<int> n_cell;
  std::vector<double> err_L2;
  std::vector<double> err_W1_corrected;
  std::vector<double> err_W1_uncorrected;
  std::vector<double> fd_error;       // grid-doubling estimate for u0, NaN when skipped
  std::vector<double> residual_eps;   // relative residuals of the two solves
  std::vector<double> residual_0;
  std::vector<double> max_discrepancy;
  double rate_L2 = std::numeric_limits<double>::quiet_NaN();
  double rate_W1 = std::numeric_limits<double>::quiet_NaN();
  double rate_W1_uncorrected = std::numeric_limits<double>::quiet_NaN();
  int fit_points = 0;
  int clean_prefix = 0;
  bool floor_contaminated = false;
  Complex lambda{-1.0, 0.0};
  std::string rhs_id;
  SpectralWindow window;
  std::vector<std::string> warnings;

  /// rate_L2 >= threshold, rate_W1 >= threshold and no contamination flag.
  [[nodiscard]] bool passed(double threshold = 0.9) const;
};

/// Fits the slope of log err against log eps. Zero errors are left out;
/// all-zero input gives +infinity. Throws DegenerateFit with fewer than three
/// positive points (unless all are zero).
double fit_rate(std::span<const double> eps, std::span<const double> err);

/// Eps values L / N for the given period counts, descending.
std::vector<double> eps_sweep(std::span<const int> periods, double length);

/// Resolvent sweep: u_eps = (H_eps - lambda G_eps)^{-1} f versus the
/// homogenized solution and its first-order corrector, per eps. f holds one
/// slow field per component.
ConvergenceReport run_resolvent_convergence(const CoefficientSet& cs, const GridPlan& plan,
                                            Complex lambda, const std::vector<ScalarField>& f,
                                            std::span<const double> eps_list,
                                            const std::string& rhs_id = "");

struct SpectrumReport {
  std::vector<double> eps_list;
  std::vector<int> n_phys;
  std::vector<std::vector<double>> eig_eps;  // [leg][j]
  std::vector<std::vector<double>> eig_0;
  std::vector<std::vector<double>> gaps;
  std::vector<double> shrink;       // first gap / last gap per j (inf when last is zero)
  std::vector<bool> converged;      // last gap at numerical zero
  bool monotone = true;             // gaps non-increasing up to 10 %
  int k = 0;

  /// Every eigenvalue gap shrinks by the factor, or ends at numerical zero.
  [[nodiscard]] bool passed(double factor = 4.0) const;
};

/// Gaps below this are treated as zero: 1e-9 max(1, |lambda|).
double gap_floor(double lambda);

/// Requires G = E_n. Throws ProblemError otherwise.
SpectrumReport run_spectrum_convergence(const CoefficientSet& cs, const GridPlan& plan, int k,
                                        std::span<const double> eps_list);

}  // namespace homog
