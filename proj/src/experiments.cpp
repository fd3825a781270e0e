#include "homog/experiments.hpp"

#include <cmath>
#include <sstream>

namespace homog {

LegGrids plan_leg(const CoefficientSet& cs, const GridPlan& plan, double eps) {
  LegGrids g;
  g.eps = EpsilonChoice::from_eps(eps, cs.length);
  const int periods = g.eps.fast_periods;
  const int n_phys = plan.n_phys > 0 ? plan.n_phys : plan.points_per_period * periods;
  g.torus = TorusGrid(cs.d(), cs.length, n_phys);
  int n_cell = plan.n_cell;
  if (n_cell <= 0) {
    if (n_phys % periods != 0) {
      throw ProblemError("n_phys = " + std::to_string(n_phys) +
                         " is not a multiple of the number of fast periods " +
                         std::to_string(periods) + "; set n_cell explicitly");
    }
    n_cell = n_phys / periods;
  }
  g.cell = CellGrid(cs.d(), n_cell);
  return g;
}

bool ConvergenceReport::passed(double threshold) const {
  return rate_L2 >= threshold && rate_W1 >= threshold && !floor_contaminated;
}

double fit_rate(std::span<const double> eps, std::span<const double> err) {
  if (eps.size() != err.size()) throw DegenerateFit("eps and error lists differ in length");
  bool all_zero = !err.empty();
  for (double e : err) all_zero = all_zero && e == 0.0;
  if (all_zero) return std::numeric_limits<double>::infinity();
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (err[i] > 0.0 && std::isfinite(err[i]) && eps[i] > 0.0) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(std::log(err[i]));
    }
  }
  if (lx.size() < 3) {
    throw DegenerateFit("rate fit needs at least three positive errors, got " +
                        std::to_string(lx.size()));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("rate fit needs distinct eps values");
  return sxy / sxx;
}

std::vector<double> eps_sweep(std::span<const int> periods, double length) {
  std::vector<double> out;
  for (int p : periods) out.push_back(length / p);
  return out;
}

namespace {

void check_sweep(std::span<const double> eps_list) {
  if (eps_list.size() < 3) throw ProblemError("an eps sweep needs at least three values");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) {
      throw ProblemError("eps values must be strictly decreasing");
    }
  }
}

std::vector<Point> torus_nodes(const TorusGrid& grid) {
  std::vector<Point> nodes(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) nodes[k] = grid.node(k);
  return nodes;
}

// Values on the even nodes of a grid with twice the resolution.
DiscreteField restrict_to_coarse(const DiscreteField& fine, const TorusGrid& coarse, int n) {
  DiscreteField out(static_cast<Eigen::Index>(n) * coarse.size());
  const int nf = 2 * coarse.n;
  for (int k = 0; k < coarse.size(); ++k) {
    const auto idx = coarse.index(k);
    int kf = 2 * idx[0];
    if (coarse.d == 2) kf += 2 * idx[1] * nf;
    out.segment(k * n, n) = fine.segment(kf * n, n);
  }
  return out;
}

struct LegResult {
  double err_L2 = 0.0;
  double err_W1 = 0.0;
  double err_W1_unc = 0.0;
  double fd = std::numeric_limits<double>::quiet_NaN();
  double res_eps = 0.0;
  double res_0 = 0.0;
  double discrepancy = 0.0;
  ShiftWindow w_eps;
  ShiftWindow w_0;
};

}  // namespace

ConvergenceReport run_resolvent_convergence(const CoefficientSet& cs, const GridPlan& plan,
                                            Complex lambda, const std::vector<ScalarField>& f,
                                            std::span<const double> eps_list,
                                            const std::string& rhs_id) {
  check_sweep(eps_list);
  if (static_cast<int>(f.size()) != cs.n()) {
    throw ProblemError("right-hand side needs one field per component");
  }
  ConvergenceReport rep;
  rep.lambda = lambda;
  rep.rhs_id = rhs_id;
  const int n = cs.n();
  for (double eps : eps_list) {
    const LegGrids g = plan_leg(cs, plan, eps);
    std::string where;
    {
      std::ostringstream os;
      os.precision(17);
      os << " (eps = " << g.eps.eps << ")";
      where = os.str();
    }
    LegResult r;
    try {
      CorrectorCache cache(cs, torus_nodes(g.torus), g.cell, plan.cell);
      const int n_slow = cs.depends_on_x() ? g.torus.n : 1;
      const HomogenizedCoefficients hc = homogenize(cs, cache, n_slow, plan.cross_check);
      r.discrepancy = hc.max_discrepancy();
      const DiscreteOperator H = assemble_H_eps(cs, g.torus, g.eps);
      const DiscreteOperator G = assemble_G_eps(cs, g.torus, g.eps);
      const DiscreteOperator H0 = assemble_H_0(hc, cs.bstruct, g.torus);
      const DiscreteOperator G0 = assemble_G_0(hc, g.torus);
      r.w_eps = shift_window(H, G);
      r.w_0 = shift_window(H0, G0);
      check_shift(lambda, r.w_eps);
      check_shift(lambda, r.w_0);
      const DiscreteField rhs = sample_rhs(f, g.torus);
      ShiftedSolver s_eps(H, G, lambda);
      const DiscreteField u = s_eps.solve(rhs);
      r.res_eps = s_eps.last_residual();
      ShiftedSolver s_0(H0, G0, lambda);
      const DiscreteField u0 = s_0.solve(rhs);
      r.res_0 = s_0.last_residual();
      const DiscreteField corrected =
          u0 + g.eps.eps * apply_corrector(cache, cs.bstruct, u0, g.torus, g.eps);
      r.err_L2 = l2_norm(u - u0, g.torus);
      r.err_W1 = w1_norm(u - corrected, g.torus, n);
      r.err_W1_unc = w1_norm(u - u0, g.torus, n);
      if (plan.fd_probe) {
        const TorusGrid fine(g.torus.d, g.torus.length, 2 * g.torus.n);
        const DiscreteOperator H0f = assemble_H_0(hc, cs.bstruct, fine);
        const DiscreteOperator G0f = assemble_G_0(hc, fine);
        ShiftedSolver s_f(H0f, G0f, lambda);
        const DiscreteField u0f = s_f.solve(sample_rhs(f, fine));
        r.fd = l2_norm(u0 - restrict_to_coarse(u0f, g.torus, n), g.torus);
      }
    } catch (const SolverDiverged& e) {
      throw SolverDiverged(std::string(e.what()) + where);
    } catch (const ShiftInsideSpectrum& e) {
      throw ShiftInsideSpectrum(std::string(e.what()) + where);
    }
    rep.eps_list.push_back(g.eps.eps);
    rep.n_phys.push_back(g.torus.n);
    rep.n_cell.push_back(g.cell.n);
    rep.err_L2.push_back(r.err_L2);
    rep.err_W1_corrected.push_back(r.err_W1);
    rep.err_W1_uncorrected.push_back(r.err_W1_unc);
    rep.fd_error.push_back(r.fd);
    rep.residual_eps.push_back(r.res_eps);
    rep.residual_0.push_back(r.res_0);
    rep.max_discrepancy.push_back(r.discrepancy);
    rep.window.h_eps_hat.push_back(r.w_eps.h_hat);
    rep.window.mu_eps_hat.push_back(r.w_eps.mu_hat);
    rep.window.h0_hat = r.w_0.h_hat;
    rep.window.mu0_hat = r.w_0.mu_hat;
  }

  const std::size_t legs = rep.eps_list.size();
  std::size_t clean = 0;
  while (clean < legs) {
    const double fd = rep.fd_error[clean];
    const double e = rep.err_L2[clean];
    if (e > 0.0 && std::isfinite(fd) && fd > 0.1 * e) break;
    ++clean;
  }
  rep.clean_prefix = static_cast<int>(clean);
  rep.floor_contaminated = clean < legs;
  if (rep.floor_contaminated) {
    rep.warnings.push_back("FloorContaminated: discretization error exceeds 10% of the "
                           "homogenization error from eps = " +
                           std::to_string(rep.eps_list[clean]));
  }
  if (clean < 3) {
    rep.warnings.push_back("DegenerateFit: fewer than three clean eps values");
    return rep;
  }
  const std::size_t first = clean - 3;
  const std::span<const double> e(rep.eps_list.data() + first, 3);
  rep.fit_points = 3;
  auto fit = [&](const std::vector<double>& err, const char* name) {
    try {
      return fit_rate(e, std::span<const double>(err.data() + first, 3));
    } catch (const DegenerateFit& ex) {
      rep.warnings.push_back(std::string("DegenerateFit (") + name + "): " + ex.what());
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  rep.rate_L2 = fit(rep.err_L2, "L2");
  rep.rate_W1 = fit(rep.err_W1_corrected, "W1");
  rep.rate_W1_uncorrected = fit(rep.err_W1_uncorrected, "W1 uncorrected");
  if (rep.rate_L2 < 0.8) rep.warnings.push_back("RateAnomalous: L2 rate below 0.8");
  return rep;
}

// ---------------------------------------------------------------------------

double gap_floor(double lambda) { return 1e-9 * std::max(1.0, std::abs(lambda)); }

bool SpectrumReport::passed(double factor) const {
  if (shrink.empty()) return false;
  for (std::size_t j = 0; j < shrink.size(); ++j) {
    if (!(converged[j] || shrink[j] >= factor)) return false;
  }
  return true;
}

SpectrumReport run_spectrum_convergence(const CoefficientSet& cs, const GridPlan& plan, int k,
                                        std::span<const double> eps_list) {
  check_sweep(eps_list);
  if (k < 1 || k > 10) throw ProblemError("k must be between 1 and 10");
  const CMatrix E = CMatrix::Identity(cs.n(), cs.n());
  ProbePlan probes;
  for (const auto& [x, xi] : probe_points(cs.d(), cs.length, probes)) {
    if (max_abs(cs.G(x, xi) - E) != 0.0) {
      throw ProblemError("spectrum convergence requires G = E");
    }
  }
  SpectrumReport rep;
  rep.k = k;
  for (double eps : eps_list) {
    const LegGrids g = plan_leg(cs, plan, eps);
    CorrectorCache cache(cs, torus_nodes(g.torus), g.cell, plan.cell);
    const int n_slow = cs.depends_on_x() ? g.torus.n : 1;
    const HomogenizedCoefficients hc = homogenize(cs, cache, n_slow, plan.cross_check);
    const DiscreteOperator H = assemble_H_eps(cs, g.torus, g.eps);
    const DiscreteOperator H0 = assemble_H_0(hc, cs.bstruct, g.torus);
    const DiscreteOperator I = identity_operator(g.torus, cs.n());
    std::vector<double> le;
    std::vector<double> l0;
    try {
      le = lowest_eigenvalues(H, I, k);
      l0 = lowest_eigenvalues(H0, I, k);
    } catch (const SolverDiverged& e) {
      std::ostringstream os;
      os.precision(17);
      os << e.what() << " (eps = " << g.eps.eps << ")";
      throw SolverDiverged(os.str());
    }
    std::vector<double> gap(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) gap[j] = std::abs(le[j] - l0[j]);
    rep.eps_list.push_back(g.eps.eps);
    rep.n_phys.push_back(g.torus.n);
    rep.eig_eps.push_back(le);
    rep.eig_0.push_back(l0);
    rep.gaps.push_back(gap);
  }
  const std::size_t last = rep.gaps.size() - 1;
  for (int j = 0; j < k; ++j) {
    const double g_first = rep.gaps.front()[j];
    const double g_last = rep.gaps[last][j];
    rep.converged.push_back(g_last <= gap_floor(rep.eig_0[last][j]));
    rep.shrink.push_back(g_last > 0.0 ? g_first / g_last
                                      : std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l + 1 < rep.gaps.size(); ++l) {
      const double slack = gap_floor(rep.eig_0[l + 1][j]);
      if (rep.gaps[l + 1][j] > 1.1 * rep.gaps[l][j] + slack) rep.monotone = false;
    }
  }
  return rep;
}

}  // namespace homog
