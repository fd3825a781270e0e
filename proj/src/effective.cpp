#include "homog/effective.hpp"

#include <cmath>
#include <sstream>

namespace homog {

namespace {

// Gap relative to the larger operand and a reference scale.
double form_gap(const CMatrix& p, const CMatrix& q, double scale) {
  const double den = std::max({max_abs(p), max_abs(q), scale, 1e-300});
  return max_abs(p - q) / den;
}

void enforce(const CrossCheckPolicy& policy, double gap, const char* what, const Point& x) {
  if (policy.enforce && gap > policy.tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << " forms differ by " << gap << " (relative) at x = (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    throw CrossCheckFailed(os.str());
  }
}

// B_h Lambda at every node: sum_i B_i D_i^+ Lambda.
std::vector<CMatrix> apply_B(const BStructure& bs, const std::vector<CMatrix>& lam,
                             const CellGrid& grid) {
  std::vector<CMatrix> out(lam.size(), CMatrix::Zero(bs.m, lam.front().cols()));
  for (int i = 0; i < bs.d; ++i) {
    const std::vector<CMatrix> diff = cell_forward_difference(lam, grid, i);
    for (std::size_t k = 0; k < lam.size(); ++k) out[k] += bs.b[i] * diff[k];
  }
  return out;
}

}  // namespace

A2Forms assemble_A2(const CellCorrectors& corr, const CoefficientSet& cs,
                    const CrossCheckPolicy& policy) {
  const CellGrid& grid = corr.grid;
  const std::vector<CMatrix> A_e = sample_on_cell(cs.A, corr.x, grid, 0.5);
  std::vector<CMatrix> X = apply_B(cs.bstruct, corr.lambda1, grid);
  const CMatrix E = CMatrix::Identity(cs.m(), cs.m());
  std::vector<CMatrix> flux(X.size());
  std::vector<CMatrix> energy(X.size());
  for (std::size_t k = 0; k < X.size(); ++k) {
    X[k] += E;
    flux[k] = A_e[k] * X[k];
    energy[k] = X[k].adjoint() * flux[k];
  }
  A2Forms out;
  const CMatrix raw = pairwise_mean(flux);
  out.flux = hermitian_part(raw);
  out.energy = hermitian_part(pairwise_mean(energy));
  out.discrepancy = form_gap(raw, out.energy, 0.0);
  enforce(policy, out.discrepancy, "A2", corr.x);
  return out;
}

LowerOrderForms assemble_A1_A0(const CellCorrectors& corr, const CoefficientSet& cs,
                               const CrossCheckPolicy& policy) {
  const CellGrid& grid = corr.grid;
  const int d = cs.d();
  const int n = cs.n();
  const int m = cs.m();
  const std::size_t N = static_cast<std::size_t>(grid.size());
  const std::vector<CMatrix> A_e = sample_on_cell(cs.A, corr.x, grid, 0.5);
  const std::vector<CMatrix> Y = apply_B(cs.bstruct, corr.lambda0, grid);

  std::vector<CMatrix> left(N), right(N), quad(N);
  for (std::size_t k = 0; k < N; ++k) {
    left[k] = A_e[k] * Y[k];
    right[k] = Y[k].adjoint() * A_e[k];
    quad[k] = right[k] * Y[k];
  }
  LowerOrderForms out;
  out.A1_left = pairwise_mean(left);
  out.A1_right = pairwise_mean(right);
  const Point xi0(static_cast<std::size_t>(d), 0.0);
  const std::vector<CMatrix> V = sample_on_cell(cs.V, corr.x, grid, 0.0);
  const CMatrix V_mean = pairwise_mean(V);
  const CMatrix A0_raw = V_mean - pairwise_mean(quad);

  out.A1_right_simplified = CMatrix::Zero(n, m);
  CMatrix A0_simple = V_mean;
  out.A1_zeroth = CMatrix::Zero(n, n);
  const double delta = 1e-5;
  for (int i = 0; i < d; ++i) {
    const std::vector<CMatrix> a_e = sample_on_cell(cs.a[i], corr.x, grid, 0.5);
    const CMatrix bi = cs.b[i](corr.x, xi0);
    out.a_mean.push_back(pairwise_mean(a_e));
    out.b.push_back(bi);
    const std::vector<CMatrix> dl1 = cell_forward_difference(corr.lambda1, grid, i);
    const std::vector<CMatrix> dl0 = cell_forward_difference(corr.lambda0, grid, i);
    std::vector<CMatrix> t1(N), t0(N);
    for (std::size_t k = 0; k < N; ++k) {
      const CMatrix ab = a_e[k] * bi;
      t1[k] = ab * dl1[k];
      t0[k] = ab * dl0[k];
    }
    out.A1_right_simplified += pairwise_mean(t1);
    A0_simple += pairwise_mean(t0);

    // Zeroth-order pieces from the slow derivative falling on b_i and a_i*.
    if (!cs.a[i].is_zero() && !cs.b[i].is_zero() &&
        (cs.a[i].depends_on_x() || cs.b[i].depends_on_x())) {
      Point xp = corr.x;
      Point xm = corr.x;
      xp[i] += delta;
      xm[i] -= delta;
      const CMatrix db = (cs.b[i](xp, xi0) - cs.b[i](xm, xi0)) / (2.0 * delta);
      const CMatrix da = (pairwise_mean(sample_on_cell(cs.a[i], xp, grid, 0.5)) -
                          pairwise_mean(sample_on_cell(cs.a[i], xm, grid, 0.5))) /
                         (2.0 * delta);
      out.A1_zeroth += out.a_mean.back() * db - bi.adjoint() * da.adjoint();
    }
  }
  out.A0 = hermitian_part(A0_raw);
  out.A0_simplified = A0_simple;
  const double scale = std::max(max_abs(pairwise_mean(A_e)), max_abs(V_mean));
  out.discrepancy_A1 = form_gap(out.A1_right, out.A1_right_simplified, scale);
  out.discrepancy_A0 = form_gap(A0_raw, A0_simple, scale);
  enforce(policy, out.discrepancy_A1, "A1", corr.x);
  enforce(policy, out.discrepancy_A0, "A0", corr.x);
  return out;
}

CMatrix assemble_G0(const CoefficientSet& cs, const Point& x, const CellGrid& grid) {
  return hermitian_part(pairwise_mean(sample_on_cell(cs.G, x, grid, 0.0)));
}

double HomogenizedCoefficients::max_discrepancy() const {
  double worst = 0.0;
  for (const auto* v : {&discrepancy_A2, &discrepancy_A1, &discrepancy_A0}) {
    for (double g : *v) worst = std::max(worst, g);
  }
  return worst;
}

std::vector<Point> slow_grid_nodes(int d, int n_slow, double length) {
  const double h = length / n_slow;
  std::vector<Point> nodes;
  const int total = d == 1 ? n_slow : n_slow * n_slow;
  for (int k = 0; k < total; ++k) {
    Point x(static_cast<std::size_t>(d));
    int rem = k;
    for (int a = 0; a < d; ++a) {
      x[a] = (rem % n_slow) * h;
      rem /= n_slow;
    }
    nodes.push_back(x);
  }
  return nodes;
}

HomogenizedCoefficients homogenize(const CoefficientSet& cs, const CorrectorCache& cache,
                                   int n_slow, const CrossCheckPolicy& policy) {
  HomogenizedCoefficients hc;
  hc.d = cs.d();
  hc.n = cs.n();
  hc.m = cs.m();
  hc.n_slow = n_slow;
  hc.length = cs.length;
  hc.grid = cache.grid();
  hc.x_nodes = slow_grid_nodes(hc.d, n_slow, cs.length);
  const std::size_t count = hc.x_nodes.size();
  for (const auto& x : hc.x_nodes) {
    if (!cache.contains(x)) throw NodeMismatch("corrector cache does not cover the slow grid");
  }
  hc.A2.resize(count);
  hc.A1_left.resize(count);
  hc.A1_right.resize(count);
  hc.A1_zeroth.resize(count);
  hc.A0.resize(count);
  hc.G0.resize(count);
  hc.a_mean.resize(count);
  hc.b.resize(count);
  hc.discrepancy_A2.resize(count);
  hc.discrepancy_A1.resize(count);
  hc.discrepancy_A0.resize(count);
  cache.compute_all();
  const bool reuse = !cs.depends_on_x();
  auto fill = [&](std::size_t k) {
    const auto corr = cache.get(hc.x_nodes[k]);
    const A2Forms a2 = assemble_A2(*corr, cs, policy);
    const LowerOrderForms lo = assemble_A1_A0(*corr, cs, policy);
    hc.A2[k] = a2.flux;
    hc.discrepancy_A2[k] = a2.discrepancy;
    hc.A1_left[k] = lo.A1_left;
    hc.A1_right[k] = lo.A1_right;
    hc.A1_zeroth[k] = lo.A1_zeroth;
    hc.A0[k] = lo.A0;
    hc.a_mean[k] = lo.a_mean;
    hc.b[k] = lo.b;
    hc.discrepancy_A1[k] = lo.discrepancy_A1;
    hc.discrepancy_A0[k] = lo.discrepancy_A0;
    hc.G0[k] = assemble_G0(cs, hc.x_nodes[k], hc.grid);
  };
  if (reuse) {
    fill(0);
    for (std::size_t k = 1; k < count; ++k) {
      hc.A2[k] = hc.A2[0];
      hc.A1_left[k] = hc.A1_left[0];
      hc.A1_right[k] = hc.A1_right[0];
      hc.A1_zeroth[k] = hc.A1_zeroth[0];
      hc.A0[k] = hc.A0[0];
      hc.G0[k] = hc.G0[0];
      hc.a_mean[k] = hc.a_mean[0];
      hc.b[k] = hc.b[0];
      hc.discrepancy_A2[k] = hc.discrepancy_A2[0];
      hc.discrepancy_A1[k] = hc.discrepancy_A1[0];
      hc.discrepancy_A0[k] = hc.discrepancy_A0[0];
    }
  } else {
    parallel_for(count, fill);
  }
  return hc;
}

HomogenizedCoefficients homogenize(const CoefficientSet& cs, int n_slow, const CellGrid& grid,
                                   const CrossCheckPolicy& policy,
                                   const CellSolverOptions& opts) {
  CorrectorCache cache(cs, slow_grid_nodes(cs.d(), n_slow, cs.length), grid, opts);
  return homogenize(cs, cache, n_slow, policy);
}

}  // namespace homog
