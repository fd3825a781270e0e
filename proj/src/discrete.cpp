#include "homog/discrete.hpp"

#include "homog/eigensolver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace homog {

TorusGrid::TorusGrid(int d_, double length_, int n_) : d(d_), length(length_), n(n_) {
  if (d < 1 || d > 2) throw ProblemError("torus grid: d must be 1 or 2");
  if (n < 16) throw ProblemError("torus grid: n_phys must be at least 16");
  if (!(length > 0.0)) throw ProblemError("torus grid: length must be positive");
}

int TorusGrid::shift(int k, int a, int s) const {
  if (a == 0) {
    const int i = k % n;
    return k - i + ((i + s) % n + n) % n;
  }
  const int j = k / n;
  return (k % n) + (((j + s) % n + n) % n) * n;
}

std::vector<int> TorusGrid::index(int k) const {
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    idx[a] = k % n;
    k /= n;
  }
  return idx;
}

Point TorusGrid::node(int k) const {
  Point x(static_cast<std::size_t>(d));
  const auto idx = index(k);
  for (int a = 0; a < d; ++a) x[a] = idx[a] * h();
  return x;
}

double TorusGrid::cell_volume() const { return std::pow(h(), d); }

EpsilonChoice EpsilonChoice::from_eps(double eps, double length) {
  if (!(eps > 0.0)) throw CommensurabilityError("eps must be positive");
  const double ratio = length / eps;
  const double periods = std::round(ratio);
  if (periods < 1.0 || std::abs(ratio - periods) > 1e-12 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os.precision(17);
    os << "L / eps = " << ratio << " is not an integer";
    throw CommensurabilityError(os.str());
  }
  EpsilonChoice e;
  e.fast_periods = static_cast<int>(periods);
  e.eps = length / e.fast_periods;
  return e;
}

EpsilonChoice EpsilonChoice::from_periods(int periods, double length) {
  if (periods < 1) throw CommensurabilityError("number of fast periods must be positive");
  EpsilonChoice e;
  e.fast_periods = periods;
  e.eps = length / periods;
  return e;
}

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::H_eps: return "H_eps";
    case OperatorKind::H_0: return "H_0";
    case OperatorKind::G_eps: return "G_eps";
    case OperatorKind::G_0: return "G_0";
    case OperatorKind::Identity: return "identity";
    case OperatorKind::Other: return "other";
  }
  return "other";
}

Point fast_coordinate(const TorusGrid& grid, const EpsilonChoice& eps, int k, bool half) {
  const auto idx = grid.index(k);
  Point xi(static_cast<std::size_t>(grid.d));
  const long long n = grid.n;
  const long long p = eps.fast_periods;
  for (int a = 0; a < grid.d; ++a) {
    if (half) {
      xi[a] = static_cast<double>((2LL * idx[a] * p + p) % (2 * n)) / static_cast<double>(2 * n);
    } else {
      xi[a] = static_cast<double>((idx[a] * p) % n) / static_cast<double>(n);
    }
  }
  return xi;
}

SparseC forward_difference(const TorusGrid& grid, int n, int axis) {
  const int N = grid.size();
  const double inv_h = 1.0 / grid.h();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * N * n));
  for (int k = 0; k < N; ++k) {
    const int kp = grid.shift(k, axis, 1);
    for (int r = 0; r < n; ++r) {
      t.emplace_back(k * n + r, kp * n + r, inv_h);
      t.emplace_back(k * n + r, k * n + r, -inv_h);
    }
  }
  SparseC D(N * n, N * n);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SparseC torus_B_operator(const BStructure& bs, const TorusGrid& grid) {
  const int N = grid.size();
  const double inv_h = 1.0 / grid.h();
  std::vector<Triplet> t;
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < bs.d; ++i) {
      const int kp = grid.shift(k, i, 1);
      for (int r = 0; r < bs.m; ++r) {
        for (int c = 0; c < bs.n; ++c) {
          const Complex v = bs.b[i](r, c) * inv_h;
          if (v == Complex(0.0, 0.0)) continue;
          t.emplace_back(k * bs.m + r, kp * bs.n + c, v);
          t.emplace_back(k * bs.m + r, k * bs.n + c, -v);
        }
      }
    }
  }
  SparseC B(N * bs.m, N * bs.n);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

namespace {

SparseC block_diag(const std::vector<CMatrix>& blocks, int rows, int cols) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const int ro = static_cast<int>(k) * rows;
    const int co = static_cast<int>(k) * cols;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const Complex v = blocks[k](r, c);
        if (v != Complex(0.0, 0.0)) t.emplace_back(ro + r, co + c, v);
      }
    }
  }
  const int count = static_cast<int>(blocks.size());
  SparseC M(count * rows, count * cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

// sum_i diag(a_i) D_i^+ diag(b_i), from per-node a (cell centres) and b (nodes).
SparseC lower_order_block(const TorusGrid& grid, int n,
                          const std::vector<std::vector<CMatrix>>& a,
                          const std::vector<std::vector<CMatrix>>& b) {
  const int N = grid.size();
  const double inv_h = 1.0 / grid.h();
  std::vector<Triplet> t;
  for (int i = 0; i < grid.d; ++i) {
    if (a[i].empty()) continue;
    for (int k = 0; k < N; ++k) {
      const int kp = grid.shift(k, i, 1);
      const CMatrix fwd = a[i][k] * b[i][kp] * inv_h;
      const CMatrix here = -(a[i][k] * b[i][k]) * inv_h;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          if (fwd(r, c) != Complex(0.0, 0.0)) t.emplace_back(k * n + r, kp * n + c, fwd(r, c));
          if (here(r, c) != Complex(0.0, 0.0)) t.emplace_back(k * n + r, k * n + c, here(r, c));
        }
      }
    }
  }
  SparseC T(N * n, N * n);
  T.setFromTriplets(t.begin(), t.end());
  return T;
}

std::vector<CMatrix> sample_torus(const MatrixField& f, const TorusGrid& grid,
                                  const EpsilonChoice& eps, bool half) {
  std::vector<CMatrix> out(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) out[k] = f(grid.node(k), fast_coordinate(grid, eps, k, half));
  return out;
}

}  // namespace

DiscreteOperator assemble_H_eps(const CoefficientSet& cs, const TorusGrid& grid,
                                const EpsilonChoice& eps) {
  if (grid.d != cs.d()) throw ProblemError("torus dimension does not match the problem");
  if (std::abs(grid.length - cs.length) > 1e-12 * cs.length) {
    throw ProblemError("torus length does not match the problem period");
  }
  const int n = cs.n();
  const int m = cs.m();
  const SparseC B = torus_B_operator(cs.bstruct, grid);
  const SparseC A = block_diag(sample_torus(cs.A, grid, eps, true), m, m);
  const SparseC BH = B.adjoint();
  SparseC H = BH * (A * B);
  if (!cs.lower_order_free()) {
    std::vector<std::vector<CMatrix>> a(static_cast<std::size_t>(cs.d()));
    std::vector<std::vector<CMatrix>> b(static_cast<std::size_t>(cs.d()));
    for (int i = 0; i < cs.d(); ++i) {
      if (cs.a[i].is_zero() || cs.b[i].is_zero()) continue;
      a[i] = sample_torus(cs.a[i], grid, eps, true);
      b[i] = sample_torus(cs.b[i], grid, eps, false);
    }
    const SparseC T = lower_order_block(grid, n, a, b);
    const SparseC TH = T.adjoint();
    H = H + T;
    H = H + TH;
  }
  H = H + block_diag(sample_torus(cs.V, grid, eps, false), n, n);
  DiscreteOperator op;
  op.matrix = hermitian_part(H);
  op.grid = grid;
  op.n = n;
  op.kind = OperatorKind::H_eps;
  return op;
}

DiscreteOperator multiplication_operator(const MatrixField& f, const TorusGrid& grid,
                                         const EpsilonChoice& eps, int n) {
  DiscreteOperator op;
  op.matrix = block_diag(sample_torus(f, grid, eps, false), n, n);
  op.grid = grid;
  op.n = n;
  op.kind = OperatorKind::Other;
  return op;
}

DiscreteOperator assemble_G_eps(const CoefficientSet& cs, const TorusGrid& grid,
                                const EpsilonChoice& eps) {
  DiscreteOperator op = multiplication_operator(cs.G, grid, eps, cs.n());
  op.matrix = hermitian_part(op.matrix);
  op.kind = OperatorKind::G_eps;
  return op;
}

DiscreteOperator identity_operator(const TorusGrid& grid, int n) {
  DiscreteOperator op;
  op.matrix = SparseC(grid.size() * n, grid.size() * n);
  op.matrix.setIdentity();
  op.grid = grid;
  op.n = n;
  op.kind = OperatorKind::Identity;
  return op;
}

// ---------------------------------------------------------------------------

HomogenizedCoefficients align_to_grid(const HomogenizedCoefficients& hc, const TorusGrid& grid) {
  if (hc.d != grid.d) throw NodeMismatch("homogenized coefficients have the wrong dimension");
  const bool same_length = std::abs(hc.length - grid.length) <= 1e-12 * grid.length;
  if (hc.n_slow == grid.n && same_length) return hc;
  if (hc.n_slow != 1 && !same_length) {
    throw NodeMismatch("slow grid period differs from the torus period");
  }
  const std::size_t expected = hc.d == 1 ? static_cast<std::size_t>(hc.n_slow)
                                         : static_cast<std::size_t>(hc.n_slow) * hc.n_slow;
  if (hc.x_nodes.size() != expected || hc.A2.size() != expected) {
    throw NodeMismatch("homogenized coefficients are not on a uniform slow grid");
  }
  HomogenizedCoefficients out;
  out.d = hc.d;
  out.n = hc.n;
  out.m = hc.m;
  out.n_slow = grid.n;
  out.length = grid.length;
  out.grid = hc.grid;
  const int N = grid.size();
  out.x_nodes.resize(static_cast<std::size_t>(N));
  auto resize_all = [&](auto&... v) { (v.resize(static_cast<std::size_t>(N)), ...); };
  resize_all(out.A2, out.A1_left, out.A1_right, out.A1_zeroth, out.A0, out.G0, out.a_mean, out.b,
             out.discrepancy_A2, out.discrepancy_A1, out.discrepancy_A0);
  const int ns = hc.n_slow;
  const double hs = hc.length / ns;
  // a_mean and b regrouped as [axis][slow node].
  const std::size_t nd = hc.a_mean.front().size();
  std::vector<std::vector<CMatrix>> a_by_axis(nd), b_by_axis(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t s = 0; s < hc.a_mean.size(); ++s) {
      a_by_axis[i].push_back(hc.a_mean[s][i]);
      b_by_axis[i].push_back(hc.b[s][i]);
    }
  }
  for (int k = 0; k < N; ++k) {
    const Point x = grid.node(k);
    out.x_nodes[k] = x;
    // Corners of the slow cell containing x with multilinear weights.
    std::vector<std::pair<std::size_t, double>> corners;
    if (ns == 1) {
      corners.emplace_back(0, 1.0);
    } else {
      std::vector<int> base(static_cast<std::size_t>(hc.d));
      std::vector<double> frac(static_cast<std::size_t>(hc.d));
      for (int a = 0; a < hc.d; ++a) {
        const double s = x[a] / hs;
        const double fl = std::floor(s + 1e-12);
        base[a] = static_cast<int>(fl);
        frac[a] = std::max(0.0, s - fl);
        if (frac[a] < 1e-12) frac[a] = 0.0;
      }
      for (int c = 0; c < (1 << hc.d); ++c) {
        double w = 1.0;
        std::size_t idx = 0;
        std::size_t stride = 1;
        for (int a = 0; a < hc.d; ++a) {
          const int bit = (c >> a) & 1;
          w *= bit ? frac[a] : 1.0 - frac[a];
          const int j = ((base[a] + bit) % ns + ns) % ns;
          idx += static_cast<std::size_t>(j) * stride;
          stride *= static_cast<std::size_t>(ns);
        }
        if (w != 0.0) corners.emplace_back(idx, w);
      }
    }
    auto blend = [&](const std::vector<CMatrix>& v) {
      if (corners.size() == 1 && corners[0].second == 1.0) return v[corners[0].first];
      CMatrix acc = CMatrix::Zero(v[0].rows(), v[0].cols());
      for (const auto& [i, w] : corners) acc += w * v[i];
      return acc;
    };
    auto blend_d = [&](const std::vector<double>& v) {
      double acc = 0.0;
      for (const auto& [i, w] : corners) acc = std::max(acc, w > 0.0 ? v[i] : 0.0);
      return acc;
    };
    out.A2[k] = blend(hc.A2);
    out.A1_left[k] = blend(hc.A1_left);
    out.A1_right[k] = blend(hc.A1_right);
    out.A1_zeroth[k] = blend(hc.A1_zeroth);
    out.A0[k] = blend(hc.A0);
    out.G0[k] = blend(hc.G0);
    out.discrepancy_A2[k] = blend_d(hc.discrepancy_A2);
    out.discrepancy_A1[k] = blend_d(hc.discrepancy_A1);
    out.discrepancy_A0[k] = blend_d(hc.discrepancy_A0);
    out.a_mean[k].resize(nd);
    out.b[k].resize(nd);
    for (std::size_t i = 0; i < nd; ++i) {
      out.a_mean[k][i] = blend(a_by_axis[i]);
      out.b[k][i] = blend(b_by_axis[i]);
    }
  }
  return out;
}

DiscreteOperator assemble_H_0(const HomogenizedCoefficients& hc_in, const BStructure& bs,
                              const TorusGrid& grid) {
  const HomogenizedCoefficients hc = align_to_grid(hc_in, grid);
  const int n = bs.n;
  const int m = bs.m;
  if (hc.n != n || hc.m != m) throw NodeMismatch("homogenized coefficients have the wrong size");
  const SparseC B = torus_B_operator(bs, grid);
  const SparseC A = block_diag(hc.A2, m, m);
  const SparseC BH = B.adjoint();
  SparseC H = BH * (A * B);
  bool lower = false;
  for (const auto& per_node : hc.a_mean) {
    for (const auto& am : per_node) lower = lower || max_abs(am) != 0.0;
  }
  bool has_b = false;
  for (const auto& per_node : hc.b) {
    for (const auto& bm : per_node) has_b = has_b || max_abs(bm) != 0.0;
  }
  if (lower || has_b) {
    std::vector<std::vector<CMatrix>> a(static_cast<std::size_t>(grid.d));
    std::vector<std::vector<CMatrix>> b(static_cast<std::size_t>(grid.d));
    for (int i = 0; i < grid.d; ++i) {
      bool nonzero = false;
      for (int k = 0; k < grid.size(); ++k) {
        nonzero = nonzero || (max_abs(hc.a_mean[k][i]) != 0.0 && max_abs(hc.b[k][i]) != 0.0);
      }
      if (!nonzero) continue;
      a[i].resize(static_cast<std::size_t>(grid.size()));
      b[i].resize(static_cast<std::size_t>(grid.size()));
      for (int k = 0; k < grid.size(); ++k) {
        a[i][k] = hc.a_mean[k][i];
        b[i][k] = hc.b[k][i];
      }
    }
    const SparseC T = lower_order_block(grid, n, a, b);
    const SparseC TH = T.adjoint();
    H = H + T;
    H = H + TH;
  }
  H = H + block_diag(hc.A0, n, n);
  bool corrector = false;
  for (const auto& r : hc.A1_right) corrector = corrector || max_abs(r) != 0.0;
  if (corrector) {
    const SparseC K = block_diag(hc.A1_right, n, m) * B;
    const SparseC KH = K.adjoint();
    H = H + K;
    H = H + KH;
  }
  DiscreteOperator op;
  op.matrix = hermitian_part(H);
  op.grid = grid;
  op.n = n;
  op.kind = OperatorKind::H_0;
  return op;
}

DiscreteOperator assemble_G_0(const HomogenizedCoefficients& hc_in, const TorusGrid& grid) {
  const HomogenizedCoefficients hc = align_to_grid(hc_in, grid);
  DiscreteOperator op;
  op.matrix = hermitian_part(block_diag(hc.G0, hc.n, hc.n));
  op.grid = grid;
  op.n = hc.n;
  op.kind = OperatorKind::G_0;
  return op;
}

// ---------------------------------------------------------------------------

DiscreteField apply_corrector(const CorrectorCache& cache, const BStructure& bs,
                              const DiscreteField& u0, const TorusGrid& grid,
                              const EpsilonChoice& eps) {
  const int n = bs.n;
  const int m = bs.m;
  const int N = grid.size();
  if (u0.size() != static_cast<Eigen::Index>(n) * N) {
    throw ProblemError("apply_corrector: field has the wrong length");
  }
  const CVector Bu = torus_B_operator(bs, grid) * u0;
  DiscreteField out = DiscreteField::Zero(u0.size());
  const CellGrid& cg = cache.grid();
  for (int k = 0; k < N; ++k) {
    const auto corr = cache.get(grid.node(k));
    const Point xi = fast_coordinate(grid, eps, k, false);
    const std::vector<double> w = cell_interpolation_weights(cg.d, cg.n, xi);
    CMatrix L1 = CMatrix::Zero(n, m);
    CMatrix L0 = CMatrix::Zero(n, n);
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] == 0.0) continue;
      L1 += w[j] * corr->lambda1[j];
      L0 += w[j] * corr->lambda0[j];
    }
    out.segment(k * n, n) = L1 * Bu.segment(k * m, m) + L0 * u0.segment(k * n, n);
  }
  return out;
}

double l2_norm(const DiscreteField& u, const TorusGrid& grid) {
  return std::sqrt(grid.cell_volume()) * u.norm();
}

double w1_norm(const DiscreteField& u, const TorusGrid& grid, int n) {
  double s = u.squaredNorm();
  for (int a = 0; a < grid.d; ++a) s += (forward_difference(grid, n, a) * u).squaredNorm();
  return std::sqrt(grid.cell_volume() * s);
}

DiscreteField sample_rhs(const std::vector<ScalarField>& components, const TorusGrid& grid) {
  const int n = static_cast<int>(components.size());
  DiscreteField f(static_cast<Eigen::Index>(n) * grid.size());
  const Point xi(static_cast<std::size_t>(grid.d), 0.0);
  for (int k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    for (int c = 0; c < n; ++c) f(k * n + c) = components[c](x, xi);
  }
  return f;
}

// ---------------------------------------------------------------------------

struct ShiftedSolver::Impl {
  SparseC M;
  ShiftedSolverOptions opts;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseC>> ldlt;
  std::unique_ptr<Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>>> lu;
  std::unique_ptr<Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<Complex>>> krylov;

  CVector raw_solve(const CVector& b) const {
    if (ldlt) return ldlt->solve(b);
    if (lu) return lu->solve(b);
    return krylov->solve(b);
  }
};

ShiftedSolver::ShiftedSolver(const DiscreteOperator& H, const DiscreteOperator& G, Complex lambda,
                             ShiftedSolverOptions opts)
    : impl_(std::make_unique<Impl>()) {
  if (H.matrix.rows() != G.matrix.rows()) throw ProblemError("H and G sizes differ");
  impl_->opts = opts;
  impl_->M = H.matrix - lambda * G.matrix;
  impl_->M.makeCompressed();
  if (opts.backend == ShiftBackend::Krylov) {
    impl_->krylov = std::make_unique<Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<Complex>>>();
    impl_->krylov->preconditioner().setDroptol(1e-4);
    impl_->krylov->setTolerance(opts.tolerance);
    impl_->krylov->setMaxIterations(opts.max_iterations > 0 ? opts.max_iterations
                                                            : 20 * static_cast<int>(impl_->M.rows()));
    impl_->krylov->compute(impl_->M);
    if (impl_->krylov->info() != Eigen::Success) throw SolverDiverged("Krylov setup failed");
    return;
  }
  if (lambda.imag() == 0.0) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<SparseC>>(impl_->M);
    if (impl_->ldlt->info() == Eigen::Success) return;
    impl_->ldlt.reset();
  }
  impl_->lu = std::make_unique<Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>>>();
  impl_->lu->compute(impl_->M);
  if (impl_->lu->info() != Eigen::Success) {
    throw SolverDiverged("factorization of H - lambda G failed: " + impl_->lu->lastErrorMessage());
  }
}

ShiftedSolver::~ShiftedSolver() = default;

DiscreteField ShiftedSolver::solve(const DiscreteField& f) const {
  const double fn = f.norm();
  if (fn == 0.0) {
    last_residual_ = 0.0;
    return DiscreteField::Zero(f.size());
  }
  DiscreteField u = impl_->raw_solve(f);
  CVector r = f - impl_->M * u;
  if (!impl_->krylov) {
    for (int it = 0; it < impl_->opts.max_refinement && r.norm() > 1e-15 * fn; ++it) {
      u += impl_->raw_solve(r);
      r = f - impl_->M * u;
    }
  }
  last_residual_ = r.norm() / fn;
  if (!(last_residual_ <= impl_->opts.accept_residual)) {
    std::ostringstream os;
    os << "shifted solve reached relative residual " << last_residual_;
    throw SolverDiverged(os.str());
  }
  return u;
}

std::pair<double, double> block_eigen_range(const DiscreteOperator& G) {
  const int n = G.n;
  const int total = static_cast<int>(G.matrix.rows());
  std::vector<CMatrix> blocks(static_cast<std::size_t>(total / n), CMatrix::Zero(n, n));
  bool block_diagonal = true;
  for (int c = 0; c < G.matrix.outerSize(); ++c) {
    for (SparseC::InnerIterator it(G.matrix, c); it; ++it) {
      const int br = static_cast<int>(it.row()) / n;
      const int bc = static_cast<int>(it.col()) / n;
      if (br != bc) {
        if (it.value() != Complex(0.0, 0.0)) block_diagonal = false;
        continue;
      }
      blocks[br](it.row() % n, it.col() % n) = it.value();
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (block_diagonal) {
    for (const auto& b : blocks) {
      const auto [l, h] = hermitian_eigen_range(b);
      lo = std::min(lo, l);
      hi = std::max(hi, h);
    }
    return {lo, hi};
  }
  // Gershgorin discs by columns (G is Hermitian).
  for (int c = 0; c < G.matrix.outerSize(); ++c) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseC::InnerIterator it(G.matrix, c); it; ++it) {
      if (it.row() == c) {
        diag = it.value().real();
      } else {
        off += std::abs(it.value());
      }
    }
    lo = std::min(lo, diag - off);
    hi = std::max(hi, diag + off);
  }
  return {lo, hi};
}

ShiftWindow shift_window(const DiscreteOperator& H, const DiscreteOperator& G) {
  ShiftWindow w;
  const DiscreteOperator I = identity_operator(H.grid, H.n);
  w.h_hat = lowest_eigenvalues(H, I, 1).front();
  const auto [g1, g2] = block_eigen_range(G);
  w.g1 = g1;
  w.g2 = g2;
  w.mu_hat = std::min(w.h_hat / g1, w.h_hat / g2);
  return w;
}

void check_shift(Complex lambda, const ShiftWindow& window, double margin) {
  if (lambda.imag() != 0.0) return;
  if (!(lambda.real() < window.mu_hat - margin)) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda = " << lambda.real() << " is not below the spectrum edge estimate "
       << window.mu_hat << " minus margin " << margin;
    throw ShiftInsideSpectrum(os.str());
  }
}

DiscreteField solve_shifted(const DiscreteOperator& H, const DiscreteOperator& G, Complex lambda,
                            const DiscreteField& f, const std::optional<ShiftWindow>& window,
                            const ShiftedSolverOptions& opts, double margin) {
  if (lambda.imag() == 0.0) check_shift(lambda, window ? *window : shift_window(H, G), margin);
  ShiftedSolver solver(H, G, lambda, opts);
  return solver.solve(f);
}

}  // namespace homog
