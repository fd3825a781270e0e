#include "homog/cell.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <mutex>
#include <sstream>

namespace homog {

CellGrid::CellGrid(int d_, int n_) : d(d_), n(n_) {
  if (d < 1 || d > 2) throw ProblemError("cell grid: d must be 1 or 2");
  if (n < 8 || (n & (n - 1)) != 0) {
    throw ProblemError("cell grid: n_cell must be a power of two >= 8, got " + std::to_string(n));
  }
}

Point CellGrid::node(int k, double offset) const {
  Point xi(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    xi[a] = (k % n + offset) / n;
    k /= n;
  }
  return xi;
}

int CellGrid::shift(int k, int a, int s) const {
  if (a == 0) {
    const int i = k % n;
    return k - i + ((i + s) % n + n) % n;
  }
  const int j = k / n;
  return (k % n) + (((j + s) % n + n) % n) * n;
}

std::vector<CMatrix> sample_on_cell(const MatrixField& f, const Point& x, const CellGrid& grid,
                                    double offset) {
  std::vector<CMatrix> out(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) out[k] = f(x, grid.node(k, offset));
  return out;
}

SparseC cell_B_operator(const BStructure& bs, const CellGrid& grid) {
  const int N = grid.size();
  const double inv_h = 1.0 / grid.h();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * N * bs.d * bs.m * bs.n));
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

SparseC block_diagonal(const std::vector<CMatrix>& blocks) {
  const int bsz = static_cast<int>(blocks.front().rows());
  std::vector<Triplet> t;
  t.reserve(blocks.size() * static_cast<std::size_t>(bsz * bsz));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const int off = static_cast<int>(k) * bsz;
    for (int r = 0; r < bsz; ++r) {
      for (int c = 0; c < bsz; ++c) {
        if (blocks[k](r, c) != Complex(0.0, 0.0)) t.emplace_back(off + r, off + c, blocks[k](r, c));
      }
    }
  }
  const int total = static_cast<int>(blocks.size()) * bsz;
  SparseC M(total, total);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

// Subtracts the componentwise grid mean from every column in place.
void project_zero_mean(CMatrix& v, int n, int N) {
  for (int c = 0; c < v.cols(); ++c) {
    for (int r = 0; r < n; ++r) {
      Complex s(0.0, 0.0);
      for (int k = 0; k < N; ++k) s += v(k * n + r, c);
      s /= static_cast<double>(N);
      for (int k = 0; k < N; ++k) v(k * n + r, c) -= s;
    }
  }
}

void conjugate_gradient(const SparseC& K, int n, int N, const CMatrix& b, CMatrix& x,
                        const CellSolverOptions& opts, std::vector<int>& iterations) {
  const int cols = static_cast<int>(b.cols());
  const int max_iter = opts.max_iter_factor * static_cast<int>(b.rows());
  x = CMatrix::Zero(b.rows(), cols);
  CMatrix r = b;
  CMatrix p = r;
  Eigen::VectorXd rr(cols);
  Eigen::VectorXd target(cols);
  std::vector<bool> done(static_cast<std::size_t>(cols), false);
  for (int c = 0; c < cols; ++c) {
    rr(c) = r.col(c).squaredNorm();
    target(c) = opts.tolerance * opts.tolerance * rr(c);
    done[c] = rr(c) <= target(c) || rr(c) == 0.0;
  }
  iterations.assign(static_cast<std::size_t>(cols), 0);
  for (int it = 0; it < max_iter; ++it) {
    bool all = true;
    for (int c = 0; c < cols; ++c) all = all && done[c];
    if (all) break;
    CMatrix Kp = K * p;
    for (int c = 0; c < cols; ++c) {
      if (done[c]) continue;
      const double pKp = p.col(c).dot(Kp.col(c)).real();
      if (!(pKp > 0.0)) {
        done[c] = true;
        continue;
      }
      const double alpha = rr(c) / pKp;
      x.col(c) += alpha * p.col(c);
      r.col(c) -= alpha * Kp.col(c);
    }
    project_zero_mean(r, n, N);
    for (int c = 0; c < cols; ++c) {
      if (done[c]) continue;
      ++iterations[c];
      const double rr_new = r.col(c).squaredNorm();
      if (rr_new <= target(c)) {
        done[c] = true;
        rr(c) = rr_new;
        continue;
      }
      p.col(c) = r.col(c) + (rr_new / rr(c)) * p.col(c);
      rr(c) = rr_new;
    }
  }
}

// Pins node 0 of every component and factorizes the remaining SPD block.
void direct_solve(const SparseC& K, int n, const CMatrix& b, CMatrix& x) {
  const int total = static_cast<int>(K.rows());
  const int reduced = total - n;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(K.nonZeros()));
  for (int c = 0; c < K.outerSize(); ++c) {
    for (SparseC::InnerIterator it(K, c); it; ++it) {
      if (it.row() >= n && it.col() >= n) t.emplace_back(it.row() - n, it.col() - n, it.value());
    }
  }
  SparseC Kr(reduced, reduced);
  Kr.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<SparseC> ldlt(Kr);
  if (ldlt.info() != Eigen::Success) throw SolverDiverged("cell factorization failed");
  CMatrix xr = ldlt.solve(b.bottomRows(reduced));
  x = CMatrix::Zero(total, b.cols());
  x.bottomRows(reduced) = xr;
}

}  // namespace

SparseC cell_operator(const std::vector<CMatrix>& A_samples, const BStructure& bs,
                      const CellGrid& grid) {
  const SparseC B = cell_B_operator(bs, grid);
  const SparseC A = block_diagonal(A_samples);
  const SparseC BH = B.adjoint();
  const SparseC K = BH * (A * B);
  return hermitian_part(K);
}

CMatrix cell_mean(const CMatrix& values, int n, const CellGrid& grid) {
  const int N = grid.size();
  std::vector<CMatrix> per_node(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) per_node[k] = values.middleRows(k * n, n);
  return pairwise_mean(per_node);
}

PeriodicSolution solve_periodic_system(const SparseC& K, int n, const CMatrix& rhs,
                                       const CellGrid& grid, const CellSolverOptions& opts) {
  const int N = grid.size();
  if (rhs.rows() != static_cast<Eigen::Index>(n) * N) {
    throw ProblemError("cell solve: rhs has the wrong number of rows");
  }
  PeriodicSolution sol;
  const CMatrix mean = cell_mean(rhs, n, grid);
  for (int c = 0; c < rhs.cols(); ++c) {
    const double scale = rhs.col(c).cwiseAbs().maxCoeff();
    const double mean_abs = mean.col(c).cwiseAbs().maxCoeff();
    if (mean_abs > 1e-8 * scale) {
      std::ostringstream os;
      os << "right-hand side has nonzero cell mean " << mean_abs << " (max |rhs| " << scale
         << ")";
      throw SolvabilityViolated(os.str());
    }
  }
  CMatrix b = rhs;
  project_zero_mean(b, n, N);
  CellBackend backend = opts.backend;
  if (backend == CellBackend::Auto) {
    backend = b.rows() <= 4096 ? CellBackend::ConjugateGradient : CellBackend::Direct;
  }
  if (backend == CellBackend::ConjugateGradient) {
    conjugate_gradient(K, n, N, b, sol.values, opts, sol.iterations);
  } else {
    direct_solve(K, n, b, sol.values);
    sol.iterations.assign(static_cast<std::size_t>(b.cols()), 1);
  }
  project_zero_mean(sol.values, n, N);
  const CMatrix res = K * sol.values - rhs;
  sol.residuals.resize(static_cast<std::size_t>(rhs.cols()));
  for (int c = 0; c < rhs.cols(); ++c) {
    const double bn = rhs.col(c).norm();
    const double rel = bn > 0.0 ? res.col(c).norm() / bn : res.col(c).norm();
    sol.residuals[c] = rel;
    if (!(rel <= opts.accept_residual)) {
      std::ostringstream os;
      os << "cell solver stopped at relative residual " << rel << " after "
         << sol.iterations[c] << " iterations";
      throw SolverDiverged(os.str());
    }
  }
  return sol;
}

PeriodicSolution solve_periodic_system(const std::vector<CMatrix>& A_samples, const CMatrix& rhs,
                                       const BStructure& bs, const CellGrid& grid,
                                       const CellSolverOptions& opts) {
  return solve_periodic_system(cell_operator(A_samples, bs, grid), bs.n, rhs, grid, opts);
}

std::vector<CMatrix> cell_forward_difference(const std::vector<CMatrix>& f, const CellGrid& grid,
                                             int a) {
  std::vector<CMatrix> out(f.size());
  const double inv_h = 1.0 / grid.h();
  for (int k = 0; k < grid.size(); ++k) out[k] = (f[grid.shift(k, a, 1)] - f[k]) * inv_h;
  return out;
}

CellCorrectors solve_correctors(const CoefficientSet& cs, const Point& x, const CellGrid& grid,
                                const CellSolverOptions& opts) {
  const int d = cs.d();
  const int n = cs.n();
  const int m = cs.m();
  if (grid.d != d) throw ProblemError("cell grid dimension does not match the problem");
  const int N = grid.size();
  const std::vector<CMatrix> A_e = sample_on_cell(cs.A, x, grid, 0.5);
  const SparseC K = cell_operator(A_e, cs.bstruct, grid);
  const SparseC BH = SparseC(cell_B_operator(cs.bstruct, grid).adjoint());

  CMatrix W(static_cast<Eigen::Index>(m) * N, m);
  for (int k = 0; k < N; ++k) W.middleRows(k * m, m) = A_e[k];
  CMatrix rhs(static_cast<Eigen::Index>(n) * N, m + n);
  rhs.leftCols(m) = -(BH * W);

  CMatrix rhs0 = CMatrix::Zero(static_cast<Eigen::Index>(n) * N, n);
  const Point xi0(static_cast<std::size_t>(d), 0.0);
  const double inv_h = 1.0 / grid.h();
  for (int i = 0; i < d; ++i) {
    if (cs.a[i].is_zero() || cs.b[i].is_zero() || !cs.a[i].depends_on_xi()) continue;
    const std::vector<CMatrix> a_e = sample_on_cell(cs.a[i], x, grid, 0.5);
    const CMatrix bH = cs.b[i](x, xi0).adjoint();
    for (int k = 0; k < N; ++k) {
      const CMatrix diff = (a_e[k] - a_e[grid.shift(k, i, -1)]).adjoint() * inv_h;
      rhs0.middleRows(k * n, n) += bH * diff;
    }
  }
  rhs.rightCols(n) = rhs0;

  const PeriodicSolution sol = solve_periodic_system(K, n, rhs, grid, opts);
  CellCorrectors out;
  out.x = x;
  out.grid = grid;
  out.lambda1.resize(static_cast<std::size_t>(N));
  out.lambda0.resize(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    out.lambda1[k] = sol.values.block(k * n, 0, n, m);
    out.lambda0[k] = sol.values.block(k * n, m, n, n);
  }
  for (int c = 0; c < m; ++c) out.residual1 = std::max(out.residual1, sol.residuals[c]);
  for (int c = 0; c < n; ++c) out.residual0 = std::max(out.residual0, sol.residuals[m + c]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_point(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

CorrectorCache::CorrectorCache(const CoefficientSet& cs, std::vector<Point> x_nodes, CellGrid grid,
                               CellSolverOptions opts)
    : cs_(cs),
      nodes_(std::move(x_nodes)),
      declared_(nodes_.begin(), nodes_.end()),
      grid_(grid),
      opts_(opts),
      x_independent_(!cs.depends_on_x()) {
  if (nodes_.empty()) throw ProblemError("corrector cache needs at least one slow node");
}

bool CorrectorCache::contains(const Point& x) const { return declared_.count(x) != 0; }

std::size_t CorrectorCache::computed() const {
  std::shared_lock lock(mutex_);
  return memo_.size();
}

std::shared_ptr<const CellCorrectors> CorrectorCache::get(const Point& x) const {
  std::shared_ptr<const CellCorrectors> any;
  {
    std::shared_lock lock(mutex_);
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
    if (x_independent_ && !memo_.empty()) any = memo_.begin()->second;
  }
  if (!declared_.count(x)) throw CacheMiss("no corrector node at x = " + format_point(x));
  std::shared_ptr<const CellCorrectors> value;
  if (any) {
    auto copy = std::make_shared<CellCorrectors>(*any);
    copy->x = x;
    value = copy;
  } else {
    try {
      value = std::make_shared<const CellCorrectors>(solve_correctors(cs_, x, grid_, opts_));
    } catch (const SolvabilityViolated& e) {
      throw SolvabilityViolated(std::string(e.what()) + " at x = " + format_point(x));
    } catch (const SolverDiverged& e) {
      throw SolverDiverged(std::string(e.what()) + " at x = " + format_point(x));
    }
  }
  std::unique_lock lock(mutex_);
  auto [it, inserted] = memo_.emplace(x, value);
  return it->second;
}

void CorrectorCache::compute_all() const {
  if (x_independent_) {
    get(nodes_.front());
    for (const auto& x : nodes_) get(x);
    return;
  }
  parallel_for(nodes_.size(), [&](std::size_t i) { get(nodes_[i]); });
}

}  // namespace homog
