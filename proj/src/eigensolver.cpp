#include "homog/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace homog {

namespace {

// Gershgorin interval of a Hermitian sparse matrix, by columns.
std::pair<double, double> gershgorin(const SparseC& M) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int c = 0; c < M.outerSize(); ++c) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseC::InnerIterator it(M, c); it; ++it) {
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

double one_norm(const SparseC& M) {
  double worst = 0.0;
  for (int c = 0; c < M.outerSize(); ++c) {
    double s = 0.0;
    for (SparseC::InnerIterator it(M, c); it; ++it) s += std::abs(it.value());
    worst = std::max(worst, s);
  }
  return worst;
}

int negative_pivots(const SparseC& H, const SparseC& G, double sigma, bool& ok) {
  SparseC M = H - Complex(sigma, 0.0) * G;
  Eigen::SimplicialLDLT<SparseC> ldlt(M);
  ok = ldlt.info() == Eigen::Success;
  if (!ok) return 0;
  const auto& D = ldlt.vectorD();
  int count = 0;
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    if (D(i).real() == 0.0) {
      ok = false;
      return 0;
    }
    count += D(i).real() < 0.0;
  }
  return count;
}

}  // namespace

int count_below(const SparseC& H, const SparseC& G, double sigma) {
  const double scale = std::max(1.0, one_norm(H));
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool ok = false;
    const int c = negative_pivots(H, G, sigma, ok);
    if (ok) return c;
    sigma += 1e-10 * scale * (attempt + 1);
  }
  throw SolverDiverged("inertia count failed near sigma = " + std::to_string(sigma));
}

std::vector<double> lowest_eigenvalues(const SparseC& H, const SparseC& G, int k,
                                       const EigenOptions& opts) {
  const int N = static_cast<int>(H.rows());
  if (k < 1 || k > 10) throw ProblemError("number of eigenvalues must be between 1 and 10");
  if (k > N) throw ProblemError("more eigenvalues requested than unknowns");
  if (G.rows() != N || H.cols() != N || G.cols() != N) {
    throw ProblemError("eigenproblem matrices have inconsistent sizes");
  }

  if (N <= opts.dense_limit) {
    const CMatrix Hd = hermitian_part(CMatrix(H));
    const CMatrix Gd = hermitian_part(CMatrix(G));
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> es(Hd, Gd, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverDiverged("dense generalized eigensolver failed");
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out[j] = es.eigenvalues()(j);
    return out;
  }

  // Bracket lambda_1 and lambda_k by inertia bisection.
  const auto [hlo, hhi] = gershgorin(H);
  const auto [glo, ghi] = gershgorin(G);
  const double g1 = glo > 0.0 ? glo : 1e-3 * ghi;
  double lo = hlo >= 0.0 ? hlo / ghi : hlo / g1;
  double hi = hhi >= 0.0 ? hhi / g1 : hhi / ghi;
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  lo -= 1e-6 * scale;
  hi += 1e-6 * scale;
  while (count_below(H, G, lo) > 0) lo -= 2.0 * (std::abs(lo) + 1.0);
  while (count_below(H, G, hi) < k) hi += 2.0 * (std::abs(hi) + 1.0);

  double a = lo;   // count < k
  double b = hi;   // count >= k
  double a1 = lo;  // count == 0
  double c1 = hi;  // count >= 1
  const double floor = 1e-9 * scale;
  while (b - a > std::max(0.05 * (std::abs(a) + std::abs(b)), floor)) {
    const double mid = 0.5 * (a + b);
    const int c = count_below(H, G, mid);
    if (c >= k) {
      b = mid;
    } else {
      a = mid;
    }
    if (c == 0) a1 = std::max(a1, mid);
    if (c >= 1) c1 = std::min(c1, mid);
  }
  while (c1 - a1 > std::max(0.05 * (b - a1), floor)) {
    const double mid = 0.5 * (a1 + c1);
    if (count_below(H, G, mid) == 0) {
      a1 = mid;
    } else {
      c1 = mid;
    }
  }
  const double sigma = a1 - 0.1 * (b - a1) - floor;

  SparseC M = H - Complex(sigma, 0.0) * G;
  Eigen::SimplicialLDLT<SparseC> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw SolverDiverged("shift-invert factorization failed");

  const int p = std::min(N, k + std::max(4, k));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix X(N, p);
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < N; ++r) X(r, c) = Complex(normal(rng), normal(rng));
  }
  const double hnorm = one_norm(H);
  const double gnorm = one_norm(G);
  Eigen::VectorXd theta_prev = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
  double worst = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const CMatrix Y = ldlt.solve(G * X);
    Eigen::HouseholderQR<CMatrix> qr(Y);
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(N, p);
    const CMatrix HQ = H * Q;
    const CMatrix GQ = G * Q;
    const CMatrix Hs = hermitian_part(CMatrix(Q.adjoint() * HQ));
    const CMatrix Gs = hermitian_part(CMatrix(Q.adjoint() * GQ));
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> es(Hs, Gs);
    if (es.info() != Eigen::Success) throw SolverDiverged("Rayleigh-Ritz step failed");
    theta = es.eigenvalues();
    const CMatrix C = es.eigenvectors();
    X = Q * C;
    const CMatrix R = HQ * C - (GQ * C) * theta.cast<Complex>().asDiagonal();
    worst = 0.0;
    for (int j = 0; j < k; ++j) {
      const double rel = R.col(j).norm() / ((hnorm + std::abs(theta(j)) * gnorm) * X.col(j).norm());
      worst = std::max(worst, rel);
    }
    double change = 0.0;
    for (int j = 0; j < k; ++j) change = std::max(change, std::abs(theta(j) - theta_prev(j)));
    theta_prev = theta;
    if (worst <= opts.tolerance) break;
    if (it >= 3 && change <= 1e-15 * hnorm && worst <= 1e-9) break;
  }
  if (!(worst <= 1e-8)) {
    std::ostringstream os;
    os << "eigensolver did not converge, relative residual " << worst;
    throw SolverDiverged(os.str());
  }
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) out[j] = theta(j);
  return out;
}

std::vector<double> lowest_eigenvalues(const DiscreteOperator& H, const DiscreteOperator& G,
                                       int k, const EigenOptions& opts) {
  return lowest_eigenvalues(H.matrix, G.matrix, k, opts);
}

}  // namespace homog
