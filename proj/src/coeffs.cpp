#include "homog/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace homog {

CMatrix BStructure::symbol(std::span<const double> zeta) const {
  CMatrix s = CMatrix::Zero(m, n);
  for (int i = 0; i < d; ++i) s += b[i] * zeta[i];
  return s;
}

CMatrix BStructure::stacked() const {
  CMatrix s(m, n * d);
  for (int i = 0; i < d; ++i) s.middleCols(i * n, n) = b[i];
  return s;
}

void BStructure::check() const {
  if (d < 1 || d > 2) throw ProblemError("bstruct: d must be 1 or 2");
  if (n < 1) throw ProblemError("bstruct: n must be positive");
  if (m < n) throw ProblemError("bstruct: m must be at least n");
  if (static_cast<int>(b.size()) != d) {
    throw ProblemError("bstruct: expected " + std::to_string(d) + " B matrices");
  }
  for (int i = 0; i < d; ++i) {
    if (b[i].rows() != m || b[i].cols() != n) {
      throw ProblemError("bstruct: B" + std::to_string(i + 1) + " must be " + std::to_string(m) +
                         "x" + std::to_string(n));
    }
  }
}

BStructure BStructure::gradient(int d) { return stacked_identity(d, 1); }

BStructure BStructure::stacked_identity(int d, int n) {
  BStructure s;
  s.d = d;
  s.n = n;
  s.m = n * d;
  for (int i = 0; i < d; ++i) {
    CMatrix bi = CMatrix::Zero(s.m, n);
    bi.middleRows(i * n, n).setIdentity();
    s.b.push_back(bi);
  }
  return s;
}

// ---------------------------------------------------------------------------

bool CoefficientSet::depends_on_x() const {
  bool dep = A.depends_on_x() || V.depends_on_x() || G.depends_on_x();
  for (const auto& f : a) dep = dep || f.depends_on_x();
  for (const auto& f : b) dep = dep || f.depends_on_x();
  return dep;
}

bool CoefficientSet::depends_on_xi() const {
  bool dep = A.depends_on_xi() || V.depends_on_xi() || G.depends_on_xi();
  for (const auto& f : a) dep = dep || f.depends_on_xi();
  return dep;
}

bool CoefficientSet::lower_order_free() const {
  for (const auto& f : a) {
    if (!f.is_zero()) return false;
  }
  for (const auto& f : b) {
    if (!f.is_zero()) return false;
  }
  return true;
}

namespace {

void check_field(const MatrixField& f, int rows, int cols, int d, const std::string& name) {
  if (f.rows() != rows || f.cols() != cols) {
    throw ProblemError(name + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", got " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
  }
  if (f.max_variable_index() > d) {
    throw ProblemError(name + " uses a variable index beyond d = " + std::to_string(d));
  }
}

}  // namespace

void CoefficientSet::normalize() {
  bstruct.check();
  const int dd = d();
  const int nn = n();
  if (A.empty()) throw ProblemError("coefficient A is missing");
  check_field(A, m(), m(), dd, "A");
  if (a.empty()) a.assign(dd, MatrixField::zero(nn, nn));
  if (b.empty()) b.assign(dd, MatrixField::zero(nn, nn));
  if (static_cast<int>(a.size()) != dd) throw ProblemError("expected d matrices a_i");
  if (static_cast<int>(b.size()) != dd) throw ProblemError("expected d matrices b_i");
  for (int i = 0; i < dd; ++i) {
    check_field(a[i], nn, nn, dd, "a" + std::to_string(i + 1));
    check_field(b[i], nn, nn, dd, "b" + std::to_string(i + 1));
    if (b[i].depends_on_xi()) {
      throw ProblemError("b" + std::to_string(i + 1) + " must not depend on the fast variable");
    }
  }
  if (V.empty()) V = MatrixField::zero(nn, nn);
  if (G.empty()) G = MatrixField::identity(nn);
  check_field(V, nn, nn, dd, "V");
  check_field(G, nn, nn, dd, "G");
  if (!(length > 0.0)) throw ProblemError("slow period must be positive");
}

// ---------------------------------------------------------------------------

std::vector<std::pair<Point, Point>> probe_points(int d, double length, const ProbePlan& plan) {
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int count = plan.n_points;
  // Per coordinate an independent permutation of the strata, jittered inside.
  std::vector<std::vector<int>> strata(static_cast<std::size_t>(2 * d));
  for (auto& s : strata) {
    s.resize(static_cast<std::size_t>(count));
    std::iota(s.begin(), s.end(), 0);
    std::shuffle(s.begin(), s.end(), rng);
  }
  std::vector<std::pair<Point, Point>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Point x(static_cast<std::size_t>(d));
    Point xi(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      x[a] = length * (strata[a][k] + unit(rng)) / count;
      xi[a] = (strata[d + a][k] + unit(rng)) / count;
    }
    pts.emplace_back(std::move(x), std::move(xi));
  }
  return pts;
}

std::pair<double, double> hermitian_eigen_range(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

namespace {

std::string describe_point(const Point& x, const Point& xi) {
  std::ostringstream os;
  os.precision(6);
  os << "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << "), xi=(";
  for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
  os << ")";
  return os.str();
}

// Largest |M - M^H| entry and its position.
double defect(const CMatrix& m, int& row, int& col) {
  double worst = 0.0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      const double v = std::abs(m(r, c) - std::conj(m(c, r)));
      if (v > worst) {
        worst = v;
        row = r;
        col = c;
      }
    }
  }
  return worst;
}

}  // namespace

ValidationReport inspect(const CoefficientSet& cs, const ProbePlan& plan) {
  if (plan.n_points < 100 || plan.n_zeta < 50) {
    throw ProblemError("probe plan needs at least 100 points and 50 zeta samples");
  }
  ValidationReport rep;
  const auto pts = probe_points(cs.d(), cs.length, plan);
  rep.sample_count = static_cast<int>(pts.size());
  rep.c1 = rep.g1 = std::numeric_limits<double>::infinity();
  rep.c2 = rep.g2 = -std::numeric_limits<double>::infinity();
  for (const auto& [x, xi] : pts) {
    const CMatrix A = cs.A(x, xi);
    const CMatrix V = cs.V(x, xi);
    const CMatrix G = cs.G(x, xi);
    const std::pair<const char*, const CMatrix*> checked[] = {{"A", &A}, {"V", &V}, {"G", &G}};
    for (const auto& [label, mat] : checked) {
      int r = 0;
      int c = 0;
      const double def = defect(*mat, r, c);
      rep.max_hermitian_defect = std::max(rep.max_hermitian_defect, def);
      if (def > 1e-12 && rep.hermitian_ok) {
        rep.hermitian_ok = false;
        std::ostringstream os;
        os << label << "[" << r + 1 << "][" << c + 1 << "] is not Hermitian at "
           << describe_point(x, xi) << " (defect " << def << ")";
        rep.offending = os.str();
      }
    }
    const auto [amin, amax] = hermitian_eigen_range(A);
    const auto [gmin, gmax] = hermitian_eigen_range(G);
    rep.c1 = std::min(rep.c1, amin);
    rep.c2 = std::max(rep.c2, amax);
    rep.g1 = std::min(rep.g1, gmin);
    rep.g2 = std::max(rep.g2, gmax);
  }

  // Rank of B(zeta): coordinate directions plus random unit vectors.
  std::vector<Point> zetas;
  for (int a = 0; a < cs.d(); ++a) {
    Point z(static_cast<std::size_t>(cs.d()), 0.0);
    z[a] = 1.0;
    zetas.push_back(z);
  }
  std::mt19937_64 rng(plan.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < plan.n_zeta; ++k) {
    Point z(static_cast<std::size_t>(cs.d()));
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : z) {
        v = normal(rng);
        norm += v * v;
      }
    } while (norm < 1e-20);
    for (double& v : z) v /= std::sqrt(norm);
    zetas.push_back(z);
  }
  rep.zeta_count = static_cast<int>(zetas.size());
  for (const auto& z : zetas) {
    Eigen::JacobiSVD<CMatrix> svd(cs.bstruct.symbol(z));
    const auto& s = svd.singularValues();
    const double ratio = s.maxCoeff() > 0.0 ? s.minCoeff() / s.maxCoeff() : 0.0;
    rep.min_rank_ratio = std::min(rep.min_rank_ratio, ratio);
    if (ratio <= 1e-10) rep.rank_ok = false;
  }
  if (rep.offending.empty()) {
    if (!rep.rank_ok) {
      rep.offending = "B(zeta) is rank deficient";
    } else if (!(rep.c1 > 0.0)) {
      rep.offending = "A is not positive definite (c1 = " + std::to_string(rep.c1) + ")";
    } else if (!(rep.g1 > 0.0)) {
      rep.offending = "G is not positive definite (g1 = " + std::to_string(rep.g1) + ")";
    }
  }
  return rep;
}

ValidationReport validate(const CoefficientSet& cs, const ProbePlan& plan) {
  ValidationReport rep = inspect(cs, plan);
  if (!rep.valid()) throw ValidationFailed("validation failed: " + rep.offending, rep);
  return rep;
}

}  // namespace homog
