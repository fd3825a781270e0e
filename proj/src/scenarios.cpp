#include "homog/scenarios.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

namespace homog {

namespace {

std::string where(const Point& x, const Point& xi) {
  std::ostringstream os;
  os.precision(6);
  os << "x=(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << "), xi=(";
  for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
  os << ")";
  return os.str();
}

CMatrix block_value(const DivergenceFormSpec& s, std::span<const double> x,
                    std::span<const double> xi) {
  CMatrix out(s.n * s.d, s.n * s.d);
  for (int i = 0; i < s.d; ++i) {
    for (int j = 0; j < s.d; ++j) out.block(i * s.n, j * s.n, s.n, s.n) = s.block(i, j)(x, xi);
  }
  return out;
}

MatrixField scaled(const ScalarField& f, Complex c, int n) {
  if (f.is_zero()) return MatrixField::zero(n, n);
  return MatrixField::from_function(
      n, n,
      [f, c, n](std::span<const double> x, std::span<const double> xi) {
        return CMatrix(CMatrix::Identity(n, n) * (c * f.evaluate_reduced(x, xi)));
      },
      f.depends_on_x(), f.depends_on_xi());
}

}  // namespace

void DivergenceFormSpec::normalize() {
  if (d < 1 || d > 2) throw ProblemError("divergence form: d must be 1 or 2");
  if (n < 1) throw ProblemError("divergence form: n must be positive");
  if (static_cast<int>(g.size()) != d * d) throw ProblemError("divergence form: need d*d blocks g");
  for (const auto& b : g) {
    if (b.rows() != n || b.cols() != n) throw ProblemError("divergence form: g blocks must be n x n");
  }
  if (sa.empty()) sa.assign(static_cast<std::size_t>(d), MatrixField::zero(n, n));
  if (static_cast<int>(sa.size()) != d) throw ProblemError("divergence form: need d fields a");
  for (const auto& f : sa) {
    if (f.rows() != n || f.cols() != n) throw ProblemError("divergence form: a must be n x n");
  }
  if (sv.empty()) sv = MatrixField::zero(n, n);
  if (sv.rows() != n || sv.cols() != n) throw ProblemError("divergence form: v must be n x n");
}

ValidationReport validate(const DivergenceFormSpec& spec_in, const ProbePlan& plan) {
  DivergenceFormSpec spec = spec_in;
  spec.normalize();
  if (plan.n_points < 100) throw ProblemError("probe plan needs at least 100 points");
  ValidationReport rep;
  const auto pts = probe_points(spec.d, spec.length, plan);
  rep.sample_count = static_cast<int>(pts.size());
  rep.c1 = std::numeric_limits<double>::infinity();
  rep.c2 = -std::numeric_limits<double>::infinity();
  rep.g1 = rep.g2 = 1.0;
  for (const auto& [x, xi] : pts) {
    for (int i = 0; i < spec.d && rep.hermitian_ok; ++i) {
      for (int j = 0; j < spec.d && rep.hermitian_ok; ++j) {
        const double def = max_abs(spec.block(i, j)(x, xi).adjoint() - spec.block(j, i)(x, xi));
        rep.max_hermitian_defect = std::max(rep.max_hermitian_defect, def);
        if (def > 1e-12) {
          rep.hermitian_ok = false;
          rep.offending = "g[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                          "] is not the adjoint of g[" + std::to_string(j + 1) + "][" +
                          std::to_string(i + 1) + "] at " + where(x, xi);
        }
      }
    }
    const CMatrix v = spec.sv(x, xi);
    const double vdef = max_abs(v - v.adjoint());
    rep.max_hermitian_defect = std::max(rep.max_hermitian_defect, vdef);
    if (vdef > 1e-12 && rep.hermitian_ok) {
      rep.hermitian_ok = false;
      rep.offending = "v is not Hermitian at " + where(x, xi);
    }
    const auto [lo, hi] = hermitian_eigen_range(block_value(spec, x, xi));
    rep.c1 = std::min(rep.c1, lo);
    rep.c2 = std::max(rep.c2, hi);
  }
  if (rep.offending.empty() && rep.c1 <= 0.0) {
    rep.offending = "block metric g is not positive definite (c1 = " + std::to_string(rep.c1) + ")";
  }
  if (!rep.valid()) throw ValidationFailed("validation failed: " + rep.offending, rep);
  return rep;
}

MatrixField block_metric(const DivergenceFormSpec& spec) {
  bool dx = false;
  bool dxi = false;
  for (const auto& b : spec.g) {
    dx = dx || b.depends_on_x();
    dxi = dxi || b.depends_on_xi();
  }
  const int size = spec.n * spec.d;
  return MatrixField::from_function(
      size, size,
      [spec](std::span<const double> x, std::span<const double> xi) {
        return block_value(spec, x, xi);
      },
      dx, dxi);
}

CoefficientSet to_canonical(const DivergenceFormSpec& spec_in, bool check) {
  DivergenceFormSpec spec = spec_in;
  spec.normalize();
  if (check) validate(spec);
  const int d = spec.d;
  const int n = spec.n;
  CoefficientSet cs;
  cs.name = spec.name;
  cs.length = spec.length;
  cs.bstruct = BStructure::stacked_identity(d, n);
  cs.A = block_metric(spec);
  cs.a.assign(static_cast<std::size_t>(d), MatrixField::zero(n, n));
  cs.b.assign(static_cast<std::size_t>(d), MatrixField::identity(n));
  cs.V = spec.sv;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cs.a[i] = cs.a[i] + spec.sa[j].adjoint() * spec.block(j, i);
      cs.V = cs.V + spec.sa[i].adjoint() * spec.block(i, j) * spec.sa[j];
    }
  }
  bool any_a = false;
  for (const auto& a : cs.a) any_a = any_a || !a.is_zero();
  if (!any_a) cs.b.assign(static_cast<std::size_t>(d), MatrixField::zero(n, n));
  cs.G = MatrixField::identity(n);
  cs.normalize();
  if (check) validate(cs);
  return cs;
}

Complex divergence_form_value(const DivergenceFormSpec& spec_in, const TorusGrid& grid,
                              const EpsilonChoice& eps, const DiscreteField& u) {
  DivergenceFormSpec spec = spec_in;
  spec.normalize();
  const int d = spec.d;
  const int n = spec.n;
  if (grid.d != d || u.size() != static_cast<Eigen::Index>(grid.size()) * n) {
    throw ProblemError("divergence form: field does not match the grid");
  }
  const double inv_h = 1.0 / grid.h();
  std::vector<CVector> du(static_cast<std::size_t>(d));
  std::vector<CVector> s_edge(static_cast<std::size_t>(d));
  std::vector<CVector> s_node(static_cast<std::size_t>(d));
  Complex total(0.0, 0.0);
  for (int k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    const Point xi_e = fast_coordinate(grid, eps, k, true);
    const Point xi_n = fast_coordinate(grid, eps, k, false);
    const CVector uk = u.segment(static_cast<Eigen::Index>(k) * n, n);
    for (int i = 0; i < d; ++i) {
      const int kp = grid.shift(k, i, 1);
      du[i] = (u.segment(static_cast<Eigen::Index>(kp) * n, n) - uk) * inv_h;
      s_edge[i] = spec.sa[i](x, xi_e) * uk;
      s_node[i] = spec.sa[i](x, xi_n) * uk;
    }
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const CMatrix ge = spec.block(i, j)(x, xi_e);
        const CMatrix gn = spec.block(i, j)(x, xi_n);
        total += du[i].dot(ge * du[j]);
        total += du[i].dot(ge * s_edge[j]);
        total += s_edge[i].dot(ge * du[j]);
        total += s_node[i].dot(gn * s_node[j]);
      }
    }
    total += uk.dot(spec.sv(x, xi_n) * uk);
  }
  return total * grid.cell_volume();
}

Complex operator_form_value(const DiscreteOperator& H, const DiscreteField& u) {
  return u.dot(H.matrix * u) * H.grid.cell_volume();
}

DivergenceFormSpec pauli(int d, const ScalarField& A1, const ScalarField& A2,
                         const std::vector<ScalarField>& metric, double fd_step, double length) {
  if (d != 2) throw DimensionError("the Pauli operator is defined for d = 2 only");
  if (!metric.empty() && metric.size() != 4) {
    throw ProblemError("Pauli metric needs 4 entries (row-major 2 x 2)");
  }
  DivergenceFormSpec s;
  s.d = 2;
  s.n = 2;
  s.length = length;
  s.name = "pauli";
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (metric.empty()) {
        s.g.push_back(i == j ? MatrixField::identity(2) : MatrixField::zero(2, 2));
      } else {
        s.g.push_back(MatrixField::scalar(2, metric[static_cast<std::size_t>(i * 2 + j)]));
      }
    }
  }
  s.sa = {scaled(A1, Complex(0.0, 1.0), 2), scaled(A2, Complex(0.0, 1.0), 2)};
  if (A1.is_zero() && A2.is_zero()) {
    s.sv = MatrixField::zero(2, 2);
  } else {
    const double h = fd_step;
    s.sv = MatrixField::from_function(
        2, 2,
        [A1, A2, h](std::span<const double> x, std::span<const double> xi) {
          Point xp(x.begin(), x.end());
          Point xm = xp;
          xp[0] += h;
          xm[0] -= h;
          const Complex d1A2 = (A2.evaluate_reduced(xp, xi) - A2.evaluate_reduced(xm, xi)) / (2 * h);
          xp.assign(x.begin(), x.end());
          xm = xp;
          xp[1] += h;
          xm[1] -= h;
          const Complex d2A1 = (A1.evaluate_reduced(xp, xi) - A1.evaluate_reduced(xm, xi)) / (2 * h);
          const Complex b = d1A2 - d2A1;
          CMatrix out = CMatrix::Zero(2, 2);
          out(0, 0) = b;
          out(1, 1) = -b;
          return out;
        },
        true, A1.depends_on_xi() || A2.depends_on_xi());
  }
  return s;
}

void validate_transform(const MatrixField& f, int d, double length, const ProbePlan& plan) {
  ValidationReport rep;
  rep.c1 = std::numeric_limits<double>::infinity();
  const auto pts = probe_points(d, length, plan);
  rep.sample_count = static_cast<int>(pts.size());
  for (const auto& [x, xi] : pts) {
    const CMatrix v = f(x, xi);
    const double def = max_abs(v - v.adjoint());
    rep.max_hermitian_defect = std::max(rep.max_hermitian_defect, def);
    if (def > 1e-12 && rep.hermitian_ok) {
      rep.hermitian_ok = false;
      rep.offending = "transform f is not Hermitian at " + where(x, xi);
    }
    rep.c1 = std::min(rep.c1, hermitian_eigen_range(v).first);
  }
  rep.g1 = 1.0;
  if (rep.offending.empty() && rep.c1 <= 0.0) rep.offending = "transform f is not positive definite";
  if (!rep.valid()) throw ValidationFailed("validation failed: " + rep.offending, rep);
}

TransformCheck f_transform_check(const CoefficientSet& cs, const MatrixField& f, Complex lambda,
                                 const DiscreteField& rhs, const TorusGrid& grid,
                                 const EpsilonChoice& eps, const ShiftedSolverOptions& opts) {
  if (f.rows() != cs.n() || f.cols() != cs.n()) throw ProblemError("transform f must be n x n");
  validate_transform(f, cs.d(), cs.length);
  const int n = cs.n();
  const DiscreteOperator H = assemble_H_eps(cs, grid, eps);
  const DiscreteOperator G = assemble_G_eps(cs, grid, eps);
  const DiscreteOperator F = multiplication_operator(f, grid, eps, n);
  const MatrixField f_inv = MatrixField::from_function(
      n, n,
      [f](std::span<const double> x, std::span<const double> xi) {
        return CMatrix(f(x, xi).inverse());
      },
      f.depends_on_x(), f.depends_on_xi());
  const DiscreteOperator Fi = multiplication_operator(f_inv, grid, eps, n);
  const SparseC FH = F.matrix.adjoint();
  const SparseC FiH = Fi.matrix.adjoint();

  DiscreteOperator Ht = H;
  Ht.matrix = hermitian_part(SparseC(FH * (H.matrix * F.matrix)));
  DiscreteOperator Gt = G;
  Gt.matrix = hermitian_part(SparseC(FiH * (G.matrix * Fi.matrix)));

  check_shift(lambda, shift_window(Ht, G));
  check_shift(lambda, shift_window(H, Gt));

  TransformCheck out;
  const ShiftedSolver left_solver(Ht, G, lambda, opts);
  const DiscreteField left = F.matrix * left_solver.solve(FH * rhs);
  out.residual_left = left_solver.last_residual();
  const ShiftedSolver right_solver(H, Gt, lambda, opts);
  const DiscreteField right = right_solver.solve(rhs);
  out.residual_right = right_solver.last_residual();
  const double scale = std::max(right.norm(), std::numeric_limits<double>::min());
  out.discrepancy = (left - right).norm() / scale;
  return out;
}

// ---------------------------------------------------------------------------
// Bundled problems.

namespace {

ScalarField sf(const char* re) { return ScalarField::parse(re); }

MatrixField entries(int n, std::initializer_list<const char*> es) {
  std::vector<ScalarField> v;
  for (const char* e : es) v.push_back(sf(e));
  return MatrixField(n, n, std::move(v));
}

Preset scalar_1d(std::string name, std::string description, const char* A) {
  Preset p;
  p.name = std::move(name);
  p.description = std::move(description);
  p.cs.name = p.name;
  p.cs.bstruct = BStructure::gradient(1);
  p.cs.A = MatrixField::scalar(1, sf(A));
  p.rhs = {"sin(x1)"};
  p.periods = {8, 16, 32, 64, 128};
  p.n_cell = 128;
  return p;
}

Preset from_form(std::string name, std::string description, DivergenceFormSpec form) {
  Preset p;
  p.name = std::move(name);
  p.description = std::move(description);
  form.name = p.name;
  p.cs = to_canonical(form, false);
  p.form = std::move(form);
  p.periods = {2, 4, 8};
  p.n_cell = 32;
  p.n_slow = p.cs.depends_on_x() ? 4 : 1;
  if (p.cs.n() == 1) {
    p.rhs = {"sin(x1)*cos(x2)"};
  } else {
    p.rhs = {"sin(x1)*cos(x2)", "cos(x1) + 0.5*sin(x2)"};
  }
  return p;
}

using Factory = Preset (*)();

const std::map<std::string, Factory>& registry() {
  static const std::map<std::string, Factory> r = {
      {"harmonic1d",
       [] {
         return scalar_1d("harmonic1d", "-d/dx (2 + sin(2 pi x/eps)) d/dx", "2 + sin(2*pi*xi1)");
       }},
      {"lowerorder1d",
       [] {
         Preset p = scalar_1d("lowerorder1d",
                              "x-dependent scalar problem with first-order terms and a potential",
                              "(1 + 0.3*cos(x1))*(2 + sin(2*pi*xi1))");
         p.cs.a = {MatrixField::scalar(1, sf("cos(2*pi*xi1)"))};
         p.cs.b = {MatrixField::identity(1)};
         p.cs.V = MatrixField::scalar(1, sf("1 + 0.5*cos(2*pi*xi1)"));
         p.n_slow = 16;
         return p;
       }},
      {"constant1d",
       [] {
         Preset p = scalar_1d("constant1d", "coefficients without fast dependence",
                              "1.5 + 0.5*cos(x1)");
         p.cs.a = {MatrixField::scalar(1, sf("0.25"))};
         p.cs.b = {MatrixField::identity(1)};
         p.cs.V = MatrixField::scalar(1, sf("1"));
         p.n_slow = 16;
         return p;
       }},
      {"weighted1d",
       [] {
         Preset p = scalar_1d("weighted1d", "harmonic1d with an oscillating weight G",
                              "2 + sin(2*pi*xi1)");
         p.cs.G = MatrixField::scalar(1, sf("1 + 0.5*cos(2*pi*xi1)"));
         return p;
       }},
      {"ftransform1d",
       [] {
         Preset p = scalar_1d("ftransform1d", "harmonic1d with the transform f = 1.5 + 0.5 sin(2 pi xi)",
                              "2 + sin(2*pi*xi1)");
         p.transform = MatrixField::scalar(1, sf("1.5 + 0.5*sin(2*pi*xi1)"));
         return p;
       }},
      {"schrodinger-metric",
       [] {
         DivergenceFormSpec s;
         s.d = 2;
         s.n = 2;
         const MatrixField off = MatrixField::scalar(2, sf("0.3"));
         s.g = {MatrixField::scalar(2, sf("(1 + 0.2*cos(x1))*(2 + sin(2*pi*xi1))")), off, off,
                MatrixField::scalar(2, sf("2 + cos(2*pi*xi2)"))};
         s.sv = entries(2, {"1 + 0.5*cos(2*pi*xi1)", "0.2", "0.2", "1"});
         return from_form("schrodinger-metric", "matrix Schrodinger operator with a metric",
                          std::move(s));
       }},
      {"magnetic2d",
       [] {
         DivergenceFormSpec s;
         s.d = 2;
         s.n = 1;
         s.g = {MatrixField::scalar(1, sf("2 + sin(2*pi*xi1)")), MatrixField::zero(1, 1),
                MatrixField::zero(1, 1), MatrixField::scalar(1, sf("2 + cos(2*pi*xi2)"))};
         s.sa = {MatrixField::scalar(1, ScalarField::parse("0", "0.5*sin(x2)*(1 + 0.5*cos(2*pi*xi1))")),
                 MatrixField::scalar(1, ScalarField::parse("0", "0.4*cos(x1)"))};
         s.sv = MatrixField::scalar(1, sf("1 + 0.5*cos(2*pi*(xi1 + xi2))"));
         return from_form("magnetic2d", "scalar magnetic Schrodinger operator", std::move(s));
       }},
      {"pauli2d",
       [] {
         return from_form("pauli2d", "two-dimensional Pauli operator",
                          pauli(2, sf("0.5*sin(x2)"), sf("0.5*sin(x1)*(1 + 0.5*cos(2*pi*xi2))"),
                                {sf("2 + sin(2*pi*xi1)"), sf("0"), sf("0"),
                                 sf("2 + cos(2*pi*xi2)")}));
       }},
      {"pauli2d-free",
       [] {
         return from_form("pauli2d-free", "Pauli operator with zero potentials",
                          pauli(2, ScalarField(), ScalarField(),
                                {sf("2 + sin(2*pi*xi1)"), sf("0"), sf("0"),
                                 sf("2 + cos(2*pi*xi2)")}));
       }},
  };
  return r;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

Preset make_preset(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw ProblemError("unknown preset '" + name + "'");
  Preset p = it->second();
  p.cs.normalize();
  return p;
}

}  // namespace homog
