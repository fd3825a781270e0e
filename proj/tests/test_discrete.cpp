#include "homog/discrete.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace homog;

namespace {

CoefficientSet scalar_1d(const char* A, const char* a = nullptr, const char* V = nullptr) {
  CoefficientSet cs;
  cs.bstruct = BStructure::gradient(1);
  cs.A = MatrixField::scalar(1, ScalarField::parse(A));
  if (a) {
    cs.a = {MatrixField::scalar(1, ScalarField::parse(a))};
    cs.b = {MatrixField::identity(1)};
  }
  if (V) cs.V = MatrixField::scalar(1, ScalarField::parse(V));
  cs.normalize();
  return cs;
}

// d = 2, n = 1, m = 3: B_1 = (1, 0, 1)^T, B_2 = (0, 1, 1)^T.
CoefficientSet skew_2d(bool lower_order) {
  CoefficientSet cs;
  cs.bstruct.d = 2;
  cs.bstruct.n = 1;
  cs.bstruct.m = 3;
  CMatrix b1(3, 1);
  b1 << 1.0, 0.0, 1.0;
  CMatrix b2(3, 1);
  b2 << 0.0, 1.0, 1.0;
  cs.bstruct.b = {b1, b2};
  std::vector<ScalarField> e(9);
  e[0] = ScalarField::parse("2 + sin(2*pi*xi1)");
  e[4] = ScalarField::parse("2 + cos(2*pi*xi2) * (1 + 0.2*sin(x1))");
  e[8] = ScalarField::parse("1.5");
  e[1] = ScalarField::parse("0.2", "0.3*cos(2*pi*xi1)");
  e[3] = ScalarField::parse("0.2", "-0.3*cos(2*pi*xi1)");
  cs.A = MatrixField(3, 3, e);
  if (lower_order) {
    cs.a = {MatrixField::scalar(1, ScalarField::parse("cos(2*pi*xi2)", "0.3")),
            MatrixField::scalar(1, ScalarField::parse("sin(2*pi*(xi1 + xi2))"))};
    cs.b = {MatrixField::scalar(1, ScalarField::parse("1 + 0.2*cos(x2)")), MatrixField::identity(1)};
    cs.V = MatrixField::scalar(1, ScalarField::parse("1 + 0.5*cos(2*pi*xi1)"));
  }
  cs.normalize();
  return cs;
}

double sigma_h(double h) { return (2 - 2 * std::cos(h)) / (h * h); }

std::vector<Point> all_nodes(const TorusGrid& g) {
  std::vector<Point> out;
  for (int k = 0; k < g.size(); ++k) out.push_back(g.node(k));
  return out;
}

DiscreteField random_field(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> N(0.0, 1.0);
  DiscreteField u(size);
  for (int i = 0; i < size; ++i) u(i) = Complex(N(rng), N(rng));
  return u;
}

// Random combination of the first few Fourier modes on a 1D torus.
DiscreteField smooth_field(std::mt19937_64& rng, const TorusGrid& g) {
  std::normal_distribution<double> N(0.0, 1.0);
  DiscreteField u = DiscreteField::Zero(g.size());
  for (int mode = 0; mode <= 3; ++mode) {
    const Complex c(N(rng), N(rng));
    for (int k = 0; k < g.size(); ++k) u(k) += c * std::exp(Complex(0.0, mode * g.node(k)[0]));
  }
  return u;
}

double op_max_abs(const SparseC& m) {
  double v = 0.0;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseC::InnerIterator it(m, c); it; ++it) v = std::max(v, std::abs(it.value()));
  }
  return v;
}

}  // namespace

TEST(TorusGrid, ShapeAndChecks) {
  const TorusGrid g(2, kTwoPi, 16);
  EXPECT_EQ(g.size(), 256);
  EXPECT_DOUBLE_EQ(g.h(), kTwoPi / 16);
  EXPECT_DOUBLE_EQ(g.cell_volume(), g.h() * g.h());
  EXPECT_EQ(g.index(17), (std::vector<int>{1, 1}));
  EXPECT_EQ(g.shift(15, 0, 1), 0);
  EXPECT_THROW(TorusGrid(1, kTwoPi, 8), ProblemError);
  EXPECT_THROW(TorusGrid(3, kTwoPi, 16), ProblemError);
}

TEST(EpsilonChoice, CommensurabilityEnforced) {
  const EpsilonChoice e = EpsilonChoice::from_eps(kTwoPi / 8, kTwoPi);
  EXPECT_EQ(e.fast_periods, 8);
  EXPECT_THROW(EpsilonChoice::from_eps(1.0, kTwoPi), CommensurabilityError);
  EXPECT_EQ(EpsilonChoice::from_periods(32, kTwoPi).fast_periods, 32);
}

TEST(FastCoordinate, ExactRationalValues) {
  const TorusGrid g(1, kTwoPi, 24);
  const EpsilonChoice e = EpsilonChoice::from_periods(3, kTwoPi);
  EXPECT_EQ(fast_coordinate(g, e, 8, false)[0], 0.0);
  EXPECT_EQ(fast_coordinate(g, e, 1, false)[0], 0.125);
  EXPECT_EQ(fast_coordinate(g, e, 1, true)[0], 0.1875);
  EXPECT_EQ(fast_coordinate(g, e, 7, true)[0], 0.9375);
}

TEST(ForwardDifference, AdjointIsNegativeBackwardDifference) {
  const TorusGrid g(2, kTwoPi, 16);
  for (int a = 0; a < 2; ++a) {
    const SparseC D = forward_difference(g, 2, a);
    const SparseC DH = D.adjoint();
    // (D^+)^H u(k) = (u(k - e_a) - u(k)) / h.
    std::mt19937_64 rng(a);
    const DiscreteField u = random_field(rng, 2 * g.size());
    const DiscreteField v = DH * u;
    for (int k = 0; k < g.size(); ++k) {
      const int km = g.shift(k, a, -1);
      for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(std::abs(v(2 * k + c) - (u(2 * km + c) - u(2 * k + c)) / g.h()), 0.0, 1e-12);
      }
    }
  }
}

TEST(AssembleHeps, UnitCoefficientGivesLaplacianStencil) {
  const CoefficientSet cs = scalar_1d("1");
  const TorusGrid g(1, kTwoPi, 32);
  const DiscreteOperator H = assemble_H_eps(cs, g, EpsilonChoice::from_periods(4, kTwoPi));
  const double h2 = g.h() * g.h();
  const CMatrix dense = CMatrix(H.matrix);
  for (int k = 0; k < 32; ++k) {
    for (int j = 0; j < 32; ++j) {
      double expect = 0.0;
      if (j == k) expect = 2.0 / h2;
      if (j == (k + 1) % 32 || j == (k + 31) % 32) expect = -1.0 / h2;
      EXPECT_NEAR(std::abs(dense(k, j) - expect), 0.0, 1e-9) << k << "," << j;
    }
  }
  EXPECT_EQ(H.kind, OperatorKind::H_eps);
}

TEST(AssembleHeps, ExactlyHermitian) {
  const TorusGrid g2(2, kTwoPi, 16);
  const EpsilonChoice e = EpsilonChoice::from_periods(2, kTwoPi);
  for (bool lower : {false, true}) {
    const CoefficientSet cs = skew_2d(lower);
    EXPECT_EQ(hermitian_defect(assemble_H_eps(cs, g2, e).matrix), 0.0);
    EXPECT_EQ(hermitian_defect(assemble_G_eps(cs, g2, e).matrix), 0.0);
  }
  const TorusGrid g1(1, kTwoPi, 64);
  const CoefficientSet cs =
      scalar_1d("(1 + 0.3*cos(x1))*(2 + sin(2*pi*xi1))", "cos(2*pi*xi1)", "1 + 0.5*cos(2*pi*xi1)");
  EXPECT_EQ(hermitian_defect(assemble_H_eps(cs, g1, EpsilonChoice::from_periods(4, kTwoPi)).matrix), 0.0);
}

TEST(AssembleHeps, PositiveSemidefiniteWithoutLowerOrderTerms) {
  const CoefficientSet cs = skew_2d(false);
  const TorusGrid g(2, kTwoPi, 16);
  const DiscreteOperator H = assemble_H_eps(cs, g, EpsilonChoice::from_periods(2, kTwoPi));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(H.matrix), Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * es.eigenvalues().maxCoeff());
}

TEST(AssembleHeps, CoercivitySandwich) {
  // c1 s_min^2 |D u|^2 <= (A B u, B u) <= c2 s_max^2 |D u|^2 with s the singular
  // values of [B_1 B_2].
  const CoefficientSet cs = skew_2d(false);
  const ValidationReport rep = validate(cs);
  Eigen::JacobiSVD<CMatrix> svd(cs.bstruct.stacked());
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  const TorusGrid g(2, kTwoPi, 16);
  const DiscreteOperator H = assemble_H_eps(cs, g, EpsilonChoice::from_periods(2, kTwoPi));
  const SparseC D1 = forward_difference(g, 1, 0);
  const SparseC D2 = forward_difference(g, 1, 1);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const DiscreteField u = random_field(rng, g.size());
    const double q = u.dot(H.matrix * u).real();
    const double du = (D1 * u).squaredNorm() + (D2 * u).squaredNorm();
    EXPECT_GE(q, rep.c1 * smin * smin * du * (1 - 1e-12));
    EXPECT_LE(q, rep.c2 * smax * smax * du * (1 + 1e-12));
  }
}

TEST(AssembleH0, MatchesPerturbedOperatorForFastIndependentData) {
  const CoefficientSet cs = scalar_1d("1.5 + 0.5*cos(x1)", "0.25 + 0.1*sin(x1)", "1 + 0.2*cos(x1)");
  const TorusGrid g(1, kTwoPi, 32);
  const HomogenizedCoefficients hc = homogenize(cs, g.n, CellGrid(1, 8));
  const DiscreteOperator H0 = assemble_H_0(hc, cs.bstruct, g);
  const DiscreteOperator He = assemble_H_eps(cs, g, EpsilonChoice::from_periods(2, kTwoPi));
  EXPECT_EQ(op_max_abs(H0.matrix - He.matrix), 0.0);
  EXPECT_EQ(hermitian_defect(H0.matrix), 0.0);
  EXPECT_EQ(H0.kind, OperatorKind::H_0);
}

TEST(AssembleH0, HarmonicMeanTimesLaplacian) {
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)");
  const HomogenizedCoefficients hc = homogenize(cs, 1, CellGrid(1, 128));
  const double a2 = hc.A2[0](0, 0).real();
  EXPECT_NEAR(a2, std::sqrt(3.0), 1e-6);
  const TorusGrid g(1, kTwoPi, 64);
  const DiscreteOperator H0 = assemble_H_0(hc, cs.bstruct, g);
  const DiscreteOperator L = assemble_H_eps(scalar_1d("1"), g, EpsilonChoice::from_periods(4, kTwoPi));
  EXPECT_LE(op_max_abs(H0.matrix - a2 * L.matrix), 1e-12 * op_max_abs(L.matrix));
  EXPECT_EQ(hermitian_defect(H0.matrix), 0.0);
}

TEST(AssembleH0, HermitianForMatrixProblem) {
  const CoefficientSet cs = skew_2d(true);
  const TorusGrid g(2, kTwoPi, 16);
  const HomogenizedCoefficients hc = homogenize(cs, 4, CellGrid(2, 16));
  EXPECT_EQ(hermitian_defect(assemble_H_0(hc, cs.bstruct, g).matrix), 0.0);
  EXPECT_EQ(hermitian_defect(assemble_G_0(hc, g).matrix), 0.0);
}

TEST(AlignToGrid, InterpolatesAndRejectsMismatch) {
  const CoefficientSet cs = scalar_1d("2 + cos(x1)");
  const HomogenizedCoefficients hc = homogenize(cs, 8, CellGrid(1, 8));
  const TorusGrid g(1, kTwoPi, 16);
  const HomogenizedCoefficients fine = align_to_grid(hc, g);
  ASSERT_EQ(fine.A2.size(), 16u);
  EXPECT_EQ(fine.A2[2], hc.A2[1]);
  EXPECT_NEAR(fine.A2[1](0, 0).real(), 0.5 * (hc.A2[0](0, 0).real() + hc.A2[1](0, 0).real()), 1e-15);
  EXPECT_THROW(align_to_grid(hc, TorusGrid(1, 3.0, 16)), NodeMismatch);
  EXPECT_THROW(align_to_grid(hc, TorusGrid(2, kTwoPi, 16)), NodeMismatch);
}

TEST(ApplyCorrector, ZeroCorrectorsGiveZero) {
  const CoefficientSet cs = scalar_1d("2 + cos(x1)");
  const TorusGrid g(1, kTwoPi, 32);
  const CorrectorCache cache(cs, all_nodes(g), CellGrid(1, 8));
  std::mt19937_64 rng(1);
  const DiscreteField out =
      apply_corrector(cache, cs.bstruct, random_field(rng, g.size()), g, EpsilonChoice::from_periods(4, kTwoPi));
  EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyCorrector, ConstantFieldPicksUpLambda0) {
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)", "cos(2*pi*xi1)");
  const TorusGrid g(1, kTwoPi, 64);
  const EpsilonChoice e = EpsilonChoice::from_periods(4, kTwoPi);
  const CellGrid cg(1, 16);
  const CorrectorCache cache(cs, all_nodes(g), cg);
  const Complex c(0.7, -0.2);
  const DiscreteField out = apply_corrector(cache, cs.bstruct, DiscreteField::Constant(g.size(), c), g, e);
  for (int k = 0; k < g.size(); ++k) {
    const auto corr = cache.get(g.node(k));
    EXPECT_NEAR(std::abs(out(k) - corr->lambda0[k % 16](0, 0) * c), 0.0, 1e-14);
  }
}

TEST(ApplyCorrector, HarmonicClosedForm) {
  // Lambda1(xi) = int_0^xi (sqrt(3) / (2 + sin(2 pi t)) - 1) dt minus its mean.
  const int M = 1 << 16;
  std::vector<double> prim(M + 1, 0.0);
  for (int j = 0; j < M; ++j) {
    const double t = (j + 0.5) / M;
    prim[j + 1] = prim[j] + (std::sqrt(3.0) / (2 + std::sin(2 * kPi * t)) - 1) / M;
  }
  double mean = 0.0;
  for (int j = 0; j < M; ++j) mean += 0.5 * (prim[j] + prim[j + 1]) / M;
  auto lambda1 = [&](double xi) { return prim[static_cast<int>(std::lround(xi * M)) % M] - mean; };

  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)");
  const TorusGrid g(1, kTwoPi, 256);
  const EpsilonChoice e = EpsilonChoice::from_periods(16, kTwoPi);
  const CorrectorCache cache(cs, all_nodes(g), CellGrid(1, 16));
  const DiscreteField u0 = sample_rhs({ScalarField::parse("sin(x1)")}, g);
  const DiscreteField out = apply_corrector(cache, cs.bstruct, u0, g, e);
  double worst = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const double x = g.node(k)[0];
    const double xi = fast_coordinate(g, e, k, false)[0];
    worst = std::max(worst, std::abs(out(k) - lambda1(xi) * std::cos(x)));
  }
  EXPECT_LT(worst, 2e-2);
}

TEST(ApplyCorrector, MissingNodesThrow) {
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)");
  const TorusGrid g(1, kTwoPi, 32);
  const CorrectorCache cache(cs, {g.node(0)}, CellGrid(1, 8));
  EXPECT_THROW(apply_corrector(cache, cs.bstruct, DiscreteField::Ones(32), g,
                               EpsilonChoice::from_periods(4, kTwoPi)),
               CacheMiss);
}

TEST(Norms, ConstantAndSineFields) {
  const TorusGrid g(1, kTwoPi, 64);
  EXPECT_NEAR(l2_norm(DiscreteField::Ones(64), g), std::sqrt(kTwoPi), 1e-13);
  EXPECT_NEAR(w1_norm(DiscreteField::Ones(64), g, 1), std::sqrt(kTwoPi), 1e-13);
  const DiscreteField s = sample_rhs({ScalarField::parse("sin(x1)")}, g);
  EXPECT_NEAR(l2_norm(s, g), std::sqrt(kPi), 1e-12);
  EXPECT_NEAR(w1_norm(s, g, 1), std::sqrt(kPi * (1 + sigma_h(g.h()))), 1e-12);
}

TEST(SolveShifted, LaplacianEigenvectorIdentity) {
  const TorusGrid g(1, kTwoPi, 64);
  const DiscreteOperator H = assemble_H_eps(scalar_1d("1"), g, EpsilonChoice::from_periods(4, kTwoPi));
  const DiscreteOperator I = identity_operator(g, 1);
  const DiscreteField f = sample_rhs({ScalarField::parse("sin(x1)")}, g);
  const double s = sigma_h(g.h());
  const DiscreteField u = solve_shifted(H, I, -1.0, f);
  EXPECT_LE((u - f / (s + 1)).cwiseAbs().maxCoeff(), 1e-12);
  const ShiftedSolver solver(H, I, Complex(0.0, 1.0));
  const DiscreteField v = solver.solve(f);
  EXPECT_LE((v - f / Complex(s, -1.0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(solver.last_residual(), 1e-10);
}

TEST(SolveShifted, RandomHermitianSystemAgainstDenseOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N(0.0, 1.0);
  const int n = 50;
  CMatrix R(n, n);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = Complex(N(rng), N(rng));
  const CMatrix Hd = hermitian_part(R.adjoint() * R + CMatrix::Identity(n, n));
  DiscreteOperator H;
  H.matrix = Hd.sparseView();
  H.n = 1;
  DiscreteOperator G;
  G.matrix = SparseC(n, n);
  G.matrix.setIdentity();
  G.n = 1;
  const DiscreteField f = random_field(rng, n);
  const CVector oracle = (Hd + CMatrix::Identity(n, n)).partialPivLu().solve(f);
  for (ShiftBackend b : {ShiftBackend::Direct, ShiftBackend::Krylov}) {
    ShiftedSolverOptions o;
    o.backend = b;
    const ShiftedSolver s(H, G, -1.0, o);
    const DiscreteField u = s.solve(f);
    EXPECT_LE(s.last_residual(), 1e-10);
    EXPECT_LE((u - oracle).norm() / oracle.norm(), 1e-8);
  }
}

TEST(SolveShifted, Linearity) {
  const CoefficientSet cs = skew_2d(true);
  const TorusGrid g(2, kTwoPi, 16);
  const EpsilonChoice e = EpsilonChoice::from_periods(2, kTwoPi);
  const DiscreteOperator H = assemble_H_eps(cs, g, e);
  const DiscreteOperator G = assemble_G_eps(cs, g, e);
  const ShiftWindow w = shift_window(H, G);
  const Complex lambda(w.mu_hat - 1.0, 0.5);
  std::mt19937_64 rng(4);
  const DiscreteField f1 = random_field(rng, g.size());
  const DiscreteField f2 = random_field(rng, g.size());
  const Complex alpha(0.3, -1.2);
  const Complex beta(-2.0, 0.1);
  const ShiftedSolver s(H, G, lambda);
  const DiscreteField lhs = s.solve(alpha * f1 + beta * f2);
  const DiscreteField rhs = alpha * s.solve(f1) + beta * s.solve(f2);
  EXPECT_LE((lhs - rhs).norm() / rhs.norm(), 1e-9);
}

TEST(ShiftWindow, RejectsShiftsAtOrAboveTheEdge) {
  const TorusGrid g(1, kTwoPi, 64);
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)", nullptr, "1");
  const EpsilonChoice e = EpsilonChoice::from_periods(4, kTwoPi);
  const DiscreteOperator H = assemble_H_eps(cs, g, e);
  const DiscreteOperator G = assemble_G_eps(cs, g, e);
  const ShiftWindow w = shift_window(H, G);
  EXPECT_NEAR(w.h_hat, 1.0, 1e-10);
  EXPECT_NEAR(w.mu_hat, 1.0, 1e-10);
  EXPECT_THROW(check_shift(1.0, w), ShiftInsideSpectrum);
  EXPECT_THROW(check_shift(1.0 - 1e-7, w), ShiftInsideSpectrum);
  EXPECT_NO_THROW(check_shift(0.5, w));
  EXPECT_NO_THROW(check_shift(Complex(3.0, 1.0), w));
  EXPECT_THROW(solve_shifted(H, G, 2.0, DiscreteField::Ones(64)), ShiftInsideSpectrum);
}

TEST(BlockEigenRange, DiagonalWeight) {
  CoefficientSet cs = scalar_1d("1");
  cs.G = MatrixField::scalar(1, ScalarField::parse("1 + 0.5*cos(2*pi*xi1)"));
  const TorusGrid g(1, kTwoPi, 32);
  const auto [lo, hi] = block_eigen_range(assemble_G_eps(cs, g, EpsilonChoice::from_periods(2, kTwoPi)));
  EXPECT_NEAR(lo, 0.5, 1e-12);
  EXPECT_NEAR(hi, 1.5, 1e-12);
}

TEST(StabilityAcrossEps, ResolventBoundConstant) {
  // sup ||u||_W1 / ||f|| over smooth f for (H_eps + G_eps) u = f, on a fixed grid.
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)");
  const TorusGrid g(1, kTwoPi, 1024);
  std::vector<double> constants;
  for (int periods : {8, 16, 32, 64}) {
    const EpsilonChoice e = EpsilonChoice::from_periods(periods, kTwoPi);
    const DiscreteOperator H = assemble_H_eps(cs, g, e);
    const DiscreteOperator G = assemble_G_eps(cs, g, e);
    const ShiftedSolver s(H, G, -1.0);
    std::mt19937_64 rng(21);
    double c = 0.0;
    for (int t = 0; t < 20; ++t) {
      const DiscreteField f = smooth_field(rng, g);
      c = std::max(c, w1_norm(s.solve(f), g, 1) / l2_norm(f, g));
    }
    constants.push_back(c);
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LE(*hi / *lo, 2.0);
}

TEST(StabilityAcrossEps, CorrectorOperatorBound) {
  const CoefficientSet cs = scalar_1d("2 + sin(2*pi*xi1)", "cos(2*pi*xi1)");
  std::vector<double> constants;
  for (int periods : {8, 16, 32, 64}) {
    const TorusGrid g(1, kTwoPi, 16 * periods);
    const EpsilonChoice e = EpsilonChoice::from_periods(periods, kTwoPi);
    const CorrectorCache cache(cs, all_nodes(g), CellGrid(1, 16));
    std::mt19937_64 rng(5);
    double c = 0.0;
    for (int t = 0; t < 10; ++t) {
      const DiscreteField u = smooth_field(rng, g);
      c = std::max(c, l2_norm(apply_corrector(cache, cs.bstruct, u, g, e), g) / w1_norm(u, g, 1));
    }
    constants.push_back(c);
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LE(*hi / *lo, 2.0);
}
