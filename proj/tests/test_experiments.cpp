#include "homog/eigensolver.hpp"
#include "homog/experiments.hpp"
#include "homog/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace homog;

namespace {

std::vector<ScalarField> rhs_of(const Preset& p) {
  std::vector<ScalarField> f;
  for (const auto& s : p.rhs) f.push_back(ScalarField::parse(s));
  return f;
}

std::vector<double> sweep(std::initializer_list<int> periods) {
  const std::vector<int> v(periods);
  return eps_sweep(v, kTwoPi);
}

}  // namespace

TEST(FitRate, LinearAndQuadraticData) {
  const std::vector<double> eps = {0.8, 0.4, 0.2, 0.1};
  std::vector<double> lin;
  std::vector<double> quad;
  for (double e : eps) {
    lin.push_back(3.7 * e);
    quad.push_back(e * e);
  }
  EXPECT_NEAR(fit_rate(eps, lin), 1.0, 1e-12);
  EXPECT_NEAR(fit_rate(eps, quad), 2.0, 1e-12);
}

TEST(FitRate, ZerosAreLeftOut) {
  const std::vector<double> eps = {0.8, 0.4, 0.2, 0.1};
  const std::vector<double> err = {0.8, 0.0, 0.2, 0.1};
  EXPECT_NEAR(fit_rate(eps, err), 1.0, 1e-12);
  const std::vector<double> zeros = {0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(fit_rate(eps, zeros), std::numeric_limits<double>::infinity());
}

TEST(FitRate, DegenerateInputs) {
  const std::vector<double> eps = {0.8, 0.4, 0.2};
  EXPECT_THROW(fit_rate(eps, std::vector<double>{1.0, 0.0, 0.5}), DegenerateFit);
  EXPECT_THROW(fit_rate(eps, std::vector<double>{1.0, 0.5}), DegenerateFit);
  EXPECT_THROW(fit_rate(std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1.0, 2.0, 3.0}),
               DegenerateFit);
}

TEST(EpsSweep, DescendingAndValidated) {
  const auto e = sweep({8, 16, 32});
  ASSERT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e[0], kTwoPi / 8);
  EXPECT_GT(e[0], e[1]);
  EXPECT_GT(e[1], e[2]);
  const Preset p = make_preset("harmonic1d");
  EXPECT_THROW(run_resolvent_convergence(p.cs, {}, -1.0, rhs_of(p), sweep({8, 16})), ProblemError);
  const std::vector<double> up = {kTwoPi / 16, kTwoPi / 8, kTwoPi / 32};
  EXPECT_THROW(run_resolvent_convergence(p.cs, {}, -1.0, rhs_of(p), up), ProblemError);
}

TEST(PlanLeg, GridSizes) {
  const Preset p = make_preset("harmonic1d");
  GridPlan plan;
  const LegGrids g = plan_leg(p.cs, plan, kTwoPi / 8);
  EXPECT_EQ(g.torus.n, 128);
  EXPECT_EQ(g.cell.n, 16);
  EXPECT_EQ(g.eps.fast_periods, 8);
  plan.n_phys = 100;
  EXPECT_THROW(plan_leg(p.cs, plan, kTwoPi / 8), ProblemError);
  plan.n_cell = 16;
  EXPECT_EQ(plan_leg(p.cs, plan, kTwoPi / 8).torus.n, 100);
  EXPECT_THROW(plan_leg(p.cs, plan, 1.0), CommensurabilityError);
}

TEST(ResolventConvergence, FastIndependentDataGivesZeroError) {
  const Preset p = make_preset("constant1d");
  const ConvergenceReport r = run_resolvent_convergence(p.cs, {}, -1.0, rhs_of(p), sweep({8, 16, 32}));
  for (std::size_t l = 0; l < r.err_L2.size(); ++l) {
    EXPECT_EQ(r.err_L2[l], 0.0);
    EXPECT_EQ(r.err_W1_corrected[l], 0.0);
    EXPECT_EQ(r.err_W1_uncorrected[l], 0.0);
  }
  EXPECT_FALSE(r.floor_contaminated);
}

TEST(ResolventConvergence, HarmonicRates) {
  const Preset p = make_preset("harmonic1d");
  const ConvergenceReport r =
      run_resolvent_convergence(p.cs, {}, -1.0, rhs_of(p), sweep({8, 16, 32, 64}), "sin");
  EXPECT_TRUE(r.passed()) << r.rate_L2 << " " << r.rate_W1;
  EXPECT_GE(r.rate_L2, 0.9);
  EXPECT_GE(r.rate_W1, 0.9);
  EXPECT_LT(r.rate_W1_uncorrected, 0.5);
  EXPECT_EQ(r.rhs_id, "sin");
  for (std::size_t l = 0; l + 1 < r.err_L2.size(); ++l) {
    EXPECT_LE(r.err_L2[l + 1], 1.1 * r.err_L2[l]);
    EXPECT_LE(r.err_W1_corrected[l + 1], 1.1 * r.err_W1_corrected[l]);
    EXPECT_LE(r.residual_eps[l], 1e-10);
    EXPECT_LE(r.residual_0[l], 1e-10);
    EXPECT_TRUE(std::isfinite(r.fd_error[l]));
  }
  // Corrector visibly improves the gradient error on the finest leg.
  EXPECT_LT(r.err_W1_corrected.back(), 0.1 * r.err_W1_uncorrected.back());
}

TEST(ResolventConvergence, RatesRobustInTheShift) {
  const Preset p = make_preset("lowerorder1d");
  const auto e = sweep({8, 16, 32, 64});
  GridPlan plan;
  plan.fd_probe = false;
  std::vector<double> l2;
  std::vector<double> w1;
  for (Complex lambda : {Complex(-1.0, 0.0), Complex(0.0, 1.0), Complex(-1.0, 1.0)}) {
    const ConvergenceReport r = run_resolvent_convergence(p.cs, plan, lambda, rhs_of(p), e);
    l2.push_back(r.rate_L2);
    w1.push_back(r.rate_W1);
    EXPECT_TRUE(r.passed()) << lambda;
  }
  for (std::size_t i = 1; i < l2.size(); ++i) {
    EXPECT_NEAR(l2[i], l2[0], 0.2);
    EXPECT_NEAR(w1[i], w1[0], 0.2);
  }
}

TEST(ResolventConvergence, ShiftInsideSpectrumIsRejected) {
  const Preset p = make_preset("harmonic1d");
  EXPECT_THROW(run_resolvent_convergence(p.cs, {}, 2.0, rhs_of(p), sweep({8, 16, 32})),
               ShiftInsideSpectrum);
}

TEST(SpectrumConvergence, HarmonicGapsShrink) {
  const Preset p = make_preset("harmonic1d");
  const SpectrumReport r = run_spectrum_convergence(p.cs, {}, 3, sweep({8, 16, 32, 64}));
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.monotone);
  ASSERT_EQ(r.gaps.size(), 4u);
  for (std::size_t l = 0; l < r.gaps.size(); ++l) {
    for (int j = 0; j + 1 < 3; ++j) EXPECT_LE(r.eig_eps[l][j], r.eig_eps[l][j + 1]);
  }
}

TEST(SpectrumConvergence, FastIndependentDataGivesZeroGaps) {
  const Preset p = make_preset("constant1d");
  const SpectrumReport r = run_spectrum_convergence(p.cs, {}, 2, sweep({8, 16, 32}));
  for (const auto& g : r.gaps) {
    for (double v : g) EXPECT_LE(v, gap_floor(1.0) * 10);
  }
  EXPECT_TRUE(r.passed());
}

TEST(SpectrumConvergence, RequiresUnitWeightAndValidK) {
  const Preset w = make_preset("weighted1d");
  EXPECT_THROW(run_spectrum_convergence(w.cs, {}, 2, sweep({8, 16, 32})), ProblemError);
  const Preset h = make_preset("harmonic1d");
  EXPECT_THROW(run_spectrum_convergence(h.cs, {}, 11, sweep({8, 16, 32})), ProblemError);
  EXPECT_THROW(run_spectrum_convergence(h.cs, {}, 0, sweep({8, 16, 32})), ProblemError);
}

TEST(HomogenizedSpectrum, SecondOrderInTheGrid) {
  const Preset p = make_preset("lowerorder1d");
  std::vector<double> lam;
  for (int n : {64, 128, 256}) {
    const TorusGrid g(1, kTwoPi, n);
    const HomogenizedCoefficients hc = homogenize(p.cs, n, CellGrid(1, 64));
    const auto ev =
        lowest_eigenvalues(assemble_H_0(hc, p.cs.bstruct, g), identity_operator(g, 1), 2);
    lam.push_back(ev[1]);
  }
  const double d1 = std::abs(lam[0] - lam[1]);
  const double d2 = std::abs(lam[1] - lam[2]);
  EXPECT_GT(d1 / d2, 3.0);
  EXPECT_LT(d1 / d2, 5.0);
}
