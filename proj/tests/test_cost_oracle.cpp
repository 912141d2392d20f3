#include <cmath>

#include <gtest/gtest.h>

#include "maskbench/cost.hpp"
#include "maskbench/golden_section.hpp"
#include "maskbench/mask_params.hpp"
#include "maskbench/nelder_mead.hpp"
#include "maskbench/optimum.hpp"
#include "support/gen.hpp"

using namespace maskbench;

TEST(Distortions, Endpoints) {
  auto d = distortions(1.0, 3.0, 2.0);
  EXPECT_EQ(d.d_x, 0.0);
  EXPECT_EQ(d.d_v, 2.0);
  d = distortions(0.0, 3.0, 2.0);
  EXPECT_EQ(d.d_x, 3.0);
  EXPECT_EQ(d.d_v, 0.0);
  d = distortions(0.5, 1.0, 1.0);
  EXPECT_EQ(d.d_x, 0.25);
  EXPECT_EQ(d.d_v, 0.25);
}

TEST(Cost, Examples) {
  EXPECT_EQ(cost(0.5, 1.0, 1.0, {1.0, 1.0}), 0.5);
  EXPECT_EQ(cost(1.0, 5.0, 2.0, {3.0, 1.0}), 6.0);
  gen::for_all(41, 50, [](gen::Rng& r) {
    const double h = r.uniform(0, 1), sx = r.log_uniform(1e-3, 1e3), sv = r.log_uniform(1e-3, 1e3);
    EXPECT_NEAR(cost(h, sx, sv, {1.0, 1.0}), (h - 1) * (h - 1) * sx + h * h * sv, 1e-12 * (sx + sv));
  });
}

TEST(CostParams, Validation) {
  EXPECT_THROW((CostParams{0.0, 1.0}.validate()), Error);
  EXPECT_THROW((CostParams{1.0, 0.5}.validate()), Error);
  EXPECT_NO_THROW((CostParams{1.0, 0.51}.validate()));
}

TEST(Cost, ConvexOnRealSegment) {
  gen::for_all(42, 500, [](gen::Rng& r) {
    const CostParams p{r.log_uniform(0.1, 10.0), r.uniform(0.51, 20.0)};
    const double sx = r.log_uniform(1e-2, 1e2), sv = r.log_uniform(1e-2, 1e2);
    const double s = std::max(sx, sv);
    const double h1 = r.uniform(0, 1), h2 = r.uniform(0, 1);
    const double mid = cost(0.5 * (h1 + h2), sx / s, sv / s, p);
    EXPECT_LE(mid, 0.5 * (cost(h1, sx / s, sv / s, p) + cost(h2, sx / s, sv / s, p)) + 1e-12);
  });
}

TEST(Cost, ScalingProperty) {
  gen::for_all(43, 100, [](gen::Rng& r) {
    const CostParams p{r.log_uniform(0.1, 10.0), r.uniform(0.6, 5.0)};
    const double sx = r.log_uniform(0.1, 10.0), sv = r.log_uniform(0.1, 10.0), c = r.log_uniform(0.01, 100.0);
    const double h = r.uniform(0, 1);
    EXPECT_NEAR(cost(h, c * sx, c * sv, p), std::pow(c, p.alpha) * cost(h, sx, sv, p),
                1e-10 * std::pow(c, p.alpha) * cost(h, sx, sv, p));
    EXPECT_NEAR(argmin_numeric(c * sx, c * sv, p), argmin_numeric(sx, sv, p), 1e-8);
  });
}

TEST(GoldenSection, FindsParabolaMinimum) {
  const auto m = optim::golden_section([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
  EXPECT_NEAR(m.x, 0.3, 1e-9);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const optim::Point<2>& p) { return 100 * std::pow(p[1] - p[0] * p[0], 2) + std::pow(1 - p[0], 2); };
  optim::NelderMeadOptions<2> opt;
  opt.max_iterations = 2000;
  opt.diameter_tolerance = 1e-10;
  opt.initial_step = {0.5, 0.5};
  const auto r = optim::nelder_mead<2>(f, {-1.2, 1.0}, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(NelderMead, ReportsNonConvergence) {
  auto f = [](const optim::Point<2>& p) { return p[0] * p[0] + p[1] * p[1]; };
  optim::NelderMeadOptions<2> opt;
  opt.max_iterations = 3;
  opt.initial_step = {1.0, 1.0};
  const auto r = optim::nelder_mead<2>(f, {5.0, 5.0}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.value, 50.0);
}

// Function-value comparisons resolve a quadratic minimum only to about
// sqrt(machine epsilon), so examples use tol = 1e-7.
TEST(ArgminNumeric, Examples) {
  const double tol = 1e-7;
  EXPECT_NEAR(argmin_numeric(1.0, 1.0, {1.0, 1.0}, tol), 0.5, tol);
  EXPECT_NEAR(argmin_numeric(3.0, 1.0, {1.0, 1.0}, tol), 0.75, tol);
  const double g = 5.0 / 9.0;
  EXPECT_NEAR(argmin_numeric(2.0, 1.0, {1.0, 5.0}, tol), std::pow(2.0, g) / (std::pow(2.0, g) + 1.0), tol);
  EXPECT_NEAR(argmin_numeric(1.0, 1.0, {1.0, 0.6}, tol), 0.5, tol);
}

TEST(ArgminNumeric, Degenerate) {
  EXPECT_EQ(argmin_numeric(0.0, 0.0, {1.0, 1.0}), 1.0);
  EXPECT_THROW(argmin_numeric(-1.0, 1.0, {1.0, 1.0}), Error);
  EXPECT_THROW(argmin_numeric(1.0, 0.0, {1.0, 1.0}), Error);
}

TEST(ArgminNumeric, MatchesClosedFormProperty) {
  gen::for_all(44, 300, [](gen::Rng& r) {
    const CostParams p{r.log_uniform(0.1, 10.0), r.uniform(0.55, 20.0)};
    const double xi = r.log_uniform(1e-3, 1e3);
    EXPECT_NEAR(argmin_numeric(xi, 1.0, p), gain(cm_from_cost(p), xi), 1e-6)
        << "rho=" << p.rho << " alpha=" << p.alpha << " xi=" << xi;
  });
}

TEST(ComplexScan, OptimumIsReal) {
  for (double xi : {0.1, 1.0, 10.0}) {
    for (double alpha : {0.6, 1.0, 3.0}) {
      const auto s = scan_complex(xi, 1.0, {1.0, alpha});
      const double step = 2.0 * M_PI / 360.0;
      EXPECT_LE(std::abs(std::arg(s.h)), step) << xi << " " << alpha;
      EXPECT_NEAR(std::abs(s.h), argmin_numeric(xi, 1.0, {1.0, alpha}), 1.5 / 600 + 1e-9);
    }
  }
}

TEST(VerifyOptimum, DefaultGridPasses) {
  const auto rep = verify_optimum(VerificationGrid::standard(), 1e-6);
  EXPECT_EQ(rep.rows.size(), 21u * 3u * 5u);
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_LT(rep.max_deviation, 1e-6);
  EXPECT_EQ(rep.to_csv().substr(0, rep.to_csv().find('\n')), "xi_db,rho,alpha,h_closed,h_numeric,abs_dev,pass");
}

TEST(VerifyOptimum, SingleTupleZeroDeviation) {
  const auto rep = verify_optimum({{0.0}, {1.0}, {1.0}}, 1e-6);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_LT(rep.rows[0].abs_dev, 1e-6);
  EXPECT_TRUE(rep.rows[0].pass);
}

TEST(VerifyOptimum, ReportsFailuresWithoutThrowing) {
  const auto rep = verify_optimum(VerificationGrid::standard(), 1e-30);
  EXPECT_GT(rep.failures, 0u);
}
