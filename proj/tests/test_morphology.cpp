#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "maskbench/mask_params.hpp"
#include "maskbench/morphology.hpp"
#include "maskbench/units.hpp"
#include "support/gen.hpp"

using namespace maskbench;
using morphology::DbGrid;
using morphology::mask_rmse;

namespace {

// Independent oracle: plain-formula gains and a separately written trapezoid.
double oracle_gain_cm(double g, double mu_db, double db) { return 1.0 / (1.0 + std::pow(10.0, g * (mu_db - db) / 10.0)); }
double oracle_gain_pw(double b, double eta_db, double db) {
  const double xi = std::pow(10.0, db / 10.0), eta = std::pow(10.0, eta_db / 10.0);
  return std::pow(xi / (xi + eta), b);
}
double oracle_gain_wf(double db) { return oracle_gain_cm(1.0, 0.0, db); }
double oracle_gain_bm(double mu0_db, double db) { return db >= mu0_db ? 1.0 : 0.0; }

template <typename A, typename B>
double oracle_rmse(A a, B b, double lo, double hi, double step) {
  const long n = std::lround((hi - lo) / step);
  double acc = 0.0;
  double prev = std::pow(a(lo) - b(lo), 2);
  for (long i = 1; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double cur = std::pow(a(x) - b(x), 2);
    acc += 0.5 * (prev + cur) * step;
    prev = cur;
  }
  return std::sqrt(acc);
}

const DbGrid kCoarse{-60.0, 60.0, 0.01};

}  // namespace

TEST(MaskRmse, ZeroOnIdenticalCurves) {
  for (const MaskParams& p : std::vector<MaskParams>{rule::Wiener{}, rule::Binary{2.0}, rule::Conformable{3.0, 0.1},
                                                     rule::ParametricWiener{0.4, 10.0}}) {
    EXPECT_EQ(mask_rmse(p, p), 0.0) << mask_name(p);
  }
}

TEST(MaskRmse, MatchesIndependentOracle) {
  const double lib = mask_rmse(rule::Conformable{0.5, db_to_linear(5.0)}, rule::ParametricWiener{0.305, db_to_linear(15.9)});
  const double ref = oracle_rmse([](double d) { return oracle_gain_cm(0.5, 5.0, d); },
                                 [](double d) { return oracle_gain_pw(0.305, 15.9, d); }, -60, 60, 0.001);
  EXPECT_NEAR(lib, ref, 1e-6 * ref);
  const double wf_bm = mask_rmse(rule::Wiener{}, rule::Binary{1.0});
  const double wf_bm_ref = oracle_rmse(oracle_gain_wf, [](double d) { return oracle_gain_bm(0.0, d); }, -60, 60, 0.001);
  EXPECT_NEAR(wf_bm, wf_bm_ref, 1e-6 * wf_bm_ref);
}

TEST(MaskRmse, GridMismatchThrows) {
  EXPECT_THROW(mask_rmse(morphology::CurveSpec{rule::Wiener{}, {-60, 60, 0.01}},
                         morphology::CurveSpec{rule::Wiener{}, {-60, 60, 0.001}}),
               Error);
  EXPECT_THROW(mask_rmse(rule::Wiener{}, rule::Wiener{}, DbGrid{10, -10, 1}), Error);
}

TEST(MaskRmse, SteepConformableApproachesBinary) {
  const double wf = mask_rmse(rule::Wiener{}, rule::Binary{1.0});
  const double r100 = mask_rmse(rule::Conformable{100.0, 1.0}, rule::Binary{1.0}) / wf;
  const double r1000 = mask_rmse(rule::Conformable{1000.0, 1.0}, rule::Binary{1.0}) / wf;
  EXPECT_GE(r100, 0.08);
  EXPECT_LE(r100, 0.12);
  EXPECT_GE(r1000, 0.02);
  EXPECT_LE(r1000, 0.04);
}

TEST(MaskRmse, SteepMaskPairValue) {
  const double r = mask_rmse(rule::Conformable{100.0, db_to_linear(-10.0)},
                             rule::ParametricWiener{1.25e3, db_to_linear(-42.6)});
  EXPECT_NEAR(r, 1.07, 0.05);
}

// The half-slope pair quoted with the 0.79 figure measures about 0.291 here;
// the value is pinned against the independent oracle above and tracked in
// the acceptance report.
TEST(MaskRmse, HalfSlopePairValue) {
  const double r = mask_rmse(rule::Conformable{0.5, db_to_linear(5.0)}, rule::ParametricWiener{0.305, db_to_linear(15.9)});
  EXPECT_NEAR(r, 0.2913, 0.001);
}

TEST(MaskRmse, PseudometricProperty) {
  gen::for_all(51, 20, [](gen::Rng& r) {
    auto random_mask = [&]() -> MaskParams {
      switch (r.integer(0, 3)) {
        case 0: return rule::Conformable{r.log_uniform(0.5, 100.0), db_to_linear(r.uniform(-30, 30))};
        case 1: return rule::ParametricWiener{r.log_uniform(0.2, 40.0), db_to_linear(r.uniform(-30, 30))};
        case 2: return rule::Binary{db_to_linear(r.uniform(-30, 30))};
        default: return rule::Wiener{};
      }
    };
    const auto a = random_mask(), b = random_mask(), c = random_mask();
    const double ab = mask_rmse(a, b, kCoarse), ba = mask_rmse(b, a, kCoarse);
    EXPECT_EQ(ab, ba);
    EXPECT_LE(ab, mask_rmse(a, c, kCoarse) + mask_rmse(c, b, kCoarse) + 1e-12);
  });
}

TEST(MaskRmse, StepRefinementConverges) {
  gen::for_all(52, 10, [](gen::Rng& r) {
    const MaskParams a = rule::Conformable{r.log_uniform(0.5, 10.0), db_to_linear(r.uniform(-20, 20))};
    const MaskParams b = rule::ParametricWiener{r.log_uniform(0.2, 5.0), db_to_linear(r.uniform(-20, 20))};
    const double fine = mask_rmse(a, b);
    const double coarse = mask_rmse(a, b, kCoarse);
    EXPECT_LT(std::abs(coarse - fine), 1e-3 * fine);
  });
}

TEST(MaskRmse, ConstrainedWienerLimitDiverges) {
  // CM(0.5, mu) does not tend to sqrt(xi/(xi+1)) as mu -> 0; the distance grows instead.
  const MaskParams cw = rule::ConstrainedWiener{};
  double prev = 0.0;
  for (double mu_db : {-5.0, -10.0, -20.0, -40.0, -60.0}) {
    const double r = mask_rmse(rule::Conformable{0.5, db_to_linear(mu_db)}, cw, kCoarse);
    EXPECT_GT(r, prev) << mu_db;
    prev = r;
  }
  EXPECT_LT(mask_rmse(rule::Conformable{0.5, db_to_linear(-5.0)}, cw, kCoarse), 0.55);
}

TEST(CurveDump, WienerRows) {
  const auto rows = morphology::curve_dump({rule::Wiener{}, {}}, 1.0);
  ASSERT_EQ(rows.size(), 121u);
  EXPECT_EQ(rows[60].xi_db, 0.0);
  EXPECT_EQ(rows[60].gain, 0.5);
  const auto tsv = morphology::curve_tsv(rows);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "xi_db\tgain");
}

TEST(CurveDump, LateralDisplacement) {
  const auto rows = morphology::curve_dump({rule::Conformable{1.0, db_to_linear(-5.0)}, {}}, 1.0);
  EXPECT_EQ(rows[55].xi_db, -5.0);
  EXPECT_NEAR(rows[55].gain, 0.5, 1e-15);
}

TEST(CurveDump, BinaryStep) {
  for (const auto& row : morphology::curve_dump({rule::Binary{1.0}, {}}, 1.0)) {
    EXPECT_EQ(row.gain, row.xi_db >= 0.0 ? 1.0 : 0.0) << row.xi_db;
  }
}

TEST(Fit, WienerTargetsAreRecovered) {
  const auto pw = morphology::fit_pw_to_cm(rule::Conformable{1.0, 1.0}, rule::ParametricWiener{0.5, 3.0});
  EXPECT_NEAR(pw.params.beta, 1.0, 1e-3);
  EXPECT_NEAR(linear_to_db(pw.params.eta), 0.0, 1e-2);
  EXPECT_LT(pw.rmse, 1e-3);
  const auto cm = morphology::fit_cm_to_pw(rule::ParametricWiener{1.0, 1.0}, rule::Conformable{3.0, 5.0});
  EXPECT_NEAR(cm.params.gamma, 1.0, 1e-3);
  EXPECT_NEAR(linear_to_db(cm.params.mu), 0.0, 1e-2);
  EXPECT_LT(cm.rmse, 1e-3);
}

TEST(Fit, HalfSlopeTarget) {
  const auto r = morphology::fit_pw_to_cm(rule::Conformable{0.5, db_to_linear(5.0)}, rule::ParametricWiener{});
  EXPECT_NEAR(r.rmse, 0.2913, 0.005);
  EXPECT_NEAR(r.params.beta, 0.305, 0.01);
  EXPECT_NEAR(linear_to_db(r.params.eta), 15.9, 0.3);
  // reported rmse is the rmse of the reported parameters
  EXPECT_NEAR(r.rmse, mask_rmse(rule::Conformable{0.5, db_to_linear(5.0)}, r.params), 1e-12);
}

TEST(Fit, HardTargetNotApproximable) {
  const auto r = morphology::fit_pw_to_cm(rule::Conformable{100.0, db_to_linear(-10.0)}, rule::ParametricWiener{});
  EXPECT_GE(r.rmse, 0.9);
}

TEST(Fit, CmBeatsWienerOnSteepPw) {
  const rule::ParametricWiener target{10.0, 1.0};
  const auto r = morphology::fit_cm_to_pw(target, rule::Conformable{});
  EXPECT_LT(r.rmse, mask_rmse(rule::Wiener{}, target));
}

TEST(Fit, PwNeverWorseThanWienerProperty) {
  morphology::FitOptions opt;
  opt.grid = kCoarse;
  gen::for_all(53, 6, [&](gen::Rng& r) {
    const rule::Conformable target{r.log_uniform(0.5, 50.0), db_to_linear(r.uniform(-30, 30))};
    const auto fit = morphology::fit_pw_to_cm(target, rule::ParametricWiener{}, opt);
    EXPECT_LE(fit.rmse, mask_rmse(rule::Wiener{}, target, kCoarse) + 1e-12);
  });
}

TEST(Fit, ReportsConvergenceFlag) {
  morphology::FitOptions opt;
  opt.grid = kCoarse;
  opt.max_iterations = 2;
  const auto r = morphology::fit_cm_to_pw(rule::ParametricWiener{3.0, 2.0}, rule::Conformable{}, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isfinite(r.rmse));
}
