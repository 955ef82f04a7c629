#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wedgecap/contact_profile.hpp"
#include "wedgecap/error.hpp"
#include "wedgecap/fan_functionals.hpp"

using namespace wedgecap;

namespace {

constexpr double kPi = std::numbers::pi;
const double kG1 = kPi / 3;
const double kG2 = 2 * kPi / 3;

double e2_ai(double g1, double g2, double b) { return b * (std::cos(g1) / 3 + 2 * std::cos(g2) / 3); }
double e2_as(double g1, double g2, double b) { return b * (2 * std::cos(g1) / 3 + std::cos(g2) / 3); }

// gamma = 0 on (4^{-n-1}, 2 * 4^{-n-1}] and pi on (2 * 4^{-n-1}, 4^{-n}].
ContactProfile two_block_profile(int depth) {
  std::vector<double> breaks;
  std::vector<double> values;
  for (int n = depth; n >= 0; --n) {
    const double q = std::pow(4.0, -n - 1);
    breaks.push_back(2 * q);
    values.push_back(0.0);
    breaks.push_back(4 * q);
    values.push_back(kPi);
  }
  return make_piecewise(Side::Plus, breaks, values, 1.0);
}

// Integral of cos(gamma) for the infinite two-block pattern on one period:
// I(x) = x - 1/3 on (1/4, 1/2], 2/3 - x on (1/2, 1].
double two_block_mean(double x) { return (x <= 0.5 ? x - 1.0 / 3.0 : 2.0 / 3.0 - x) / x; }

}  // namespace

TEST(SweepConfig, DefaultsAndGrid) {
  const auto p = constant_profile(1.0, 2.0);
  const auto cfg = SweepConfig::defaults_for(p, 0.5);
  EXPECT_DOUBLE_EQ(cfg.eps_hi, 4.0);
  EXPECT_EQ(cfg.eps_lo, 1e-10);
  EXPECT_EQ(cfg.points_per_decade, 64);
  const auto grid = cfg.grid();
  EXPECT_EQ(grid.front(), 4.0);
  EXPECT_GE(grid.back(), 1e-10);
  EXPECT_LT(grid.back() / std::pow(10.0, 1.0 / 64), 1e-10);
  for (std::size_t k = 1; k < grid.size(); ++k) EXPECT_NEAR(grid[k - 1] / grid[k], std::pow(10.0, 1.0 / 64), 1e-12);
  EXPECT_NEAR(cfg.relative_spacing(), std::pow(10.0, 1.0 / 64) - 1, 1e-15);

  SweepConfig bad = cfg;
  bad.points_per_decade = 4;
  EXPECT_THROW(bad.validate(p, 0.5), Error);
  bad = cfg;
  bad.eps_hi = 5.0;
  EXPECT_THROW(bad.validate(p, 0.5), Error);
  bad = cfg;
  bad.eps_lo = 10.0;
  EXPECT_THROW(bad.validate(p, 0.5), Error);
}

TEST(Estimates, ConstantProfileIsExactAtEveryScale) {
  for (double g : {0.0, 0.3, kPi / 2, 2.0, kPi}) {
    const auto p = constant_profile(g);
    for (double b : {0.1, 0.5, 0.9}) {
      const auto cfg = SweepConfig::defaults_for(p, b);
      const auto ai = estimate_AI(p, b, cfg);
      const auto as = estimate_AS(p, b, cfg);
      EXPECT_NEAR(ai.value, b * std::cos(g), 1e-15);
      EXPECT_NEAR(as.value, b * std::cos(g), 1e-15);
      EXPECT_EQ(ai.kind, AdhesionKind::I);
      EXPECT_EQ(as.kind, AdhesionKind::S);
      EXPECT_EQ(ai.method, EstimateMethod::Sweep);
      EXPECT_NEAR(ai.uncertainty, b * cfg.relative_spacing(), 1e-15);
    }
  }
}

TEST(Estimates, Example1SweepNearClosedForm) {
  const auto p = example1_profile(kG1, kG2, 8);
  for (double b : {0.25, 0.5, 0.75}) {
    const auto cfg = SweepConfig::defaults_for(p, b);
    EXPECT_NEAR(estimate_AI(p, b, cfg).value, b * std::cos(kG2), 0.05 * b);
    EXPECT_NEAR(estimate_AS(p, b, cfg).value, b * std::cos(kG1), 0.05 * b);
  }
}

TEST(Estimates, Example2SweepNearClosedForm) {
  const auto p = example2_profile(kG1, kG2, 24);
  const double b = 0.5;
  const auto cfg = SweepConfig::defaults_for(p, b);
  EXPECT_NEAR(estimate_AI(p, b, cfg).value, -1.0 / 12.0, 1e-3);
  EXPECT_NEAR(estimate_AS(p, b, cfg).value, 1.0 / 12.0, 1e-3);
}

TEST(Estimates, RefinementIsMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const auto p = (k % 2 == 0) ? example1_profile(kPi * u(rng), kPi * u(rng), 6)
                                : example2_profile(kPi * u(rng), kPi * u(rng), 16);
    const double b = 0.05 + 0.9 * u(rng);
    auto coarse = SweepConfig::defaults_for(p, b, 1e-6, 16);
    auto fine = coarse;
    fine.eps_lo = coarse.eps_lo / 2;
    fine.points_per_decade = 2 * coarse.points_per_decade;
    EXPECT_LE(estimate_AI(p, b, fine).value, estimate_AI(p, b, coarse).value);
    EXPECT_GE(estimate_AS(p, b, fine).value, estimate_AS(p, b, coarse).value);
  }
}

TEST(Estimates, EssentialSandwich) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const double g1 = kPi * u(rng);
    const double g2 = kPi * u(rng);
    const auto p = (k % 2 == 0) ? example1_profile(g1, g2, 7) : example2_profile(g1, g2, 20);
    const auto ess = essential_range(p);
    const double b = 0.05 + 0.9 * u(rng);
    const auto cfg = SweepConfig::defaults_for(p, b, 1e-8, 32);
    const double ai = estimate_AI(p, b, cfg).value;
    const double as = estimate_AS(p, b, cfg).value;
    EXPECT_LE(b * std::cos(ess.ess_limsup), ai + 1e-15);
    EXPECT_LE(ai, as);
    EXPECT_LE(as, b * std::cos(ess.ess_liminf) + 1e-15);
    if (k % 2 == 1) {
      const auto [xi, xs] = exact_A_log_periodic(p, b, 4.0);
      EXPECT_LE(b * std::cos(ess.ess_limsup), xi.value + 1e-15);
      EXPECT_LE(xi.value, xs.value);
      EXPECT_LE(xs.value, b * std::cos(ess.ess_liminf) + 1e-15);
    }
  }
}

TEST(LogPeriodic, Example2ClosedForms) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double g1 = kPi * u(rng);
    const double g2 = kPi * u(rng);
    const double b = 0.02 + 1.5 * u(rng);
    const auto p = example2_profile(g1, g2, 24);
    const auto [ai, as] = exact_A_log_periodic(p, b, 4.0);
    // The closed forms assume cos(g1) >= cos(g2); otherwise the roles swap.
    const double lo = std::min(e2_ai(g1, g2, b), e2_as(g1, g2, b));
    const double hi = std::max(e2_ai(g1, g2, b), e2_as(g1, g2, b));
    EXPECT_NEAR(ai.value, lo, 1e-12);
    EXPECT_NEAR(as.value, hi, 1e-12);
    EXPECT_EQ(ai.method, EstimateMethod::LogPeriodicExact);
    EXPECT_EQ(ai.uncertainty, 0.0);
  }
}

TEST(LogPeriodic, ConstantIsTriviallyPeriodic) {
  const auto [ai, as] = exact_A_log_periodic(constant_profile(1.1), 0.4, 4.0);
  EXPECT_NEAR(ai.value, 0.4 * std::cos(1.1), 1e-15);
  EXPECT_NEAR(as.value, 0.4 * std::cos(1.1), 1e-15);
}

TEST(LogPeriodic, TwoBlockProfileAgainstDenseOffsetSweep) {
  const auto p = two_block_profile(25);
  const LogPeriodicStructure lp(p, 4.0);
  double lo = 1e300;
  double hi = -1e300;
  for (int k = 0; k < 10000; ++k) {
    const double x = std::pow(4.0, -k / 10000.0);
    lo = std::min(lo, two_block_mean(x));
    hi = std::max(hi, two_block_mean(x));
    // Pointwise agreement of the period function too.
    const double at = lp.period_top() * x;
    EXPECT_NEAR(lp.mean_cos(at), two_block_mean(x), 1e-9);
  }
  EXPECT_NEAR(lp.min_mean(), lo, 1e-9);
  EXPECT_NEAR(lp.max_mean(), hi, 1e-9);
  for (double b : {0.3, 0.7, 1.4}) {
    const auto [ai, as] = exact_A_log_periodic(p, b, 4.0);
    EXPECT_NEAR(ai.value, b * lo, 1e-9);
    EXPECT_NEAR(as.value, b * hi, 1e-9);
  }
}

TEST(LogPeriodic, RejectsNonSelfSimilar) {
  try {
    LogPeriodicStructure(example1_profile(0.5, 2.0, 6), 4.0);
    FAIL() << "expected NotSelfSimilar";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSelfSimilar);
  }
  EXPECT_THROW(LogPeriodicStructure(example2_profile(0.5, 2.0, 8), 1.0), Error);
}

TEST(LogPeriodic, SweepWithinStatedUncertainty) {
  for (double b : {0.2, 0.5, 0.8}) {
    const auto p = example2_profile(0.4, 2.5, 24);
    const auto cfg = SweepConfig::defaults_for(p, b);
    const auto [xi, xs] = exact_A_log_periodic(p, b, 4.0);
    const auto wi = estimate_AI(p, b, cfg);
    const auto ws = estimate_AS(p, b, cfg);
    EXPECT_LE(std::abs(wi.value - xi.value), wi.uncertainty);
    EXPECT_LE(std::abs(ws.value - xs.value), ws.uncertainty);
  }
}

TEST(Example1Exact, Values) {
  const auto [ai, as] = exact_A_example1(kG1, kG2, 0.5);
  EXPECT_NEAR(ai.value, -0.25, 1e-15);
  EXPECT_NEAR(as.value, 0.25, 1e-15);
  EXPECT_EQ(ai.method, EstimateMethod::SequenceExact);
  const auto [ei, es] = exact_A_example1(1.2, 1.2, 0.3);
  EXPECT_EQ(ei.value, 0.3 * std::cos(1.2));
  EXPECT_EQ(es.value, 0.3 * std::cos(1.2));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto [i, s] = exact_A_example1(kPi * u(rng), kPi * u(rng), u(rng) + 1e-3);
    EXPECT_LE(i.value, s.value);
  }
  EXPECT_THROW(exact_A_example1(-0.1, 1.0, 0.5), Error);
  EXPECT_THROW(exact_A_example1(0.1, 1.0, 0.0), Error);
}

TEST(SweepTable, MatchesDirectSweep) {
  const auto p = example1_profile(0.7, 2.2, 8);
  const SweepTable table(p, 1e-10, 64);
  for (double b : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const auto cfg = SweepConfig::defaults_for(p, b);
    EXPECT_NEAR(table.estimate(AdhesionKind::I, b).value, estimate_AI(p, b, cfg).value, 1e-15);
    EXPECT_NEAR(table.estimate(AdhesionKind::S, b).value, estimate_AS(p, b, cfg).value, 1e-15);
  }
}

TEST(SweepTable, HomogeneousForConstantProfile) {
  const auto p = constant_profile(0.9);
  const SweepTable table(p);
  const double ref = table.estimate(AdhesionKind::I, 0.5).value / 0.5;
  for (double b : {0.01, 0.2, 0.8, 1.5, 3.0}) {
    EXPECT_NEAR(table.estimate(AdhesionKind::I, b).value / b, ref, 1e-14);
    EXPECT_NEAR(table.estimate(AdhesionKind::S, b).value / b, ref, 1e-14);
  }
}
