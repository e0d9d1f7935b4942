#include <gtest/gtest.h>

#include <cmath>

#include "riskaverse/lemmas.hpp"

using namespace riskaverse;

namespace {

const auto kUniform = Distribution::uniform(0, 1);

MonteCarloOptions mc(std::size_t samples, std::uint64_t seed = 42) {
  MonteCarloOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

// Pr[Binomial(n, x) >= t] by direct summation.
double tail_ge(int n, double x, int t) {
  double s = 0;
  for (int j = t; j <= n; ++j) {
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)) * std::pow(x, j) *
         std::pow(1 - x, n - j);
  }
  return s;
}

// E[t-th largest of n] for a piecewise-linear revenue curve, segment by
// segment: on R = a + b q the value is a/q + b, and
// int f_{t,n}(q)/q dq = n/(t-1) * dPr[Q_{t-1,n-1} <= q].
double curve_order_mean(const RevenueCurve& c, int t, int n) {
  const auto& pts = c.points();
  double total = 0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const double q0 = pts[j].q, q1 = pts[j + 1].q;
    const double b = (pts[j + 1].revenue - pts[j].revenue) / (q1 - q0);
    const double a = pts[j].revenue - b * q0;
    total += b * (tail_ge(n, q1, t) - tail_ge(n, q0, t));
    total += a * n / (t - 1.0) * (tail_ge(n - 1, q1, t - 1) - tail_ge(n - 1, q0, t - 1));
  }
  return total;
}

}  // namespace

TEST(GenRegular, RegularDeterministicAndAnchored) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto d = gen_regular(seed, 2 + seed % 63);
    ASSERT_TRUE(is_regular(d)) << d.name();
    ASSERT_NE(d.curve(), nullptr);
    EXPECT_EQ(d.curve()->points().front().q, 0.0);
    EXPECT_EQ(d.curve()->points().back().q, 1.0);
    EXPECT_EQ(d.name(), gen_regular(seed, 2 + seed % 63).name());
  }
  EXPECT_NE(gen_regular(1, 5).name(), gen_regular(2, 5).name());
  EXPECT_THROW(gen_regular(1, 1), std::invalid_argument);
  EXPECT_THROW(gen_regular(1, 65), std::invalid_argument);
}

TEST(HalfBound, Examples) {
  auto r = check_half_bound(kUniform);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.observed, 0.75, 1e-9);
  EXPECT_NEAR(r.margin, 0.25, 1e-9);
  EXPECT_NEAR(check_half_bound(Distribution::exponential(1)).observed, std::exp(-1 / M_E), 1e-9);
  for (double eps : {0.1, 0.01, 0.001}) {
    r = check_half_bound(Distribution::left_triangle(eps));
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.margin, 1 / (2 - eps) - 0.5, 1e-12);
  }
  EXPECT_THROW(check_half_bound(Distribution::irregular_example(0.01)), std::invalid_argument);
}

TEST(HalfBound, HoldsOnRandomRegularCurves) {
  for (std::uint64_t j = 0; j < 1000; ++j) {
    const auto r = check_half_bound(gen_regular(j * 7919 + 3, 2 + j % 16));
    ASSERT_TRUE(r.passed) << r.worst_instance;
  }
}

TEST(MhrBound, Examples) {
  auto r = check_mhr_bound(Distribution::exponential(1));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.margin, 0.0, 1e-9);
  EXPECT_NEAR(check_mhr_bound(Distribution::exponential(2)).observed, kMhrBound, 1e-9);
  EXPECT_NEAR(check_mhr_bound(kUniform).observed, 0.75, 1e-9);
  EXPECT_THROW(check_mhr_bound(Distribution::left_triangle(0.01)), std::invalid_argument);
}

TEST(CappedBinomial, Examples) {
  auto r = check_capped_binomial(1, 0.5, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.observed, 0.25, 1e-15);
  r = check_capped_binomial(2, 0.5, 1);
  EXPECT_NEAR(r.observed, 0.75, 1e-15);
  EXPECT_THROW(check_capped_binomial(2, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(check_capped_binomial(2, 0.5, 0), std::invalid_argument);
}

TEST(CappedBinomial, Exhaustive) {
  const auto r = check_capped_binomial_exhaustive();
  EXPECT_TRUE(r.passed) << r.worst_instance;
  EXPECT_GT(r.instances_checked, 100000u);
}

TEST(AllocationProbability, ExhaustiveExact) {
  const auto r = check_allocation_probability_exhaustive();
  EXPECT_TRUE(r.passed) << r.worst_instance;
  EXPECT_EQ(r.instances_checked, 11u * (60 * 61 / 2));
  EXPECT_EQ(r.margin, 0.0);  // q_r = 1/2 with k = n sits on the lower bound
}

TEST(Tail, Examples) {
  const auto r = check_tail(kUniform, 2, 2);
  EXPECT_NEAR(r.observed, 4.0 / 9.0, 1e-9);
  EXPECT_NEAR(expected_order_statistic(kUniform, 2, 2), 1.0 / 3.0, 1e-10);
  const auto near_linear = check_tail(Distribution::left_triangle(1e-4), 2, 2);
  EXPECT_TRUE(near_linear.passed);
  EXPECT_GE(near_linear.observed, 0.25);
  EXPECT_LE(near_linear.observed, 0.26);
  EXPECT_THROW(check_tail(kUniform, 1, 3), std::invalid_argument);
}

TEST(Tail, UniformAgreesWithBetaMeans) {
  for (int n = 2; n <= 20; ++n) {
    for (int t = 2; t <= n; ++t) {
      const double mean = 1.0 - static_cast<double>(t) / (n + 1);
      EXPECT_NEAR(expected_order_statistic(kUniform, t, n), mean, 1e-9);
      const auto r = check_tail(kUniform, t, n);
      EXPECT_NEAR(r.observed, tail_ge(n, 1 - mean, t), 1e-9);
      EXPECT_TRUE(r.passed);
    }
  }
}

TEST(Tail, RandomCurvesMatchSegmentOracle) {
  for (std::uint64_t j = 0; j < 200; ++j) {
    const auto d = gen_regular(j + 5000, 2 + j % 16);
    const int n = 2 + static_cast<int>(j % 19);
    const int t = 2 + static_cast<int>((7 * j) % (n - 1));
    const double ref = curve_order_mean(*d.curve(), t, n);
    ASSERT_NEAR(expected_order_statistic(d, t, n), ref, 1e-8 * std::max(1.0, ref)) << d.name();
    const auto r = check_tail(d, t, n);
    ASSERT_TRUE(r.passed) << r.worst_instance;
    // E[Y] sits within rounding of a heavy top atom on some draws.
    ASSERT_NEAR(r.observed, tail_ge(n, d.sale_prob(std::min(ref, d.support_hi())), t), 1e-6);
  }
}

TEST(VcgDiscount, Examples) {
  EXPECT_TRUE(check_vcg_discount(kUniform, 3, 1, mc(100000)).passed);
  const auto two = check_vcg_discount(kUniform, 2, 2, mc(100000));
  EXPECT_TRUE(two.passed);
  // k = n: both sides are posted prices, 2 * 0.25 * 0.75 against 2 * 0.5 * 0.5.
  EXPECT_NEAR(two.observed, 0.375, 1e-12);
  EXPECT_NEAR(two.claimed_bound, 0.25, 1e-12);
  EXPECT_TRUE(check_vcg_discount(Distribution::exponential(1), 5, 2, mc(200000)).passed);
}

TEST(HedgeUnlimited, Examples) {
  const auto fam = UtilityFamily::default_family();
  auto r = check_hedge_unlimited(kUniform, 5, fam);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.observed, 0.75 - 1e-12);
  r = check_hedge_unlimited(Distribution::exponential(1), 5, fam);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.observed, kMhrBound - 1e-9);
  r = check_hedge_unlimited(Distribution::left_triangle(0.001), 1,
                            UtilityFamily{{UtilityFunction::linear(), UtilityFunction::capped(1e-5)}});
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.observed, 0.5, 1e-3);
}

TEST(HedgeLimited, Examples) {
  const auto fam = UtilityFamily::default_family();
  EXPECT_TRUE(check_hedge_limited(kUniform, 2, 1, fam, mc(100000)).passed);
  EXPECT_TRUE(check_hedge_limited(kUniform, 10, 3, fam, mc(100000)).passed);
  EXPECT_TRUE(check_hedge_limited(Distribution::exponential(1), 8, 2, fam, mc(100000)).passed);
  EXPECT_THROW(check_hedge_limited(kUniform, 2, 2, fam, mc(100000)), std::invalid_argument);
}

TEST(VcgTheorems, Examples) {
  const UtilityFamily lin{{UtilityFunction::linear()}};
  const auto r = check_vcg_theorems(kUniform, 2, 1, lin, mc(100000));
  EXPECT_TRUE(r.passed) << r.worst_instance;
  // Closed forms behind the n = 2 Vickrey line: 1/3 against (1/2)(5/12).
  EXPECT_NEAR(eval_second_price_exact(kUniform, 0.0, 2, UtilityFunction::linear()).mean_utility, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(eval_second_price_exact(kUniform, 0.5, 2, UtilityFunction::linear()).mean_utility, 5.0 / 12.0, 1e-12);
  EXPECT_TRUE(check_vcg_theorems(kUniform, 4, 1, UtilityFamily{{UtilityFunction::power(0.5)}}, mc(100000)).passed);
  EXPECT_TRUE(check_vcg_theorems(kUniform, 6, 2, UtilityFamily::default_family(), mc(100000)).passed);
}

TEST(Frontier, Examples) {
  const UtilityFamily two{{UtilityFunction::linear(), UtilityFunction::capped(1e-4)}};
  auto f = frontier_search(kUniform, two, 1000);
  EXPECT_NEAR(f.best_price, 0.25, 1e-3);
  EXPECT_NEAR(f.best_min_ratio, 0.75, 1e-4);
  EXPECT_EQ(f.table.size(), 1000u);
  EXPECT_EQ(f.utilities, (std::vector<std::string>{"linear", "capped:0.0001"}));
  f = frontier_search(Distribution::left_triangle(0.01), two, 1000);
  EXPECT_NEAR(f.best_min_ratio, 1 / (2 - 0.01), 1e-4);
  EXPECT_NEAR(f.best_price, 1.0, 1e-2);
  EXPECT_LE(frontier_search(Distribution::irregular_example(0.01), two, 1000).best_min_ratio, 0.05);
}

TEST(Frontier, BoundedByHalfAndDiscountedSaleProbability) {
  const UtilityFamily two{{UtilityFunction::linear(), UtilityFunction::capped(1e-5)}};
  for (std::uint64_t j = 0; j < 40; ++j) {
    const auto d = gen_regular(j + 100, 2 + j % 10);
    const auto f = frontier_search(d, two, 500);
    EXPECT_GE(f.best_min_ratio, 0.5 - 1e-6) << d.name();
    EXPECT_LE(f.best_min_ratio, d.sale_prob(hedge_unlimited_price(d)) + 1.0 / 500 + 1e-6) << d.name();
  }
}
