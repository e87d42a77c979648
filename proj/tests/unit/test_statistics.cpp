#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <lrp/error.hpp>
#include <lrp/rng.hpp>
#include <lrp/statistics.hpp>

namespace {

TEST(Summary, KnownValues) {
  const std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  const auto s = lrp::summarize(v);
  EXPECT_EQ(s.count, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.variance, 32.0 / 7.0);
  EXPECT_DOUBLE_EQ(s.std_error, std::sqrt(32.0 / 7.0 / 8.0));
  EXPECT_DOUBLE_EQ(s.second_moment, 29.0);
  EXPECT_EQ(s.min, 2.0);
  EXPECT_EQ(s.max, 9.0);
  EXPECT_EQ(lrp::summarize({}).count, 0u);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{3.0, 1.0, 4.0, 1.0, 5.0};
  // Sorted: 1 1 3 4 5.
  EXPECT_DOUBLE_EQ(lrp::quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(lrp::quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(lrp::quantile(v, 0.6), 3.4);
  EXPECT_DOUBLE_EQ(lrp::quantile(v, 1.0), 5.0);
  EXPECT_THROW(lrp::quantile({}, 0.5), lrp::Error);
  EXPECT_THROW(lrp::quantile(v, 1.5), lrp::Error);
}

TEST(Accumulator, MergeOrderDoesNotMatter) {
  lrp::CounterRng rng(1, 1);
  std::vector<double> values(97);
  for (auto& x : values) x = std::exp(3.0 * rng.uniform());
  lrp::ReplicateAccumulator whole;
  for (std::size_t r = 0; r < values.size(); ++r) whole.add(r, values[r]);

  lrp::ReplicateAccumulator a, b, c;
  for (std::size_t r = 0; r < values.size(); ++r) (r % 3 == 0 ? a : (r % 3 == 1 ? b : c)).add(r, values[r]);
  lrp::ReplicateAccumulator abc, cba;
  abc.merge(a);
  abc.merge(b);
  abc.merge(c);
  cba.merge(c);
  cba.merge(b);
  cba.merge(a);
  EXPECT_EQ(abc, whole);
  EXPECT_EQ(cba, whole);
  const auto s1 = abc.summary(), s2 = cba.summary(), s3 = whole.summary();
  EXPECT_EQ(s1.mean, s3.mean);
  EXPECT_EQ(s2.variance, s3.variance);
  EXPECT_THROW(abc.merge(a), lrp::Error);
}

TEST(Intervals, NormalAndBootstrap) {
  const auto ci = lrp::normal_ci95(10.0, 1.0);
  EXPECT_NEAR(ci.lo, 8.040036015459946, 1e-12);
  EXPECT_NEAR(ci.hi, 11.959963984540054, 1e-12);
  EXPECT_TRUE(ci.contains(10.0));

  const std::vector<std::vector<double>> groups{{1, 2, 3, 4, 5, 6, 7, 8}, {2, 2, 3, 3}};
  const lrp::GroupStatistic ratio = [](std::span<const std::vector<double>> g) {
    return std::accumulate(g[0].begin(), g[0].end(), 0.0) / double(g[0].size()) /
           (std::accumulate(g[1].begin(), g[1].end(), 0.0) / double(g[1].size()));
  };
  const auto b1 = lrp::bootstrap_ci(groups, ratio, 1000, 5);
  const auto b2 = lrp::bootstrap_ci(groups, ratio, 1000, 5);
  EXPECT_EQ(b1.lo, b2.lo);
  EXPECT_EQ(b1.hi, b2.hi);
  EXPECT_TRUE(b1.contains(4.5 / 2.5));
  EXPECT_LT(b1.lo, b1.hi);
  EXPECT_THROW(lrp::bootstrap_ci(groups, ratio, 1, 5), lrp::Error);
}

TEST(WeightedFit, ExactLineAndErrors) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7}, w{1, 2, 3, 4};
  const auto f = lrp::weighted_fit(x, y, w);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  // Formal error with χ² ≤ 1: (Σ w (x − x̄)²)^{-1/2}; x̄ = 2, Σ = 1·4 + 2·1 + 0 + 4·1 = 10.
  EXPECT_NEAR(f.slope_stderr, 1.0 / std::sqrt(10.0), 1e-14);
  EXPECT_THROW(lrp::weighted_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2},
                                 std::vector<double>{1, 1}),
               lrp::Error);
  EXPECT_THROW(lrp::weighted_fit(x, y, std::vector<double>{1, 0, 1, 1}), lrp::Error);
}

}  // namespace
