#include <gtest/gtest.h>

#include <cmath>

#include <lrp/error.hpp>
#include <lrp/model.hpp>

#include "quadrature.hpp"

namespace {

using lrp::Site;

TEST(Coupling, MatchesQuadrature) {
  for (Site k = 2; k <= 100; ++k) {
    const double exact = lrp::coupling_exponent(k);
    const double quad = oracle::cell_coupling(k);
    EXPECT_NEAR(exact, quad, 1e-12) << "k=" << k;
    EXPECT_NEAR(exact / quad, 1.0, 1e-11) << "k=" << k;
  }
}

TEST(Coupling, RejectsShortDistances) {
  EXPECT_THROW(lrp::coupling_exponent(1), lrp::Error);
  EXPECT_THROW(lrp::coupling_exponent(0), lrp::Error);
  EXPECT_THROW(lrp::edge_probability(1.0, 0), lrp::Error);
}

TEST(Coupling, DistanceMassTelescopes) {
  double sum = 0.0;
  for (Site k = 3; k <= 400; ++k) sum += lrp::coupling_exponent(k);
  EXPECT_NEAR(lrp::distance_mass(3, 400), sum, 1e-13);
  EXPECT_NEAR(lrp::distance_mass(2, lrp::kPlusInfinity), std::log(2.0), 1e-15);
}

TEST(Coupling, EdgeProbability) {
  EXPECT_EQ(lrp::edge_probability(0.7, 1), 1.0);
  // ln(4/3) at distance 2, so p = 1 − (3/4)^β.
  EXPECT_NEAR(lrp::edge_probability(1.0, 2), 0.25, 1e-15);
  EXPECT_NEAR(lrp::edge_probability(2.0, 2), 1.0 - 9.0 / 16.0, 1e-15);
}

TEST(Coupling, ExpectedDegreeAgreesWithLongSum) {
  for (const double beta : {0.5, 1.0, 2.0}) {
    double sum = 0.0;
    for (Site k = 2000000; k >= 2; --k) sum += lrp::edge_probability(beta, k);
    // Remaining tail is about β / 2·10⁶ per side.
    EXPECT_NEAR(lrp::expected_degree(beta), 2.0 + 2.0 * sum, 4.0 * beta / 2e6);
  }
}

TEST(Coupling, FarEdgeRate) {
  const double rate = lrp::far_edge_rate(1.0, 0, 10);
  EXPECT_NEAR(rate, 2.0 * std::log(11.0 / 10.0), 1e-15);
  EXPECT_THROW(lrp::far_edge_rate(1.0, 10, 10), lrp::Error);
}

TEST(SampleWindow, StructureAndDeterminism) {
  const lrp::ModelParams params{1.0, 3};
  const auto a = lrp::sample_window(params, -5, 30, {}, 11);
  const auto b = lrp::sample_window(params, -5, 30, {}, 11);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_TRUE(std::is_sorted(a.edges.begin(), a.edges.end()));
  EXPECT_EQ(std::adjacent_find(a.edges.begin(), a.edges.end()), a.edges.end());
  for (Site i = -5; i < 30; ++i) EXPECT_TRUE(a.has_edge(i, i + 1));
  for (const auto& e : a.edges) {
    EXPECT_LT(e.u, e.v);
    EXPECT_GE(e.u, -5);
    EXPECT_LE(e.v, 30);
  }
  const auto c = lrp::sample_window(params, -5, 30, {}, 12);
  EXPECT_NE(a.edges, c.edges);
}

TEST(SampleWindow, RejectsBadInput) {
  EXPECT_THROW(lrp::sample_window({1.0, 0}, 3, 3), lrp::Error);
  EXPECT_THROW(lrp::sample_window({0.0, 0}, 0, 3), lrp::Error);
  EXPECT_THROW(lrp::sample_window({1.0, 0}, 0, 3, lrp::ForbiddenSet::single_pair(1, 2)), lrp::Error);
}

TEST(SampleWindow, PairFrequencies) {
  const lrp::ModelParams params{1.0, 99};
  const int reps = 20000;
  std::vector<int> hits(11, 0);
  for (int r = 0; r < reps; ++r) {
    const auto s = lrp::sample_window(params, 0, 10, {}, static_cast<std::uint64_t>(r));
    for (Site k = 2; k <= 10; ++k) hits[static_cast<std::size_t>(k)] += s.has_edge(0, k);
  }
  for (Site k = 2; k <= 10; ++k) {
    const double p = lrp::edge_probability(1.0, k);
    const double sigma = std::sqrt(p * (1 - p) / reps);
    EXPECT_NEAR(hits[static_cast<std::size_t>(k)] / double(reps), p, 4 * sigma) << "k=" << k;
  }
}

TEST(SampleWindow, SkipAndBernoulliSamplersAgree) {
  const lrp::ModelParams params{0.8, 5};
  const int reps = 4000;
  double skip = 0.0, bern = 0.0;
  for (int r = 0; r < reps; ++r) {
    skip += static_cast<double>(lrp::sample_window(params, 0, 40, {}, r).long_edge_count());
    bern += static_cast<double>(lrp::sample_window_bernoulli(params, 0, 40, {}, r).long_edge_count());
  }
  double expected = 0.0;
  for (Site k = 2; k <= 40; ++k) expected += static_cast<double>(41 - k) * lrp::edge_probability(0.8, k);
  // Counts are sums of independent Bernoullis, so the variance is below the mean.
  const double sigma = std::sqrt(expected / reps);
  EXPECT_NEAR(skip / reps, expected, 4 * sigma);
  EXPECT_NEAR(bern / reps, expected, 4 * sigma);
}

TEST(SampleWindow, ForbiddenPairsAreAbsentAndCoupled) {
  const lrp::ModelParams params{2.0, 8};
  const auto forbidden = lrp::ForbiddenSet::inner_to_outside({-3, 3}, {-6, 6});
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto free = lrp::sample_window(params, -12, 12, {}, r);
    const auto cond = lrp::sample_window(params, -12, 12, forbidden, r);
    for (const auto& e : cond.edges) {
      EXPECT_FALSE(forbidden.contains(e.u, e.v));
      EXPECT_TRUE(free.has_edge(e.u, e.v));
    }
    for (const auto& e : free.edges) {
      if (!forbidden.contains(e.u, e.v)) EXPECT_TRUE(cond.has_edge(e.u, e.v));
    }
  }
}

TEST(ContractedComplement, ExteriorCounts) {
  const lrp::ModelParams params{1.0, 4};
  const auto s = lrp::sample_with_contracted_complement(params, {0, 0}, 5, 40, {}, 1);
  ASSERT_EQ(s.supernodes.size(), 1u);
  const auto& ext = s.supernodes.front();
  EXPECT_EQ(ext.label, lrp::kExteriorLabel);
  // The nearest-neighbour edges leaving the window always reach the exterior.
  EXPECT_GE(ext.counts.at(5), 1u);
  EXPECT_GE(ext.counts.at(-5), 1u);
  for (const auto& [site, count] : ext.counts) {
    EXPECT_GE(site, -5);
    EXPECT_LE(site, 5);
    EXPECT_GT(count, 0u);
  }
  EXPECT_THROW(lrp::sample_with_contracted_complement(params, {0, 0}, 5, 5), lrp::Error);
}

TEST(ContractedComplement, MeanExteriorDegreeOfCentre) {
  const double beta = 1.0;
  const int reps = 20000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto s = lrp::sample_with_contracted_complement({beta, 21}, {0, 0}, 4, 32, {}, r);
    const auto& counts = s.supernodes.front().counts;
    if (auto it = counts.find(0); it != counts.end()) total += it->second;
  }
  // Edges from 0 to |v| ≥ 5: mean Σ p_k over both sides.
  double expected = 0.0;
  for (Site k = 5; k <= 100000; ++k) expected += 2.0 * lrp::edge_probability(beta, k);
  expected += 2.0 * beta * std::log1p(1.0 / 100000.0);
  EXPECT_NEAR(total / reps, expected, 4.0 * std::sqrt(expected / reps));
}

TEST(ContractedComplement, ForbiddenClassesRemoveExteriorEdges) {
  const lrp::ModelParams params{1.5, 2};
  const auto forbidden = lrp::ForbiddenSet::inner_to_outside({-2, 2}, {-4, 4});
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto s = lrp::sample_with_contracted_complement(params, {-2, 2}, 4, 40, forbidden, r);
    for (const auto& [site, count] : s.supernodes.front().counts) {
      EXPECT_FALSE(site >= -2 && site <= 2) << "site " << site << " reached the exterior";
    }
  }
}

}  // namespace
