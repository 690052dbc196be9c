#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "factrace/freq_correlation.hpp"
#include "oracles.hpp"

using namespace factrace;

namespace {

// Bin k (k = 0..10) holds 10 facts at frequency 10^k, k of them correct.
LabeledDataset staircase() {
  LabeledDataset data;
  FactId id = 0;
  Frequency f = 1;
  for (int k = 0; k <= 10; ++k, f *= 10) {
    for (int j = 0; j < 10; ++j) data.push_back({id++, f, j < k});
  }
  return data;
}

}  // namespace

TEST(FreqCorrelation, StaircaseIsPerfectlyLinear) {
  auto curve = bin_curve(staircase(), 11);
  ASSERT_EQ(curve.bins.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) {
    EXPECT_EQ(curve.bins[k].count, 10u);
    EXPECT_DOUBLE_EQ(*curve.bins[k].p_correct, static_cast<double>(k) / 10.0);
  }
  auto c = pearson_log_recall(curve);
  EXPECT_NEAR(c.r, 1.0, 1e-12);
  EXPECT_EQ(c.bins_used, 11u);
  EXPECT_LT(c.p_value, 1e-6);
}

TEST(FreqCorrelation, BinsPartitionData) {
  std::mt19937_64 rng(5);
  LabeledDataset data;
  for (FactId i = 0; i < 500; ++i) data.push_back({i, rng() % 100000, rng() % 2 == 0});
  for (unsigned bins : {1u, 3u, 20u, 64u}) {
    auto curve = bin_curve(data, bins);
    std::size_t total = curve.zero_count;
    for (const auto& b : curve.bins) {
      total += b.count;
      EXPECT_LT(b.lo, b.hi);
      if (b.count == 0) EXPECT_FALSE(b.p_correct.has_value());
    }
    EXPECT_EQ(total, data.size());
    EXPECT_EQ(curve.edges.size(), bins + 1);
  }
}

TEST(FreqCorrelation, LeftClosedBins) {
  // log10 range [0, 2] with 2 bins: 10 sits on the interior edge.
  LabeledDataset data = {{0, 1, false}, {1, 10, true}, {2, 100, true}};
  auto curve = bin_curve(data, 2);
  EXPECT_EQ(curve.bins[0].count, 1u);
  EXPECT_EQ(curve.bins[1].count, 2u);
}

TEST(FreqCorrelation, ZeroFrequenciesHaveTheirOwnBucket) {
  LabeledDataset data = {{0, 0, true}, {1, 0, false}, {2, 5, true}};
  auto curve = bin_curve(data, 4);
  EXPECT_EQ(curve.zero_count, 2u);
  EXPECT_DOUBLE_EQ(*curve.zero_p_correct, 0.5);
  std::size_t binned = 0;
  for (const auto& b : curve.bins) binned += b.count;
  EXPECT_EQ(binned, 1u);

  auto only_zero = bin_curve({{0, 0, true}}, 4);
  EXPECT_TRUE(only_zero.bins.empty());
}

TEST(FreqCorrelation, InvalidBinCount) { EXPECT_FACTRACE_ERROR(bin_curve(staircase(), 0), InvalidBinCount); }

TEST(FreqCorrelation, PearsonAgreesWithTextbookFormula) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int round = 0; round < 50; ++round) {
    std::vector<double> x(3 + rng() % 40), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = nd(rng);
      y[i] = 0.5 * x[i] + nd(rng);
    }
    EXPECT_NEAR(pearson(x, y).r, oracle::textbook_pearson(x, y), 1e-9);
  }
}

TEST(FreqCorrelation, PValueReference) {
  // Reference values from scipy.stats.pearsonr.
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> y = {5, 1, 7, 2, 9, 3, 4, 12, 6, 10, 8, 11};
  auto c = pearson(x, y);
  EXPECT_NEAR(c.r, 0.6293706293706294, 1e-12);
  EXPECT_NEAR(c.p_value, 0.028319671295760105, 1e-9);
  std::vector<double> z = {2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11};
  auto d = pearson(x, z);
  EXPECT_NEAR(d.r, 0.9580419580419581, 1e-12);
  EXPECT_NEAR(d.p_value, 9.543581826838405e-07, 1e-12);
  std::vector<double> neg(z.rbegin(), z.rend());
  EXPECT_NEAR(pearson(x, neg).r, -0.9580419580419581, 1e-12);
}

TEST(FreqCorrelation, Degenerate) {
  std::vector<double> a = {1, 2}, b = {3, 4};
  EXPECT_FACTRACE_ERROR(pearson(a, b), DegenerateInput);
  std::vector<double> c = {1, 2, 3}, k = {5, 5, 5};
  EXPECT_FACTRACE_ERROR(pearson(c, k), DegenerateInput);
  LabeledDataset flat;
  for (FactId i = 0; i < 20; ++i) flat.push_back({i, 1 + i * 37, true});
  EXPECT_FACTRACE_ERROR(pearson_log_recall(bin_curve(flat, 5)), DegenerateInput);
}

TEST(FreqCorrelation, CurveCsv) {
  auto csv = bin_curve(staircase(), 11).to_csv();
  EXPECT_EQ(csv.rfind("bin_lo,bin_hi,count,p_correct\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}
