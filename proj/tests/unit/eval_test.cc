#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cek/causal/propensity.h"
#include "cek/causal/weighting.h"
#include "cek/error.h"
#include "cek/eval/balance.h"
#include "cek/eval/bundle.h"
#include "cek/eval/calibration_curve.h"
#include "cek/eval/curves.h"
#include "cek/eval/distribution.h"
#include "cek/eval/metrics.h"
#include "cek/eval/scatter.h"
#include "cek/synth/synth.h"

namespace cek::eval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

synth::SynthConfig Confounded(std::size_t n, std::uint64_t seed) {
  synth::SynthConfig c;
  c.n = n;
  c.d = 10;
  c.propensity_coef = {0.8, -0.6, 0.5, 0.4, -0.3, 0.25, 0.0, 0.0, 0.0, 0.0};
  c.outcome_coef = {0.5, 0.3, 0.0, 0.4, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0};
  c.seed = seed;
  return c;
}

// -------------------------------------------------------------------- SMD

TEST(Smd, IdenticalGroups) {
  const std::vector<double> x = {1.0, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(Smd(x, x), 0.0);
}

TEST(Smd, UnitVarianceUnitShift) {
  const double s = std::sqrt(0.5);  // sample variance of {m - s, m + s} is 1
  const std::vector<double> t = {1.0 - s, 1.0 + s}, c = {-s, s};
  EXPECT_NEAR(Smd(t, c), 1.0, 1e-15);
}

TEST(Smd, WeightedHandComputation) {
  const std::vector<double> t = {0.0, 1.0}, wt = {1.0, 3.0}, c = {0.0}, wc = {1.0};
  // Treated: mean 3/4, frequency-weighted variance sum w (x - m)^2 / (sum w - 1).
  const double mean_t = 0.75;
  const double var_t = (1.0 * 0.5625 + 3.0 * 0.0625) / 3.0;
  const double expected = mean_t / std::sqrt((var_t + 0.0) / 2.0);
  EXPECT_NEAR(Smd(t, c, wt, wc), expected, 1e-15);
  EXPECT_NEAR(Smd(t, c, wt, wc), 2.1213203435596424, 1e-15);
}

TEST(Smd, ZeroVariance) {
  const std::vector<double> a = {2.0, 2.0}, b = {3.0, 3.0};
  EXPECT_DOUBLE_EQ(Smd(a, a), 0.0);
  EXPECT_EQ(Smd(a, b), kInf);
}

TEST(Smd, Errors) {
  const std::vector<double> a = {1.0}, empty;
  EXPECT_THROW(Smd(a, empty), ParameterError);
  EXPECT_THROW(Smd(a, a, std::vector<double>{-1.0}, std::vector<double>{1.0}), ParameterError);
  EXPECT_THROW(Smd(a, a, std::vector<double>{0.0}, std::vector<double>{1.0}), ParameterError);
}

TEST(Smd, ScaleInvariantInWeights) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::vector<double> t(50), c(60), wt(50), wc(60);
  for (auto& v : t) v = normal(rng) + 0.3;
  for (auto& v : c) v = normal(rng);
  for (auto& v : wt) v = u(rng);
  for (auto& v : wc) v = u(rng);
  std::vector<double> wt2 = wt, wc2 = wc;
  for (auto& v : wt2) v *= 7.0;
  for (auto& v : wc2) v *= 7.0;
  // Frequency weights use sum(w) - 1, so scaling changes the variance
  // slightly; the means, and thus the sign and rough size, are kept.
  EXPECT_NEAR(Smd(t, c, wt, wc), Smd(t, c, wt2, wc2), 0.02);
  EXPECT_GT(Smd(t, c, wt, wc), 0.0);
}

class BalanceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::tie(frame_, oracle_) = synth::Generate(Confounded(5000, 2));
    plan_ = MakeFolds(frame_.size(), 5, 3, frame_.treatment, true);
  }
  std::vector<FoldSample> Samples(bool true_weights) const {
    std::vector<FoldSample> out;
    for (int f = 0; f < 5; ++f) {
      FoldSample s;
      s.rows = plan_.ValidationRows(f);
      std::vector<double> p;
      std::vector<int> a;
      for (std::size_t i : s.rows) {
        p.push_back(oracle_.true_propensity[i]);
        a.push_back(frame_.treatment[i]);
      }
      s.weights = true_weights ? causal::IpwWeights(p, a).weights
                               : std::vector<double>(s.rows.size(), 1.0);
      out.push_back(std::move(s));
    }
    return out;
  }
  CohortFrame frame_;
  synth::SynthOracle oracle_;
  FoldPlan plan_;
};

TEST_F(BalanceTest, UnitWeightsMatchUnweighted) {
  const auto samples = Samples(false);
  const BalanceTable t = BalanceReport(frame_, samples, Phase::kValidation);
  for (const auto& c : t.covariates) {
    EXPECT_EQ(c.weighted, c.unweighted);
    EXPECT_DOUBLE_EQ(c.mean_weighted, c.mean_unweighted);
  }
}

TEST_F(BalanceTest, TruePropensityWeightsBalance) {
  const auto samples = Samples(true);
  const BalanceTable t = BalanceReport(frame_, samples, Phase::kValidation);
  for (const auto& c : t.covariates) EXPECT_LT(c.mean_weighted, 0.1) << c.name;
  EXPECT_TRUE(t.Flagged().empty());
  EXPECT_GT(t.Find("x1")->mean_unweighted, 0.1);
}

TEST_F(BalanceTest, SortedByUnweightedDescending) {
  const auto samples = Samples(true);
  const BalanceTable t = BalanceReport(frame_, samples, Phase::kValidation);
  for (std::size_t i = 1; i < t.covariates.size(); ++i) {
    EXPECT_GE(t.covariates[i - 1].mean_unweighted, t.covariates[i].mean_unweighted);
  }
  EXPECT_EQ(t.covariates.size(), 10u);
}

TEST_F(BalanceTest, RandomizedCohortIsBalancedUnweighted) {
  synth::SynthConfig c = Confounded(5000, 4);
  c.propensity_coef.assign(10, 0.0);
  frame_ = synth::Generate(c).first;
  plan_ = MakeFolds(frame_.size(), 5, 3, frame_.treatment, true);
  const BalanceTable t = BalanceReport(frame_, Samples(false), Phase::kValidation);
  for (const auto& cov : t.covariates) EXPECT_LT(cov.mean_unweighted, 0.1) << cov.name;
}

TEST_F(BalanceTest, MissingArmInFoldThrows) {
  FoldSample s;
  for (std::size_t i = 0; i < frame_.size() && s.rows.size() < 20; ++i) {
    if (frame_.treatment[i] == 1) s.rows.push_back(i);
  }
  s.weights.assign(s.rows.size(), 1.0);
  const std::vector<FoldSample> samples = {s};
  EXPECT_THROW(BalanceReport(frame_, samples, Phase::kTrain), PositivityError);
}

// -------------------------------------------------------------------- ROC

double Concordance(const std::vector<double>& s, const std::vector<int>& y,
                   const std::vector<double>& w) {
  double num = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) (y[i] == 1 ? pos : neg) += w[i];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      num += w[i] * w[j] * (s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / (pos * neg);
}

TEST(Roc, PerfectSeparation) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y = {0, 0, 1, 1};
  const Curve c = RocCurve(s, y);
  EXPECT_DOUBLE_EQ(*c.summary, 1.0);
  EXPECT_DOUBLE_EQ(c.x.front(), 0.0);
  EXPECT_DOUBLE_EQ(c.y.front(), 0.0);
  EXPECT_DOUBLE_EQ(c.x.back(), 1.0);
  EXPECT_DOUBLE_EQ(c.y.back(), 1.0);
}

TEST(Roc, MatchesConcordanceWithTies) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<double> s(n), w(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7);
      y[i] = static_cast<int>(rng() % 2);
      w[i] = 0.25 + static_cast<double>(rng() % 8);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(*RocCurve(s, y, w).summary, Concordance(s, y, w), 1e-10);
    EXPECT_NEAR(*RocCurve(s, y).summary, Concordance(s, y, std::vector<double>(n, 1.0)), 1e-10);
  }
}

TEST(Roc, SingleClassHasNoSummary) {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {1, 1};
  const Curve c = RocCurve(s, y);
  EXPECT_FALSE(c.summary.has_value());
  EXPECT_EQ(c.missing_reason, "single_class");
}

TEST(Roc, TruePropensityWeightsRemoveSignal) {
  const auto [frame, oracle] = synth::Generate(Confounded(5000, 6));
  const auto w = causal::IpwWeights(oracle.true_propensity, frame.treatment);
  const double auc = *RocCurve(oracle.true_propensity, frame.treatment, w.weights).summary;
  EXPECT_GE(auc, 0.45);
  EXPECT_LE(auc, 0.55);
}

TEST(ExpectedRoc, ConstantHalf) {
  const std::vector<double> p(20, 0.5);
  const Curve c = ExpectedRoc(p);
  EXPECT_DOUBLE_EQ(*c.summary, 0.5);
  for (std::size_t i = 0; i < c.x.size(); ++i) EXPECT_DOUBLE_EQ(c.x[i], c.y[i]);
}

TEST(ExpectedRoc, TwoLevelMassSums) {
  std::vector<double> p(30, 0.01);
  p.resize(80, 0.99);  // 30 low, 50 high
  // Direct mass computation: positives carry p, negatives 1 - p.
  const double pos_hi = 50 * 0.99, pos_lo = 30 * 0.01;
  const double neg_hi = 50 * 0.01, neg_lo = 30 * 0.99;
  const double pos = pos_hi + pos_lo, neg = neg_hi + neg_lo;
  const double oracle =
      (pos_hi * neg_lo + 0.5 * (pos_hi * neg_hi + pos_lo * neg_lo)) / (pos * neg);
  EXPECT_NEAR(*ExpectedRoc(p).summary, oracle, 1e-12);
  std::vector<double> even(40, 0.01);
  even.resize(80, 0.99);
  EXPECT_NEAR(*ExpectedRoc(even).summary, 0.99, 1e-12);
}

// --------------------------------------------------------------------- PR

TEST(Pr, PerfectSeparation) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y = {0, 0, 1, 1};
  const Curve c = PrCurve(s, y);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if (c.x[i] > 0.0 && c.x[i] <= 1.0 && c.thresholds[i] >= 0.8) EXPECT_DOUBLE_EQ(c.y[i], 1.0);
  }
  EXPECT_DOUBLE_EQ(*c.summary, 1.0);
}

TEST(Pr, AllPositivePredictionsGivePrevalence) {
  const std::vector<double> s(10, 0.7);
  const std::vector<int> y = {1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
  const Curve c = PrCurve(s, y);
  EXPECT_DOUBLE_EQ(c.x.back(), 1.0);
  EXPECT_DOUBLE_EQ(c.y.back(), 0.3);
}

TEST(Pr, RandomScoresAveragePrecisionNearPrevalence) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(2000);
  std::vector<int> y(2000);
  for (int i = 0; i < 2000; ++i) {
    s[i] = u(rng);
    y[i] = u(rng) < 0.1;
  }
  EXPECT_NEAR(*PrCurve(s, y).summary, 0.1, 0.05);
}

TEST(Pr, NoPositives) {
  const std::vector<double> s = {0.2, 0.4};
  const std::vector<int> y = {0, 0};
  EXPECT_EQ(PrCurve(s, y).missing_reason, "no_positives");
}

// ---------------------------------------------------------------- pooling

Curve Line(std::vector<double> x, std::vector<double> y) {
  Curve c;
  c.x = std::move(x);
  c.y = std::move(y);
  c.thresholds.assign(c.x.size(), 0.0);
  return c;
}

TEST(Pool, IdenticalFoldsHaveZeroStd) {
  const Curve c = Line({0, 0.3, 1}, {0, 0.7, 1});
  const PooledCurve p = PoolFolds(CurveKind::kRoc, {c, c, c});
  for (double s : p.std) EXPECT_NEAR(s, 0.0, 1e-15);
}

TEST(Pool, InterpolationArithmetic) {
  const Curve a = Line({0, 1}, {0, 1});
  const Curve b = Line({0, 0.5, 1}, {0, 1, 1});
  const PooledCurve p = PoolFolds(CurveKind::kRoc, {a, b}, 5);
  ASSERT_DOUBLE_EQ(p.grid[1], 0.25);
  EXPECT_DOUBLE_EQ(p.mean[1], 0.375);
  EXPECT_DOUBLE_EQ(p.std[1], 0.125);
}

TEST(Pool, RocEndpointsPinned) {
  const Curve a = Line({0, 0, 0.4, 1}, {0, 0.3, 0.9, 1});
  const Curve b = Line({0, 0.2, 1}, {0.1, 0.6, 0.95});
  const PooledCurve p = PoolFolds(CurveKind::kRoc, {a, b});
  EXPECT_DOUBLE_EQ(p.mean.front(), 0.0);
  EXPECT_DOUBLE_EQ(p.mean.back(), 1.0);
}

TEST(Pool, SingleFoldWarns) {
  const PooledCurve p = PoolFolds(CurveKind::kRoc, {Line({0, 1}, {0, 1})});
  EXPECT_FALSE(p.warning.empty());
}

TEST(Interpolate, VerticalSegmentsTakeLastPoint) {
  const Curve c = Line({0, 0, 0.5, 1}, {0, 0.4, 0.8, 1});
  EXPECT_DOUBLE_EQ(InterpolateCurve(c, 0.0), 0.4);
  EXPECT_DOUBLE_EQ(InterpolateCurve(c, 0.25), 0.6);
}

// ------------------------------------------------------------ calibration

double BisectInterval(double p, double n, double sign) {
  // Root of r + sign * sqrt(r (1 - r) / n) - p on the branch containing p.
  auto f = [&](double r) { return r + sign * std::sqrt(r * (1 - r) / n) - p; };
  double lo = sign > 0 ? 0.0 : p, hi = sign > 0 ? p : 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0) == (f(hi) > 0) ? hi = mid : lo = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(CalibrationInterval, MatchesBisectionOracle) {
  const auto [lo, hi] = CalibrationInterval(0.5, 25);
  EXPECT_NEAR(lo, BisectInterval(0.5, 25, +1), 1e-12);
  EXPECT_NEAR(hi, BisectInterval(0.5, 25, -1), 1e-12);
  EXPECT_NEAR(lo, 0.4019419324309079, 1e-12);
  EXPECT_NEAR(hi, 0.5980580675690921, 1e-12);
}

TEST(CalibrationInterval, EndpointResiduals) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = u(rng);
    const std::size_t n = 1 + rng() % 5000;
    const auto [lo, hi] = CalibrationInterval(p, n);
    const double nn = static_cast<double>(n);
    EXPECT_LE(lo, p);
    EXPECT_GE(hi, p);
    if (lo > 0.0) EXPECT_NEAR(lo + std::sqrt(lo * (1 - lo) / nn), p, 1e-9);
    if (hi < 1.0) EXPECT_NEAR(hi - std::sqrt(hi * (1 - hi) / nn), p, 1e-9);
  }
}

TEST(CalibrationCurve, ConstantPredictorOnDiagonal) {
  const std::vector<double> s(100, 0.3);
  std::vector<int> y(100, 0);
  std::fill(y.begin(), y.begin() + 30, 1);
  const CalibrationCurve c = ComputeCalibrationCurve(s, y);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_NEAR(c.points[0].r_mean, 0.3, 1e-12);
  EXPECT_NEAR(c.points[0].p_observed, 0.3, 1e-12);
  EXPECT_TRUE(c.points[0].CoversDiagonal());
}

TEST(CalibrationCurve, BinsHoldEqualCounts) {
  std::vector<double> s(1000);
  std::vector<int> y(1000);
  for (int i = 0; i < 1000; ++i) {
    s[i] = (i * 37 % 1000) / 1000.0;
    y[i] = i % 3 == 0;
  }
  const CalibrationCurve c = ComputeCalibrationCurve(s, y);
  ASSERT_EQ(c.points.size(), 10u);
  for (const auto& p : c.points) EXPECT_EQ(p.n, 100u);
}

// Coverage of a +/- one standard error interval. Frozen for this seed; the
// expected per-bin coverage is about 68%.
TEST(CalibrationCurve, CoverageOnCalibratedLabels) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (int i = 0; i < 10000; ++i) {
    s[i] = u(rng);
    y[i] = u(rng) < s[i];
  }
  const CalibrationCurve c = ComputeCalibrationCurve(s, y);
  const auto covered = std::count_if(c.points.begin(), c.points.end(),
                                     [](const CalibrationPoint& p) { return p.CoversDiagonal(); });
  EXPECT_EQ(c.points.size(), 10u);
  EXPECT_GE(covered, 5);
}

TEST(CalibrationCurve, WindowStrategy) {
  std::vector<double> s(100);
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) {
    s[i] = i / 100.0;
    y[i] = i % 2;
  }
  CalibrationOptions o{.strategy = BinStrategy::kWindow, .window_width = 20};
  const CalibrationCurve c = ComputeCalibrationCurve(s, y, o);
  EXPECT_EQ(c.points.size(), 17u);  // starts 0, 5, ..., 80
  for (const auto& p : c.points) EXPECT_EQ(p.n, 20u);
  o.window_width = 0;
  EXPECT_THROW(ComputeCalibrationCurve(s, y, o), Error);
}

TEST(CalibrationCurve, ScoresOutsideUnitIntervalThrow) {
  const std::vector<double> s = {1.5};
  const std::vector<int> y = {1};
  EXPECT_THROW(ComputeCalibrationCurve(s, y), ParameterError);
}

// ----------------------------------------------------------- distribution

TEST(Distribution, UniformArmsHaveNoSuspects) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(4000);
  std::vector<int> a(4000);
  for (int i = 0; i < 4000; ++i) {
    s[i] = u(rng);
    a[i] = i < 2000;
  }
  const DistributionSeries d = PropensityDistribution(s, a);
  EXPECT_TRUE(d.suspect_bins.empty());
  EXPECT_EQ(PositivityFlag(d).flagged, 0u);
}

TEST(Distribution, DeterministicSubgroupFlagsTopBin) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  std::vector<double> s;
  std::vector<int> a;
  for (int i = 0; i < 2000; ++i) {
    s.push_back(u(rng));
    a.push_back(i % 2);
  }
  for (int i = 0; i < 50; ++i) {
    s.push_back(0.999);
    a.push_back(1);
  }
  const DistributionSeries d = PropensityDistribution(s, a);
  ASSERT_EQ(d.suspect_bins, std::vector<int>{19});
  EXPECT_EQ(d.suspect_arm, std::vector<int>{1});
  const PositivityReport r = PositivityFlag(d);
  EXPECT_EQ(r.flagged, 50u);
  for (std::size_t i = 2000; i < s.size(); ++i) EXPECT_TRUE(r.suspect[i]);
}

TEST(Distribution, IdenticalScoresOneSharedBin) {
  const std::vector<double> s(40, 0.42);
  std::vector<int> a(40, 0);
  std::fill(a.begin(), a.begin() + 20, 1);
  const DistributionSeries d = PropensityDistribution(s, a);
  int occupied = 0;
  for (std::size_t b = 0; b < d.counts[0].size(); ++b) occupied += d.counts[0][b] + d.counts[1][b] > 0;
  EXPECT_EQ(occupied, 1);
  EXPECT_TRUE(d.suspect_bins.empty());
}

TEST(Distribution, MinCountAboveOccupancyGivesEmptyMask) {
  const std::vector<double> s = {0.99, 0.98, 0.97, 0.1, 0.12};
  const std::vector<int> a = {1, 1, 1, 0, 1};
  const DistributionSeries d = PropensityDistribution(s, a, {.min_count = 10});
  EXPECT_EQ(PositivityFlag(d).flagged, 0u);
  const DistributionSeries loose = PropensityDistribution(s, a, {.min_count = 3});
  EXPECT_EQ(PositivityFlag(loose).flagged, 3u);
}

TEST(Distribution, ReflectedModeNegatesTreated) {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.35};
  const std::vector<int> a = {0, 1, 0, 1};
  const DistributionSeries d =
      PropensityDistribution(s, a, {.mode = DistributionMode::kPdfReflected, .bins = 4});
  double area0 = 0.0, area1 = 0.0;
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_GE(d.values[0][b], 0.0);
    EXPECT_LE(d.values[1][b], 0.0);
    area0 += d.values[0][b] * (d.edges[b + 1] - d.edges[b]);
    area1 += d.values[1][b] * (d.edges[b + 1] - d.edges[b]);
  }
  EXPECT_NEAR(area0, 1.0, 1e-12);
  EXPECT_NEAR(area1, -1.0, 1e-12);
}

TEST(Distribution, CdfEndsAtOne) {
  const std::vector<double> s = {0.1, 0.2, 0.3, 0.8};
  const std::vector<int> a = {0, 1, 0, 1};
  const DistributionSeries d = PropensityDistribution(s, a, {.mode = DistributionMode::kCdf});
  EXPECT_DOUBLE_EQ(d.values[0].back(), 1.0);
  EXPECT_DOUBLE_EQ(d.values[1].back(), 1.0);
}

// ---------------------------------------------------------------- scatter

TEST(Scatter, IdenticalDistributionsHaveLowScore) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.5, 0.15);
  std::vector<double> y0(4000), y1(4000);
  std::vector<int> arm(4000);
  for (int i = 0; i < 4000; ++i) {
    y0[i] = normal(rng);
    y1[i] = normal(rng);
    arm[i] = i % 2;
  }
  EXPECT_LT(CounterfactualScatter(y0, y1, arm).violation_score, 0.05);
}

TEST(Scatter, DisjointClustersHaveHighScore) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  std::vector<double> y0, y1;
  std::vector<int> arm;
  for (int i = 0; i < 1000; ++i) {
    const int a = i % 2;
    y0.push_back(u(rng) + (a ? 0.8 : 0.0));
    y1.push_back(u(rng) + (a ? 0.0 : 0.8));
    arm.push_back(a);
  }
  EXPECT_GT(CounterfactualScatter(y0, y1, arm).violation_score, 0.9);
}

TEST(Scatter, MirroredMultisetsScoreZero) {
  const std::vector<double> y0 = {0.1, 0.1, 0.4, 0.4, 0.7, 0.7};
  const std::vector<double> y1 = {0.2, 0.2, 0.5, 0.5, 0.9, 0.9};
  const std::vector<int> arm = {0, 1, 0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(CounterfactualScatter(y0, y1, arm, {.grid = 3, .min_cell = 2}).violation_score,
                   0.0);
}

TEST(Scatter, LowEvidenceWarning) {
  const std::vector<double> y0 = {0.1, 0.9}, y1 = {0.3, 0.2};
  const std::vector<int> arm = {0, 1};
  const IgnorabilityReport r = CounterfactualScatter(y0, y1, arm);
  EXPECT_EQ(r.populated, 0u);
  EXPECT_DOUBLE_EQ(r.violation_score, 0.0);
  EXPECT_FALSE(r.warning.empty());
}

TEST(RSquared, Definitions) {
  const std::vector<double> obs = {1.0, 2.0, 4.0, 7.0};
  EXPECT_DOUBLE_EQ(*RSquared(obs, obs), 1.0);
  const std::vector<double> mean(4, 3.5);
  EXPECT_DOUBLE_EQ(*RSquared(obs, mean), 0.0);
  EXPECT_FALSE(RSquared(std::vector<double>{1.0}, std::vector<double>{1.0}).has_value());
}

TEST(RSquared, NoisyLinearSignal) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> normal;
  std::vector<double> signal(5000), obs(5000);
  for (int i = 0; i < 5000; ++i) {
    signal[i] = 2.0 * normal(rng);
    obs[i] = signal[i] + normal(rng);
  }
  EXPECT_NEAR(*RSquared(obs, signal), 4.0 / 5.0, 0.05);
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, PerfectBinaryPredictions) {
  const std::vector<double> p = {0.0, 1.0, 1.0, 0.0}, y = {0, 1, 1, 0};
  const auto v = ComputeMetrics(p, y, true, nullptr);
  const auto& names = MetricNames();
  auto get = [&](const std::string& n) {
    return *v[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())];
  };
  EXPECT_DOUBLE_EQ(get("accuracy"), 1.0);
  EXPECT_DOUBLE_EQ(get("brier"), 0.0);
  EXPECT_DOUBLE_EQ(get("mcc"), 1.0);
  EXPECT_DOUBLE_EQ(get("roc_auc"), 1.0);
  EXPECT_DOUBLE_EQ(get("zero_one_loss"), 0.0);
}

TEST(Metrics, HalfScoresUseTieRule) {
  const std::vector<double> p(4, 0.5), y = {1, 0, 1, 0};
  std::string notes;
  const auto v = ComputeMetrics(p, y, true, &notes);
  const auto& names = MetricNames();
  auto idx = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  EXPECT_DOUBLE_EQ(*v[idx("brier")], 0.25);
  EXPECT_DOUBLE_EQ(*v[idx("accuracy")], 0.5);  // predicts positive at >= 0.5
  EXPECT_DOUBLE_EQ(*v[idx("recall")], 1.0);
  EXPECT_DOUBLE_EQ(*v[idx("tp")], 2.0);
  EXPECT_DOUBLE_EQ(*v[idx("fp")], 2.0);
  EXPECT_FALSE(v[idx("mcc")].has_value());
  EXPECT_NE(notes.find("mcc="), std::string::npos);
}

TEST(Metrics, RegressionHandInstance) {
  const std::vector<double> p = {1.0, 2.0, 3.0, 4.0, 5.0}, y = {1.5, 1.0, 3.0, 6.0, 4.0};
  // Errors: 0.5, -1, 0, 2, -1 (predicted - observed).
  const auto v = ComputeMetrics(p, y, false, nullptr);
  const auto& names = MetricNames();
  auto get = [&](const std::string& n) {
    return *v[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())];
  };
  EXPECT_DOUBLE_EQ(get("mse"), (0.25 + 1 + 0 + 4 + 1) / 5.0);
  EXPECT_DOUBLE_EQ(get("mae"), (0.5 + 1 + 0 + 2 + 1) / 5.0);
  EXPECT_DOUBLE_EQ(get("median_ae"), 1.0);
}

TEST(Metrics, ContinuousTruthSkipsClassification) {
  const std::vector<double> p = {0.2, 0.4, 0.6}, y = {0.1, 0.5, 0.9};
  std::string notes;
  const auto v = ComputeMetrics(p, y, false, &notes);
  EXPECT_FALSE(v[0].has_value());
  EXPECT_NE(notes.find("classification=continuous_outcome"), std::string::npos);
}

TEST(Metrics, TableHasStrataAndOverall) {
  const std::vector<double> p = {0.2, 0.7, 0.4, 0.9}, y = {0, 1, 1, 1};
  const std::vector<int> a = {0, 1, 0, 1};
  const std::vector<std::string> names = {"0", "1"};
  const auto t = MetricsTable(p, y, a, true, "treatment", "", Phase::kValidation, 2, names);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].stratum, "0");
  EXPECT_EQ(t[1].stratum, "1");
  EXPECT_EQ(t[2].stratum, "overall");
  EXPECT_EQ(t[2].fold, 2);
}

// ----------------------------------------------------------------- bundle

class BundleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::tie(frame_, oracle_) = synth::Generate(Confounded(3000, 15));
    const FoldPlan plan = MakeFolds(frame_.size(), 5, 16, frame_.treatment, true);
    learners::LearnerSpec spec;
    spec.calibration = learners::CalibrationMethod::kSigmoid;
    artifacts_.propensity = causal::FitPropensity(frame_, spec, plan, 17);
  }
  CohortFrame frame_;
  synth::SynthOracle oracle_;
  TrainedArtifacts artifacts_;
};

TEST_F(BundleTest, FullMaskMatchesWholeCohort) {
  const DiagnosticBundle all = EvaluateAll(artifacts_, frame_, {});
  const DiagnosticBundle sub =
      EvaluateSubset(artifacts_, frame_, Mask(frame_.size(), true), "all", {});
  for (Phase phase : {Phase::kTrain, Phase::kValidation}) {
    const auto& a = all.Get(phase);
    const auto& b = sub.Get(phase);
    ASSERT_EQ(a.balance.covariates.size(), b.balance.covariates.size());
    for (std::size_t i = 0; i < a.balance.covariates.size(); ++i) {
      EXPECT_EQ(a.balance.covariates[i].weighted, b.balance.covariates[i].weighted);
    }
    EXPECT_EQ(a.propensity_roc.mean, b.propensity_roc.mean);
    EXPECT_EQ(a.propensity_metrics, b.propensity_metrics);
    EXPECT_EQ(a.distribution_rows, b.distribution_rows);
  }
}

TEST_F(BundleTest, SubsetUsesExactlySelectedRows) {
  Mask m(frame_.size(), false);
  std::size_t selected = 0;
  for (std::size_t i = 0; i < frame_.size(); ++i) {
    m[i] = frame_.covariates(static_cast<Eigen::Index>(i), 2) > 0.58;
    selected += m[i];
  }
  const double fraction = static_cast<double>(selected) / static_cast<double>(frame_.size());
  EXPECT_NEAR(fraction, 0.28, 0.03);
  const DiagnosticBundle b = EvaluateSubset(artifacts_, frame_, m, "x3_high", {});
  EXPECT_EQ(b.selected, selected);
  std::vector<std::size_t> rows = b.validation.distribution_rows;
  std::sort(rows.begin(), rows.end());
  EXPECT_EQ(rows, MaskToRows(m));
  std::size_t fold_rows = 0;
  for (const auto& f : b.validation.folds) fold_rows += f.rows.size();
  EXPECT_EQ(fold_rows, selected);
}

TEST_F(BundleTest, SubsetWithoutTreatedThrows) {
  Mask m(frame_.size(), false);
  for (std::size_t i = 0; i < frame_.size(); ++i) m[i] = frame_.treatment[i] == 0;
  EXPECT_THROW(EvaluateSubset(artifacts_, frame_, m, "controls", {}), PositivityError);
  EXPECT_THROW(EvaluateSubset(artifacts_, frame_, Mask(frame_.size(), false), "none", {}),
               EmptySubsetError);
}

TEST_F(BundleTest, ValidationMetricsLayout) {
  const DiagnosticBundle b = EvaluateAll(artifacts_, frame_, {});
  EXPECT_EQ(b.validation.propensity_metrics.size(), 15u);  // 5 folds x (2 arms + overall)
  EXPECT_EQ(b.train.propensity_metrics.size(), 15u);
  EXPECT_FALSE(b.validation.outcome.has_value());
}

}  // namespace
}  // namespace cek::eval
