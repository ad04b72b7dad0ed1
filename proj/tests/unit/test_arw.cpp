#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hicrit/arw.hpp"
#include "hicrit/calibrate.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/numerics.hpp"

using namespace hicrit;

namespace {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

LabeledMatrix noise_matrix(std::size_t n, std::size_t p, std::uint64_t seed, double shift = 0.0) {
  std::vector<double> mu(p, 0.0);
  // Alternating signs keep Efron's recentering from absorbing the signal.
  for (std::size_t j = 0; j < std::min<std::size_t>(p, 10); ++j) mu[j] = j % 2 ? shift : -shift;
  return sample_two_class(mu, n, RngSeed{seed, 0});
}

}  // namespace

TEST(ArwParams, Derived) {
  const ArwParams p(1000000, 0.5, 0.25);
  EXPECT_NEAR(p.epsilon(), 1e-3, 1e-15);
  EXPECT_NEAR(p.tau(), std::sqrt(0.5 * std::log(1e6)), 1e-14);
  EXPECT_THROW(ArwParams(100, 1.0, 0.2), InvalidInput);
  EXPECT_THROW(ArwParams(100, 0.5, 0.0), InvalidInput);
}

TEST(SampleMixture, Degenerate) {
  const auto null = sample_mixture(5000, 0.0, 3.0, RngSeed{1, 0});
  EXPECT_EQ(std::count(null.nonnull.begin(), null.nonnull.end(), true), 0);
  const auto all = sample_mixture(5000, 1.0, 0.0, RngSeed{1, 0});
  EXPECT_EQ(std::count(all.nonnull.begin(), all.nonnull.end(), true), 5000);
  EXPECT_EQ(all.x.size(), 5000u);
  EXPECT_THROW(sample_mixture(10, 1.5, 0.0, RngSeed{}), InvalidInput);
}

TEST(SampleMixture, NonnullCountAtMillion) {
  const auto s = sample_mixture(1000000, 1e-3, 2.0, RngSeed{2024, 0});
  const auto k = std::count(s.nonnull.begin(), s.nonnull.end(), true);
  EXPECT_NEAR(static_cast<double>(k), 1000.0, 150.0);
  double shift = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.nonnull[i]) shift += s.x[i];
  }
  EXPECT_NEAR(shift / k, 2.0, 0.2);
}

TEST(SampleMixture, BinomialMeanOverDraws) {
  const std::size_t n = 1000;
  const double eps = 0.05;
  double total = 0.0;
  for (std::uint64_t d = 0; d < 1000; ++d) {
    const auto s = sample_mixture(n, eps, 1.0, RngSeed{77, d});
    total += static_cast<double>(std::count(s.nonnull.begin(), s.nonnull.end(), true));
  }
  const double se = std::sqrt(n * eps * (1 - eps) / 1000.0);
  EXPECT_NEAR(total / 1000.0, n * eps, 3.0 * se);
}

TEST(PValues, OneSided) {
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(pvalues_one_sided(zero).order_stat(1), 0.5);
  const std::vector<double> z{1.959964};
  EXPECT_NEAR(pvalues_one_sided(z).order_stat(1), 0.024999999096442404, 1e-15);
  const std::vector<double> xs{3.0, -1.0, 0.5};
  const auto s = pvalues_one_sided(xs);
  EXPECT_LT(s.order_stat(1), s.order_stat(2));
  EXPECT_NEAR(s.order_stat(1), std_normal_sf(3.0), 1e-17);
}

TEST(PValues, TwoSided) {
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(pvalues_two_sided(zero).order_stat(1), 1.0);
  const std::vector<double> z{1.959964};
  EXPECT_NEAR(pvalues_two_sided(z).order_stat(1), 0.04999999819288481, 1e-14);
  std::vector<double> x{1.0, -2.5, 0.3, 4.0};
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  const auto a = pvalues_two_sided(x), b = pvalues_two_sided(neg);
  for (std::size_t i = 1; i <= x.size(); ++i) EXPECT_EQ(a.order_stat(i), b.order_stat(i));
}

TEST(PValues, NormalDrawsMatchUniformNull) {
  std::vector<double> from_normal(1000), from_uniform(1000);
  for (std::uint64_t r = 0; r < 1000; ++r) {
    const auto s = sample_mixture(500, 0.0, 0.0, RngSeed{5, r});
    from_normal[r] = hc_star(pvalues_one_sided(s.x)).score;
    RngStream rng(RngSeed{6, r});
    from_uniform[r] = hc_star(PValueSeries::from_sorted(sorted_uniform_sample(500, rng))).score;
  }
  EXPECT_LE(ks_two_sample(from_normal, from_uniform), 0.08);
}

TEST(Detection, NullAlternativeGivesSizeLevelPower) {
  DetectionConfig cfg;
  cfg.n = 2000;
  cfg.epsilon = 0.0;
  cfg.tau = 2.0;
  cfg.reps = 400;
  cfg.seed = 3;
  cfg.calibration_reps = 4000;
  const auto s = detection_experiment(cfg);
  EXPECT_NEAR(s.power, 0.05, 0.035);
  EXPECT_NEAR(s.size, 0.05, 0.035);
  EXPECT_EQ(s.null_scores.size(), 400u);
  EXPECT_THROW(detection_experiment(DetectionConfig{.n = 100, .reps = 1}), InvalidInput);
}

TEST(Detection, UndetectableRegionHasNoPower) {
  const ArwParams p(100000, 0.9, 0.1);
  DetectionConfig cfg;
  cfg.n = p.n();
  cfg.epsilon = p.epsilon();
  cfg.tau = p.tau();
  cfg.reps = 100;
  cfg.seed = 12;
  cfg.calibration_reps = 2000;
  EXPECT_LE(detection_experiment(cfg).power, 0.05 + 0.1);
}

TEST(Detection, PowerMonotoneInStrength) {
  const std::size_t n = 10000;
  const double crit = simulate_critical(n, 0.05, HcVariant::plus, 0.5, 4000, 91).quantile;
  double previous = 0.0;
  for (double r : {0.1, 0.3, 0.5, 0.7}) {
    const ArwParams p(n, 0.6, r);
    DetectionConfig cfg;
    cfg.n = n;
    cfg.epsilon = p.epsilon();
    cfg.tau = p.tau();
    cfg.reps = 1000;
    cfg.seed = 100;
    cfg.critical = crit;
    const double power = detection_experiment(cfg).power;
    EXPECT_GE(power + 0.02, previous) << r;
    previous = power;
  }
  EXPECT_GT(previous, 0.8);
}

TEST(Permutation, StrongSignalHitsFloor) {
  const auto m = noise_matrix(40, 200, 4, 0.8);
  const auto r = permutation_pvalue(m, 999, 8);
  EXPECT_DOUBLE_EQ(r.p_value, 0.001);
  EXPECT_EQ(r.shuffle_scores.size(), 999u);
}

TEST(Permutation, EstimatorBounds) {
  const auto m = noise_matrix(20, 60, 9);
  const auto r = permutation_pvalue(m, 49, 2);
  EXPECT_GE(r.p_value, 1.0 / 50.0);
  EXPECT_LE(r.p_value, 1.0);
  const auto exceed = std::count_if(r.shuffle_scores.begin(), r.shuffle_scores.end(),
                                    [&](double s) { return s >= r.observed; });
  EXPECT_DOUBLE_EQ(r.p_value, (1.0 + exceed) / 50.0);
  EXPECT_THROW(permutation_pvalue(m, 0, 1), InvalidInput);
}

TEST(Permutation, PureNoiseMeanNearHalf) {
  double total = 0.0;
  for (std::uint64_t meta = 0; meta < 200; ++meta) {
    total += permutation_pvalue(noise_matrix(16, 40, 1000 + meta), 99, meta).p_value;
  }
  EXPECT_GE(total / 200.0, 0.45);
  EXPECT_LE(total / 200.0, 0.55);
}

TEST(Permutation, ClassRelabelingInvariant) {
  auto m = noise_matrix(20, 50, 21, 0.8);
  const auto a = permutation_pvalue(m, 50, 5);
  for (int& l : m.labels) l = -l;
  const auto b = permutation_pvalue(m, 50, 5);
  EXPECT_EQ(a.observed, b.observed);
  EXPECT_EQ(a.shuffle_scores, b.shuffle_scores);
  EXPECT_EQ(a.p_value, b.p_value);
}

TEST(Permutation, DegenerateMatrixRejected) {
  auto m = noise_matrix(10, 5, 1);
  std::fill(m.labels.begin(), m.labels.end(), 1);
  EXPECT_THROW(permutation_pvalue(m, 10, 1), InvalidInput);
}
