#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "hicrit/calibrate.hpp"
#include "hicrit/csv.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/parallel.hpp"

using namespace hicrit;

namespace {

// 10^5 null replicates at N = 1000, shared by several tests.
const std::vector<double>& null_plus_1000() {
  static const auto s = simulate_null_scores(1000, HcVariant::plus, 0.5, 100000, 20240101);
  return s;
}
const std::vector<double>& null_star_1000() {
  static const auto s = simulate_null_scores(1000, HcVariant::star, 0.5, 100000, 20240102);
  return s;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "hicrit_unit";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

PValueSeries grid(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return PValueSeries::from_sorted(v);
}

}  // namespace

TEST(Gumbel, Examples) {
  EXPECT_NEAR(round2(gumbel_critical(1000, 0.05)), 3.00, 1e-9);
  EXPECT_NEAR(round2(gumbel_critical(1000, 0.01)), 3.83, 1e-9);
  // Printed bracket is 4.97; the closed form gives 4.9645.
  EXPECT_NEAR(gumbel_critical(125000, 0.001), 4.97, 0.01 + 1e-9);
  EXPECT_THROW(gumbel_critical(15, 0.05), InvalidInput);
  EXPECT_THROW(gumbel_critical(1000, 0.0), InvalidInput);
}

TEST(Gumbel, TablePlusBrackets) {
  const std::size_t ns[] = {1000, 5000, 25000, 125000};
  const double alphas[] = {0.05, 0.01, 0.005, 0.001};
  const double table[4][4] = {{3.00, 3.08, 3.14, 3.19},
                              {3.83, 3.87, 3.90, 3.93},
                              {4.18, 4.20, 4.22, 4.24},
                              {5.00, 4.98, 4.97, 4.97}};
  for (int a = 0; a < 4; ++a) {
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(round2(gumbel_critical(ns[k], alphas[a])), table[a][k], 0.01 + 1e-9) << ns[k] << " " << alphas[a];
    }
  }
}

TEST(EmpiricalQuantile, CeilingRule) {
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[i] = 100 - i;  // 1..100 in reverse
  EXPECT_EQ(empirical_quantile(s, 0.05), 95.0);
  EXPECT_EQ(empirical_quantile(s, 0.011), 99.0);  // ceil(98.9)
  EXPECT_EQ(empirical_quantile(s, 0.5), 50.0);
  EXPECT_THROW(empirical_quantile({}, 0.05), InvalidInput);
}

TEST(SimulateCritical, TableColumnN1000) {
  const auto& plus = null_plus_1000();
  EXPECT_NEAR(empirical_quantile(plus, 0.05), 3.17, 0.05);
  EXPECT_NEAR(empirical_quantile(plus, 0.001), 5.03, 0.15);
  EXPECT_NEAR(empirical_quantile(null_star_1000(), 0.05), 4.77, 0.1);
}

TEST(SimulateCritical, StarTailDominatesPlus) {
  EXPECT_GT(empirical_quantile(null_star_1000(), 0.001), 3.0 * empirical_quantile(null_plus_1000(), 0.001));
}

TEST(SimulateCritical, MatchesSharedScores) {
  const auto e = simulate_critical(1000, 0.05, HcVariant::plus, 0.5, 100000, 20240101);
  EXPECT_EQ(e.quantile, empirical_quantile(null_plus_1000(), 0.05));
  EXPECT_EQ(e.replicates, 100000u);
  EXPECT_EQ(e.rng_version, kRngVersion);
  EXPECT_THROW(simulate_critical(1000, 0.05, HcVariant::plus, 0.5, 99, 1), InvalidInput);
}

TEST(SimulateCritical, DeterministicAndThreadIndependent) {
  const unsigned before = thread_limit();
  set_thread_limit(1);
  const auto a = simulate_critical(500, 0.05, HcVariant::plus, 0.5, 2000, 99);
  set_thread_limit(4);
  const auto b = simulate_critical(500, 0.05, HcVariant::plus, 0.5, 2000, 99);
  set_thread_limit(before);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.quantile), std::bit_cast<std::uint64_t>(b.quantile));
  const auto c = simulate_critical(500, 0.05, HcVariant::plus, 0.5, 2000, 100);
  EXPECT_NE(a.quantile, c.quantile);
}

TEST(SimulateCritical, EmpiricalSize) {
  const double crit = empirical_quantile(null_plus_1000(), 0.05);
  const auto fresh = simulate_null_scores(1000, HcVariant::plus, 0.5, 10000, 555);
  std::size_t rejected = 0;
  for (double s : fresh) rejected += s > crit;
  EXPECT_NEAR(static_cast<double>(rejected) / 10000.0, 0.05, 0.01);
}

TEST(SimulateCritical, SlowGrowthInN) {
  const double q1 = empirical_quantile(null_plus_1000(), 0.05);
  const double q2 = empirical_quantile(simulate_null_scores(5000, HcVariant::plus, 0.5, 50000, 31), 0.05);
  const double q3 = empirical_quantile(simulate_null_scores(25000, HcVariant::plus, 0.5, 20000, 32), 0.05);
  EXPECT_LE(q1, q2);
  EXPECT_LE(q2, q3);
  EXPECT_LT(q3 - q1, 0.2);
}

TEST(Cache, PersistAndReload) {
  const auto path = temp_path("cache_roundtrip.csv");
  CriticalValueEntry e{1000, 0.05, HcVariant::plus, 0.5, 2000, 7, std::string(kRngVersion), 3.2006485185047535};
  {
    CriticalValueCache cache(path);
    EXPECT_TRUE(cache.insert(e));
    EXPECT_FALSE(cache.insert(e));
  }
  const auto lines = csv::read_lines(path);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "N,alpha,variant,alpha0,replicates,seed,rng_version,quantile");
  CriticalValueCache reloaded(path);
  const auto hit = reloaded.find(1000, 0.05, HcVariant::plus, 0.5, 1000);
  ASSERT_TRUE(hit);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(hit->quantile), std::bit_cast<std::uint64_t>(e.quantile));
  EXPECT_FALSE(reloaded.find(1000, 0.05, HcVariant::plus, 0.5, 5000));
  EXPECT_FALSE(reloaded.find(1000, 0.05, HcVariant::star, 0.5, 1000));
  EXPECT_FALSE(reloaded.find(1000, 0.01, HcVariant::plus, 0.5, 1000));
  EXPECT_FALSE(reloaded.find(1000, 0.05, HcVariant::plus, 0.25, 1000));
}

TEST(Cache, PrefersMostReplicates) {
  CriticalValueCache cache;
  cache.insert({100, 0.05, HcVariant::plus, 0.5, 200, 1, std::string(kRngVersion), 1.0});
  cache.insert({100, 0.05, HcVariant::plus, 0.5, 800, 1, std::string(kRngVersion), 2.0});
  EXPECT_EQ(cache.find(100, 0.05, HcVariant::plus, 0.5, 100)->quantile, 2.0);
}

TEST(CriticalValue, Policies) {
  CriticalValueCache cache;
  const CriticalValueRequest req{400, 0.05, HcVariant::plus, 0.5, 500, 3};
  EXPECT_THROW(critical_value(req, ResolvePolicy::cache_only, cache), CacheMiss);

  const auto g = critical_value(req, ResolvePolicy::gumbel_fallback, cache);
  EXPECT_TRUE(g.from_gumbel);
  EXPECT_EQ(g.value, gumbel_critical(400, 0.05));
  EXPECT_TRUE(cache.entries().empty());

  const auto s1 = critical_value(req, ResolvePolicy::simulate_if_missing, cache);
  EXPECT_EQ(cache.entries().size(), 1u);
  const auto s2 = critical_value(req, ResolvePolicy::simulate_if_missing, cache);
  EXPECT_EQ(cache.entries().size(), 1u);
  EXPECT_EQ(s1.value, s2.value);
  EXPECT_EQ(critical_value(req, ResolvePolicy::cache_only, cache).value, s1.value);
  EXPECT_EQ(parse_policy("cache_only"), ResolvePolicy::cache_only);
  EXPECT_THROW(parse_policy("sometimes"), InvalidInput);
}

TEST(LevelAlphaTest, Decisions) {
  const CriticalValue crit{3.2, 1000, HcVariant::plus, 0.5, 0.05, false};
  EXPECT_EQ(level_alpha_test(grid(1000), crit), Decision::retain);
  const CriticalValue at_zero{0.0, 1000, HcVariant::plus, 0.5, 0.05, false};
  EXPECT_EQ(level_alpha_test(grid(1000), at_zero), Decision::retain);  // strict inequality
  EXPECT_THROW(level_alpha_test(grid(999), crit), InvalidInput);

  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i + 1.0) / 1000.0;
  for (std::size_t i = 1; i < 40; ++i) v[i] = 1e-4 * static_cast<double>(i + 10);
  const auto series = PValueSeries::from_unsorted(v);
  ASSERT_GT(hc_plus(series).score, 7.0);
  EXPECT_EQ(level_alpha_test(series, crit), Decision::reject);
}
