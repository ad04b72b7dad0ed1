#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "hicrit/rng.hpp"

using namespace hicrit;

TEST(Rng, SameSeedAndStreamReproduce) {
  RngStream a({42, 3});
  RngStream b({42, 3});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  RngStream a({42, 0});
  RngStream b({42, 1});
  RngStream c({43, 0});
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, UniformOpenInterval) {
  RngStream r({1, 0});
  double sum = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / m, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / m));
}

TEST(Rng, NormalMoments) {
  RngStream r({2, 0});
  const int m = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
}

TEST(Rng, ExponentialMean) {
  RngStream r({3, 0});
  const int m = 200000;
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += r.exponential();
  EXPECT_NEAR(s / m, 1.0, 5.0 / std::sqrt(m));
}

TEST(Rng, BelowIsUniformAndBounded) {
  RngStream r({4, 0});
  std::vector<int> counts(7, 0);
  const int m = 70000;
  for (int i = 0; i < m; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, m / 7.0, 5.0 * std::sqrt(m / 7.0));
}

TEST(Rng, ShuffleIsPermutation) {
  RngStream r({5, 0});
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  r.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}
