#pragma once

// Rank-based HC for a sparse set of correlated pairs among many independent
// bivariate observations. Ranks run 1..n with n the largest value; S_k
// counts pairs whose smaller rank is at least k (the upper-right corner).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hicrit/hc.hpp"
#include "hicrit/rng.hpp"

namespace hicrit {

struct RankedPairs {
  std::vector<std::uint32_t> ranks_x;
  std::vector<std::uint32_t> ranks_y;

  [[nodiscard]] std::size_t size() const { return ranks_x.size(); }

  /// Ranks each coordinate; ties go to the earlier index first.
  static RankedPairs from_values(std::span<const double> x, std::span<const double> y);
  /// Validates that both vectors are permutations of 1..n.
  static RankedPairs from_ranks(std::vector<std::uint32_t> rx, std::vector<std::uint32_t> ry);
};

/// 1-based ranks of `values`, ties broken by (value, index).
std::vector<std::uint32_t> rank_values(std::span<const double> values);

enum class Corner { upper_right, upper_left, lower_right, lower_left };

Corner parse_corner(std::string_view name);

/// Reflects ranks so that `corner` becomes the upper-right corner.
RankedPairs orient(const RankedPairs& pairs, Corner corner);

/// S_1..S_n (index k-1 holds S_k) in O(n).
std::vector<std::size_t> corner_counts(const RankedPairs& pairs);

/// Index k-1 holds pairHC_{n,k}. k = 1 is excluded (NaN); k = n is 0.
std::vector<double> pair_hc_components(const RankedPairs& pairs);

/// Max over ceil((1 - alpha0) n) <= k <= n - 1. argmax_index is k.
HcResult pair_hc_star(const RankedPairs& pairs, double alpha0 = 0.5, Corner corner = Corner::upper_right);

struct BivariateSample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<bool> contaminated;
};

/// (1 - eps) N(0, I2) + eps N(tau 1_2, [[1, rho], [rho, 1]]).
BivariateSample sample_bivariate_mixture(std::size_t n, double epsilon, double tau, double rho, RngSeed seed);

struct BivariatePreset {
  double epsilon;
  double tau;
  double rho;
};

/// The five simulation settings: the null plus four sparse alternatives.
std::span<const BivariatePreset> bivariate_presets();

}  // namespace hicrit
