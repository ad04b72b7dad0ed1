#include "hicrit/pairhc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "hicrit/errors.hpp"

namespace hicrit {

std::vector<std::uint32_t> rank_values(std::span<const double> values) {
  std::vector<std::uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });
  std::vector<std::uint32_t> ranks(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = static_cast<std::uint32_t>(pos + 1);
  return ranks;
}

RankedPairs RankedPairs::from_values(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pair data: x and y lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput(fmt::format("pair {} is not finite", i + 1));
  }
  return {rank_values(x), rank_values(y)};
}

RankedPairs RankedPairs::from_ranks(std::vector<std::uint32_t> rx, std::vector<std::uint32_t> ry) {
  if (rx.size() != ry.size()) throw InvalidInput("rank vectors differ in length");
  auto is_perm = [](const std::vector<std::uint32_t>& r) {
    std::vector<bool> seen(r.size() + 1, false);
    for (auto v : r) {
      if (v < 1 || v > r.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  };
  if (!is_perm(rx) || !is_perm(ry)) throw InvalidInput("ranks must be permutations of 1..n");
  return {std::move(rx), std::move(ry)};
}

Corner parse_corner(std::string_view name) {
  if (name == "upper-right" || name == "upper_right") return Corner::upper_right;
  if (name == "upper-left" || name == "upper_left") return Corner::upper_left;
  if (name == "lower-right" || name == "lower_right") return Corner::lower_right;
  if (name == "lower-left" || name == "lower_left") return Corner::lower_left;
  throw InvalidInput("unknown corner '" + std::string(name) + "'");
}

RankedPairs orient(const RankedPairs& pairs, Corner corner) {
  const auto n = static_cast<std::uint32_t>(pairs.size());
  RankedPairs out = pairs;
  const bool flip_x = corner == Corner::upper_left || corner == Corner::lower_left;
  const bool flip_y = corner == Corner::lower_right || corner == Corner::lower_left;
  if (flip_x) for (auto& r : out.ranks_x) r = n + 1 - r;
  if (flip_y) for (auto& r : out.ranks_y) r = n + 1 - r;
  return out;
}

std::vector<std::size_t> corner_counts(const RankedPairs& pairs) {
  const std::size_t n = pairs.size();
  // Histogram of min ranks, then suffix sums.
  std::vector<std::size_t> hist(n + 2, 0);
  for (std::size_t i = 0; i < n; ++i) ++hist[std::min(pairs.ranks_x[i], pairs.ranks_y[i])];
  std::vector<std::size_t> s(n);
  std::size_t acc = 0;
  for (std::size_t k = n; k >= 1; --k) {
    acc += hist[k];
    s[k - 1] = acc;
  }
  return s;
}

std::vector<double> pair_hc_components(const RankedPairs& pairs) {
  const std::size_t n = pairs.size();
  if (n < 2) throw InvalidInput("pair_hc_components: need n >= 2");
  const auto s = corner_counts(pairs);
  const double nn = static_cast<double>(n);
  const double root_n = std::sqrt(nn);
  std::vector<double> out(n);
  out[0] = std::numeric_limits<double>::quiet_NaN();
  out[n - 1] = 0.0;
  for (std::size_t k = 2; k < n; ++k) {
    const double q = (1.0 - static_cast<double>(k) / nn) * (1.0 - static_cast<double>(k) / nn);
    out[k - 1] = root_n * (static_cast<double>(s[k - 1]) / nn - q) / std::sqrt(q * (1.0 - q));
  }
  return out;
}

HcResult pair_hc_star(const RankedPairs& pairs, double alpha0, Corner corner) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("pair_hc_star: alpha0 must lie in (0, 1]");
  const std::size_t n = pairs.size();
  const auto comps = pair_hc_components(orient(pairs, corner));
  const double raw = (1.0 - alpha0) * static_cast<double>(n);
  const auto first = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw))));
  if (first > n - 1) throw InvalidInput("pair_hc_star: empty index range");
  HcResult r;
  r.variant = HcVariant::star;
  r.alpha0 = alpha0;
  r.argmax_index = first;
  r.score = comps[first - 1];
  for (std::size_t k = first + 1; k <= n - 1; ++k) {
    if (comps[k - 1] > r.score) {
      r.score = comps[k - 1];
      r.argmax_index = k;
    }
  }
  return r;
}

BivariateSample sample_bivariate_mixture(std::size_t n, double epsilon, double tau, double rho, RngSeed seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("sample_bivariate_mixture: epsilon must lie in [0, 1]");
  if (!(std::fabs(rho) < 1.0)) throw InvalidInput("sample_bivariate_mixture: need |rho| < 1");
  RngStream rng(seed);
  BivariateSample s;
  s.x.resize(n);
  s.y.resize(n);
  s.contaminated.resize(n);
  const double cross = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hit = rng.uniform() < epsilon;
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    s.contaminated[i] = hit;
    if (hit) {
      s.x[i] = tau + z1;
      s.y[i] = tau + rho * z1 + cross * z2;
    } else {
      s.x[i] = z1;
      s.y[i] = z2;
    }
  }
  return s;
}

std::span<const BivariatePreset> bivariate_presets() {
  static constexpr std::array<BivariatePreset, 5> kPresets{{
      {0.0, 0.0, 0.0},
      {0.02, 2.5, 0.0},
      {0.02, 2.0, 0.5},
      {0.01, 2.5, 0.5},
      {0.01, 3.0, 0.25},
  }};
  return kPresets;
}

}  // namespace hicrit
