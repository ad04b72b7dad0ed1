#pragma once

// The Higher Criticism family over sorted P-values. Every index argument and
// every recorded argmax is 1-based, so formulas read exactly as written in
// the literature: component i uses the i-th smallest P-value pi_(i).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hicrit {

/// Ascending P-values, each in (0, 1].
class PValueSeries {
 public:
  /// Validates and sorts.
  static PValueSeries from_unsorted(std::vector<double> values);
  /// Validates; throws if the input is not weakly ascending.
  static PValueSeries from_sorted(std::vector<double> values);

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  /// pi_(i), 1-based.
  [[nodiscard]] double order_stat(std::size_t i) const { return values_[i - 1]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

 private:
  explicit PValueSeries(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

enum class HcVariant { star, plus, feature, bj, alr };

std::string_view to_string(HcVariant v);
HcVariant parse_variant(std::string_view name);

struct HcResult {
  double score = 0.0;
  std::optional<std::size_t> argmax_index;  // 1-based
  HcVariant variant = HcVariant::star;
  double alpha0 = 0.5;
  bool empty_range = false;     // no admissible index; score is -inf
  std::size_t excluded = 0;     // indices dropped for a degenerate term
};

/// Largest index admitted by the bound i <= alpha0 * N (floor, inclusive).
std::size_t index_bound(std::size_t n, double alpha0);

/// Tukey's second-level statistic at a fixed level alpha.
double hc_at_level(std::size_t n, double alpha, std::size_t count_significant);

/// sqrt(N) (i/N - pi_(i)) / sqrt(pi_(i) (1 - pi_(i))). A P-value of exactly
/// one gives 0 at i = N and NaN (excluded) elsewhere.
double hc_component(std::size_t i, const PValueSeries& series);

/// All components, index i-1 holding component i; NaN marks exclusions.
std::vector<double> hc_components(const PValueSeries& series);

/// Orthodox HC: max over 1 <= i <= floor(alpha0 N).
HcResult hc_star(const PValueSeries& series, double alpha0 = 0.5);

/// As hc_star but only over indices with pi_(i) > 1/N.
HcResult hc_plus(const PValueSeries& series, double alpha0 = 0.5);

/// Dispatches star/plus.
HcResult hc_score(const PValueSeries& series, HcVariant variant, double alpha0 = 0.5);

/// OHC restricted by P-value bounds lower <= pi_(i) <= upper instead of an
/// index bound (the form used on correlation P-values).
HcResult hc_pvalue_bounded(const PValueSeries& series, double lower, double upper);

/// Feature-selection scores sqrt(N) (i/N - pi_(i)) / sqrt((i/N)(1 - i/N)),
/// for i = 1..N-1 (the i = N denominator vanishes).
std::vector<double> hc_feature_scores(const PValueSeries& series);

/// Max of the feature scores over 1 <= i <= min(floor(alpha0 N), N - 1).
HcResult hc_feature_max(const PValueSeries& series, double alpha0);

/// Berk-Jones: max_i N * D(pi_(i), i/N). Infinite terms are excluded and
/// counted in `excluded`; an all-excluded series scores 0.
HcResult berk_jones(const PValueSeries& series);

/// Average likelihood ratio, returned as log(ALR) in `score`. Requires N >= 4.
HcResult avg_likelihood_ratio(const PValueSeries& series, double alpha0 = 0.5);

/// Inclusive 1-based index range for the goodness-of-fit maxima.
struct IndexRange {
  std::size_t first = 1;
  std::size_t last = 1;

  static IndexRange full(std::size_t n) { return {1, n}; }
  /// Drops i = 1 and i > alpha0 N.
  static IndexRange restricted(std::size_t n, double alpha0) { return {2, index_bound(n, alpha0)}; }
};

using Cdf = std::function<double(double)>;

/// Theoretically standardized fit between the empirical CDF of the series
/// and F0 on the grid i/N.
double gof_theoretical(const PValueSeries& series, const Cdf& f0, IndexRange range);

/// Empirically standardized fit, evaluating F0 at the order statistics.
double gof_empirical(const PValueSeries& series, const Cdf& f0, IndexRange range);

/// Benjamini-Hochberg: largest k with pi_(k) / (k/N) <= q, or 0.
std::size_t bh_fdr_select(const PValueSeries& series, double q);

}  // namespace hicrit
