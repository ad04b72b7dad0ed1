#include "hicrit/hc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hicrit/errors.hpp"
#include "hicrit/numerics.hpp"

namespace hicrit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("P-value series must be nonempty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v > 0.0 && v <= 1.0)) {
      throw InvalidInput("P-value #" + std::to_string(i + 1) + " = " + std::to_string(v) +
                         " outside (0, 1]");
    }
  }
}

void check_alpha0(double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("alpha0 must lie in (0, 1]");
}

double component(std::size_t n, std::size_t i, double p) {
  const double frac = static_cast<double>(i) / static_cast<double>(n);
  if (p >= 1.0) return i == n ? 0.0 : kNaN;
  return std::sqrt(static_cast<double>(n)) * (frac - p) / std::sqrt(p * (1.0 - p));
}

// Running argmax; ties keep the earliest index.
struct Argmax {
  double best = -kInf;
  std::size_t index = 0;
  std::size_t excluded = 0;

  void offer(std::size_t i, double value) {
    if (std::isnan(value)) {
      ++excluded;
      return;
    }
    if (index == 0 || value > best) {
      best = value;
      index = i;
    }
  }

  HcResult result(HcVariant variant, double alpha0) const {
    HcResult r;
    r.variant = variant;
    r.alpha0 = alpha0;
    r.excluded = excluded;
    if (index == 0) {
      r.score = -kInf;
      r.empty_range = true;
    } else {
      r.score = best;
      r.argmax_index = index;
    }
    return r;
  }
};

std::size_t checked_bound(std::size_t n, double alpha0) {
  check_alpha0(alpha0);
  const std::size_t bound = index_bound(n, alpha0);
  if (bound < 1) throw InvalidInput("empty index range: floor(alpha0 * N) < 1");
  return bound;
}

}  // namespace

PValueSeries PValueSeries::from_unsorted(std::vector<double> values) {
  validate(values);
  std::sort(values.begin(), values.end());
  return PValueSeries(std::move(values));
}

PValueSeries PValueSeries::from_sorted(std::vector<double> values) {
  validate(values);
  if (!std::is_sorted(values.begin(), values.end())) {
    throw InvalidInput("P-value series is not sorted ascending");
  }
  return PValueSeries(std::move(values));
}

std::string_view to_string(HcVariant v) {
  switch (v) {
    case HcVariant::star: return "star";
    case HcVariant::plus: return "plus";
    case HcVariant::feature: return "feature";
    case HcVariant::bj: return "bj";
    case HcVariant::alr: return "alr";
  }
  return "unknown";
}

HcVariant parse_variant(std::string_view name) {
  if (name == "star") return HcVariant::star;
  if (name == "plus") return HcVariant::plus;
  if (name == "feature") return HcVariant::feature;
  if (name == "bj") return HcVariant::bj;
  if (name == "alr") return HcVariant::alr;
  throw InvalidInput("unknown HC variant '" + std::string(name) + "'");
}

std::size_t index_bound(std::size_t n, double alpha0) {
  // The small slack absorbs representation error in products such as 0.29 * 100.
  const double raw = alpha0 * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
}

double hc_at_level(std::size_t n, double alpha, std::size_t count_significant) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("hc_at_level: alpha must lie in (0, 1)");
  if (n == 0 || count_significant > n) throw InvalidInput("hc_at_level: need 0 <= count <= N, N >= 1");
  const double nn = static_cast<double>(n);
  return std::sqrt(nn) * (static_cast<double>(count_significant) / nn - alpha) /
         std::sqrt(alpha * (1.0 - alpha));
}

double hc_component(std::size_t i, const PValueSeries& series) {
  if (i < 1 || i > series.size()) throw InvalidInput("hc_component: index out of range");
  return component(series.size(), i, series.order_stat(i));
}

std::vector<double> hc_components(const PValueSeries& series) {
  const std::size_t n = series.size();
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) out[i - 1] = component(n, i, series.order_stat(i));
  return out;
}

HcResult hc_star(const PValueSeries& series, double alpha0) {
  const std::size_t n = series.size();
  const std::size_t bound = checked_bound(n, alpha0);
  Argmax am;
  for (std::size_t i = 1; i <= bound; ++i) am.offer(i, component(n, i, series.order_stat(i)));
  return am.result(HcVariant::star, alpha0);
}

HcResult hc_plus(const PValueSeries& series, double alpha0) {
  const std::size_t n = series.size();
  const std::size_t bound = checked_bound(n, alpha0);
  const double floor_p = 1.0 / static_cast<double>(n);
  // The series is sorted, so admissible indices form a suffix of [1, bound].
  const auto values = series.values();
  const auto first = static_cast<std::size_t>(
      std::upper_bound(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(bound), floor_p) -
      values.begin());
  Argmax am;
  for (std::size_t i = first + 1; i <= bound; ++i) am.offer(i, component(n, i, series.order_stat(i)));
  return am.result(HcVariant::plus, alpha0);
}

HcResult hc_score(const PValueSeries& series, HcVariant variant, double alpha0) {
  switch (variant) {
    case HcVariant::star: return hc_star(series, alpha0);
    case HcVariant::plus: return hc_plus(series, alpha0);
    case HcVariant::feature: return hc_feature_max(series, alpha0);
    case HcVariant::bj: return berk_jones(series);
    case HcVariant::alr: return avg_likelihood_ratio(series, alpha0);
  }
  throw InvalidInput("hc_score: unsupported variant");
}

HcResult hc_pvalue_bounded(const PValueSeries& series, double lower, double upper) {
  const std::size_t n = series.size();
  const auto values = series.values();
  const auto lo = std::lower_bound(values.begin(), values.end(), lower) - values.begin();
  const auto hi = std::upper_bound(values.begin(), values.end(), upper) - values.begin();
  Argmax am;
  for (auto k = lo; k < hi; ++k) {
    const auto i = static_cast<std::size_t>(k) + 1;
    am.offer(i, component(n, i, values[static_cast<std::size_t>(k)]));
  }
  return am.result(HcVariant::plus, upper);
}

std::vector<double> hc_feature_scores(const PValueSeries& series) {
  const std::size_t n = series.size();
  if (n < 2) throw InvalidInput("hc_feature_scores: need N >= 2");
  const double nn = static_cast<double>(n);
  const double root_n = std::sqrt(nn);
  std::vector<double> out(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double frac = static_cast<double>(i) / nn;
    out[i - 1] = root_n * (frac - series.order_stat(i)) / std::sqrt(frac * (1.0 - frac));
  }
  return out;
}

HcResult hc_feature_max(const PValueSeries& series, double alpha0) {
  const std::size_t n = series.size();
  const std::size_t bound = std::min(checked_bound(n, alpha0), n - 1);
  const auto scores = hc_feature_scores(series);
  Argmax am;
  for (std::size_t i = 1; i <= bound; ++i) am.offer(i, scores[i - 1]);
  return am.result(HcVariant::feature, alpha0);
}

HcResult berk_jones(const PValueSeries& series) {
  const std::size_t n = series.size();
  const double nn = static_cast<double>(n);
  Argmax am;
  for (std::size_t i = 1; i <= n; ++i) {
    const double d = binomial_kl(series.order_stat(i), static_cast<double>(i) / nn);
    am.offer(i, std::isinf(d) ? kNaN : nn * d);
  }
  HcResult r = am.result(HcVariant::bj, 1.0);
  if (r.empty_range) r.score = 0.0;
  return r;
}

HcResult avg_likelihood_ratio(const PValueSeries& series, double alpha0) {
  const std::size_t n = series.size();
  if (n <= 3) throw InvalidInput("avg_likelihood_ratio: need N >= 4 so that log(N/3) > 0");
  const std::size_t bound = checked_bound(n, alpha0);
  const double nn = static_cast<double>(n);
  const double log_log_term = std::log(2.0 * std::log(nn / 3.0));

  std::vector<double> log_terms;
  log_terms.reserve(bound);
  std::size_t excluded = 0;
  for (std::size_t i = 1; i <= bound; ++i) {
    const double d = binomial_kl(series.order_stat(i), static_cast<double>(i) / nn);
    if (std::isinf(d)) {
      ++excluded;
      continue;
    }
    // log w_i + log LR_i = -log(2 i log(N/3)) + N max(D, 0)
    log_terms.push_back(-std::log(static_cast<double>(i)) - log_log_term + nn * std::max(d, 0.0));
  }

  HcResult r;
  r.variant = HcVariant::alr;
  r.alpha0 = alpha0;
  r.excluded = excluded;
  if (log_terms.empty()) {
    r.score = -kInf;
    r.empty_range = true;
    return r;
  }
  const double top = *std::max_element(log_terms.begin(), log_terms.end());
  double acc = 0.0;
  for (double t : log_terms) acc += std::exp(t - top);
  r.score = top + std::log(acc);
  return r;
}

double gof_theoretical(const PValueSeries& series, const Cdf& f0, IndexRange range) {
  const std::size_t n = series.size();
  if (range.first < 1 || range.last > n) throw InvalidInput("gof_theoretical: range outside [1, N]");
  const double nn = static_cast<double>(n);
  const auto values = series.values();
  double best = 0.0;
  std::size_t below = 0;  // #{pi <= t}, advanced monotonically
  for (std::size_t i = range.first; i <= range.last; ++i) {
    const double t = static_cast<double>(i) / nn;
    while (below < n && values[below] <= t) ++below;
    const double f = f0(t);
    if (!(f > 0.0 && f < 1.0)) continue;
    const double fn = static_cast<double>(below) / nn;
    best = std::max(best, std::fabs(fn - f) / std::sqrt(f * (1.0 - f)));
  }
  return std::sqrt(nn) * best;
}

double gof_empirical(const PValueSeries& series, const Cdf& f0, IndexRange range) {
  const std::size_t n = series.size();
  if (range.first < 1 || range.last > n) throw InvalidInput("gof_empirical: range outside [1, N]");
  const double nn = static_cast<double>(n);
  double best = 0.0;
  for (std::size_t i = range.first; i <= range.last; ++i) {
    const double f = f0(series.order_stat(i));
    if (!(f > 0.0 && f < 1.0)) continue;
    best = std::max(best, std::fabs(static_cast<double>(i) / nn - f) / std::sqrt(f * (1.0 - f)));
  }
  return std::sqrt(nn) * best;
}

std::size_t bh_fdr_select(const PValueSeries& series, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("bh_fdr_select: q must lie in (0, 1)");
  const std::size_t n = series.size();
  const double nn = static_cast<double>(n);
  for (std::size_t k = n; k >= 1; --k) {
    if (series.order_stat(k) / (static_cast<double>(k) / nn) <= q) return k;
  }
  return 0;
}

}  // namespace hicrit
