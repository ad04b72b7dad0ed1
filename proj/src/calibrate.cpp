#include "hicrit/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "hicrit/csv.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/parallel.hpp"

namespace hicrit {

double gumbel_critical(std::size_t n, double alpha) {
  if (n < 16) throw InvalidInput("gumbel_critical: need N >= 16 so that log log log N is defined");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("gumbel_critical: alpha must lie in (0, 1)");
  const double loglog = std::log(std::log(static_cast<double>(n)));
  const double b = std::sqrt(2.0 * loglog);
  const double c = 2.0 * loglog + 0.5 * (std::log(loglog) - std::log(4.0 * std::numbers::pi));
  return (c - std::log(std::log(1.0 / (1.0 - alpha)))) / b;
}

std::vector<double> sorted_uniform_sample(std::size_t n, RngStream& rng) {
  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rng.exponential();
    out[i] = total;
  }
  total += rng.exponential();
  const double scale = 1.0 / total;
  for (double& v : out) v *= scale;
  return out;
}

double empirical_quantile(std::vector<double> scores, double alpha) {
  if (scores.empty()) throw InvalidInput("empirical_quantile: no scores");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("empirical_quantile: alpha must lie in (0, 1)");
  const double m = static_cast<double>(scores.size());
  const double raw = (1.0 - alpha) * m;
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  k = std::clamp<std::size_t>(k, 1, scores.size());
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k - 1), scores.end());
  return scores[k - 1];
}

std::vector<double> simulate_null_scores(std::size_t n, HcVariant variant, double alpha0,
                                         std::size_t replicates, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("simulate_null_scores: N must be positive");
  std::vector<double> scores(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    RngStream rng(RngSeed{seed, r});
    auto series = PValueSeries::from_sorted(sorted_uniform_sample(n, rng));
    scores[r] = hc_score(series, variant, alpha0).score;
  });
  return scores;
}

CriticalValueEntry simulate_critical(std::size_t n, double alpha, HcVariant variant, double alpha0,
                                     std::size_t replicates, std::uint64_t seed) {
  if (replicates < 100) throw InvalidInput("simulate_critical: need at least 100 replicates");
  CriticalValueEntry e;
  e.n = n;
  e.alpha = alpha;
  e.variant = variant;
  e.alpha0 = alpha0;
  e.replicates = replicates;
  e.seed = seed;
  e.quantile = empirical_quantile(simulate_null_scores(n, variant, alpha0, replicates, seed), alpha);
  return e;
}

const char* CriticalValueCache::header() { return "N,alpha,variant,alpha0,replicates,seed,rng_version,quantile"; }

CriticalValueCache::CriticalValueCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  const auto lines = csv::read_lines(*path_);
  if (lines.empty()) return;
  if (lines.front() != header()) throw ValidationError(path_->string() + ": unexpected cache header");
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto where = fmt::format("{}:{}", path_->string(), li + 1);
    const auto f = csv::split_line(lines[li]);
    if (f.size() != 8) throw ValidationError(where + ": expected 8 fields");
    CriticalValueEntry e;
    e.n = static_cast<std::size_t>(csv::parse_double(f[0], where));
    e.alpha = csv::parse_double(f[1], where);
    e.variant = parse_variant(f[2]);
    e.alpha0 = csv::parse_double(f[3], where);
    e.replicates = static_cast<std::size_t>(csv::parse_double(f[4], where));
    e.seed = std::stoull(f[5]);
    e.rng_version = f[6];
    e.quantile = csv::parse_double(f[7], where);
    entries_.push_back(std::move(e));
  }
}

std::optional<CriticalValueEntry> CriticalValueCache::find(std::size_t n, double alpha, HcVariant variant,
                                                           double alpha0, std::size_t min_replicates) const {
  std::optional<CriticalValueEntry> best;
  for (const auto& e : entries_) {
    if (e.n != n || e.alpha != alpha || e.variant != variant || e.alpha0 != alpha0) continue;
    if (e.rng_version != kRngVersion || e.replicates < min_replicates) continue;
    if (!best || e.replicates > best->replicates) best = e;
  }
  return best;
}

bool CriticalValueCache::insert(const CriticalValueEntry& entry) {
  for (const auto& e : entries_) {
    if (e.n == entry.n && e.alpha == entry.alpha && e.variant == entry.variant && e.alpha0 == entry.alpha0 &&
        e.replicates == entry.replicates && e.rng_version == entry.rng_version) {
      return false;
    }
  }
  entries_.push_back(entry);
  save();
  return true;
}

void CriticalValueCache::save() const {
  if (!path_) return;
  std::ostringstream out;
  out << header() << '\n';
  for (const auto& e : entries_) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", e.n, csv::exact(e.alpha), to_string(e.variant),
                       csv::exact(e.alpha0), e.replicates, e.seed, e.rng_version, csv::exact(e.quantile));
  }
  csv::atomic_write(*path_, out.str());
}

ResolvePolicy parse_policy(std::string_view name) {
  if (name == "cache_only") return ResolvePolicy::cache_only;
  if (name == "simulate_if_missing") return ResolvePolicy::simulate_if_missing;
  if (name == "gumbel_fallback") return ResolvePolicy::gumbel_fallback;
  throw InvalidInput("unknown resolve policy '" + std::string(name) + "'");
}

CriticalValue critical_value(const CriticalValueRequest& req, ResolvePolicy policy, CriticalValueCache& cache) {
  CriticalValue cv{0.0, req.n, req.variant, req.alpha0, req.alpha, false};
  if (auto hit = cache.find(req.n, req.alpha, req.variant, req.alpha0, req.replicates)) {
    cv.value = hit->quantile;
    return cv;
  }
  switch (policy) {
    case ResolvePolicy::cache_only:
      throw CacheMiss(fmt::format("no cached critical value for N={} alpha={} variant={} alpha0={} reps>={}",
                                  req.n, req.alpha, to_string(req.variant), req.alpha0, req.replicates));
    case ResolvePolicy::simulate_if_missing: {
      const auto entry = simulate_critical(req.n, req.alpha, req.variant, req.alpha0, req.replicates, req.seed);
      cache.insert(entry);
      cv.value = entry.quantile;
      return cv;
    }
    case ResolvePolicy::gumbel_fallback:
      cv.value = gumbel_critical(req.n, req.alpha);
      cv.from_gumbel = true;
      return cv;
  }
  return cv;
}

Decision level_alpha_test(const PValueSeries& series, const CriticalValue& critical) {
  if (series.size() != critical.n) {
    throw InvalidInput(fmt::format("level_alpha_test: series has N={} but the critical value is for N={}",
                                   series.size(), critical.n));
  }
  const double stat = hc_score(series, critical.variant, critical.alpha0).score;
  return stat > critical.value ? Decision::reject : Decision::retain;
}

}  // namespace hicrit
