#pragma once

// Critical values h(N, alpha) for HC as a level-alpha test: the Gumbel
// closed form and seeded Monte Carlo quantiles backed by a CSV cache.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hicrit/hc.hpp"
#include "hicrit/rng.hpp"

namespace hicrit {

/// h_G(N, alpha) = b_N^{-1} [c_N - log log(1/(1-alpha))], N >= 16.
double gumbel_critical(std::size_t n, double alpha);

/// N ascending Unif(0,1) order statistics in O(N), via normalized partial
/// sums of N + 1 exponential spacings.
std::vector<double> sorted_uniform_sample(std::size_t n, RngStream& rng);

/// Empirical (1 - alpha) quantile: the order statistic at 1-based index
/// ceil((1 - alpha) * size) of the sorted scores.
double empirical_quantile(std::vector<double> scores, double alpha);

/// One HC score per replicate on N i.i.d. Unif(0,1) P-values. Replicate r
/// draws from stream r of `seed`, so the result is independent of threads.
std::vector<double> simulate_null_scores(std::size_t n, HcVariant variant, double alpha0,
                                         std::size_t replicates, std::uint64_t seed);

struct CriticalValueEntry {
  std::size_t n = 0;
  double alpha = 0.05;
  HcVariant variant = HcVariant::plus;
  double alpha0 = 0.5;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string rng_version{kRngVersion};
  double quantile = 0.0;
};

CriticalValueEntry simulate_critical(std::size_t n, double alpha, HcVariant variant, double alpha0,
                                     std::size_t replicates, std::uint64_t seed);

/// Rows `N,alpha,variant,alpha0,replicates,seed,rng_version,quantile`.
/// Entries are never overwritten; every insert rewrites the whole file via an
/// atomic rename.
class CriticalValueCache {
 public:
  CriticalValueCache() = default;  // in-memory only
  explicit CriticalValueCache(std::filesystem::path path);

  /// Best entry (most replicates) matching N, alpha, variant, alpha0 and the
  /// current rng version with at least `min_replicates`.
  [[nodiscard]] std::optional<CriticalValueEntry> find(std::size_t n, double alpha, HcVariant variant,
                                                       double alpha0, std::size_t min_replicates) const;

  /// Returns false if an entry with the same key already exists.
  bool insert(const CriticalValueEntry& entry);

  [[nodiscard]] const std::vector<CriticalValueEntry>& entries() const { return entries_; }

  static const char* header();

 private:
  void save() const;

  std::optional<std::filesystem::path> path_;
  std::vector<CriticalValueEntry> entries_;
};

enum class ResolvePolicy { cache_only, simulate_if_missing, gumbel_fallback };

ResolvePolicy parse_policy(std::string_view name);

struct CriticalValueRequest {
  std::size_t n = 0;
  double alpha = 0.05;
  HcVariant variant = HcVariant::plus;
  double alpha0 = 0.5;
  std::size_t replicates = 100000;
  std::uint64_t seed = 0;
};

/// A critical value together with what it was computed for.
struct CriticalValue {
  double value = 0.0;
  std::size_t n = 0;
  HcVariant variant = HcVariant::plus;
  double alpha0 = 0.5;
  double alpha = 0.05;
  bool from_gumbel = false;
};

CriticalValue critical_value(const CriticalValueRequest& request, ResolvePolicy policy,
                             CriticalValueCache& cache);

enum class Decision { reject, retain };

/// Rejects iff the statistic strictly exceeds the critical value.
Decision level_alpha_test(const PValueSeries& series, const CriticalValue& critical);

}  // namespace hicrit
