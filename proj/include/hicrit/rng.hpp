#pragma once

// Counter-based random streams. A stream is fully determined by
// (seed, stream_id); distinct stream ids give statistically independent
// sequences, so Monte Carlo replicates can run on any worker in any order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace hicrit {

/// Identifies the generator family in cache files; bump when draws change.
inline constexpr std::string_view kRngVersion = "philox4x32-10.v1";

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  [[nodiscard]] RngSeed with_stream(std::uint64_t id) const { return {seed, id}; }
};

/// Philox4x32-10 keyed by the seed; the stream id occupies the upper half of
/// the 128-bit counter.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(RngSeed s);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  /// Exp(1).
  double exponential();

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace hicrit
