#pragma once

// Asymptotic Rare/Weak sparse Gaussian mixtures, the detection experiment
// harness, and label-shuffle P-values for HC scores on data matrices.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hicrit/hc.hpp"
#include "hicrit/hct.hpp"
#include "hicrit/rng.hpp"

namespace hicrit {

/// (N, vartheta, r) with epsilon = N^-vartheta and tau = sqrt(2 r log N).
class ArwParams {
 public:
  ArwParams(std::size_t n, double vartheta, double r);

  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] double vartheta() const { return vartheta_; }
  [[nodiscard]] double r() const { return r_; }
  [[nodiscard]] double epsilon() const;
  [[nodiscard]] double tau() const;

 private:
  std::size_t n_;
  double vartheta_;
  double r_;
};

struct MixtureSample {
  std::vector<double> x;
  std::vector<bool> nonnull;
};

/// X_i i.i.d. (1 - epsilon) N(0, 1) + epsilon N(tau, 1), Bernoulli mixing.
MixtureSample sample_mixture(std::size_t n, double epsilon, double tau, RngSeed seed);
MixtureSample sample_mixture(const ArwParams& params, RngSeed seed);

/// pi_i = 1 - Phi(x_i), sorted.
PValueSeries pvalues_one_sided(std::span<const double> x);
/// pi_i = 2 (1 - Phi(|x_i|)), sorted.
PValueSeries pvalues_two_sided(std::span<const double> x);

struct DetectionConfig {
  std::size_t n = 0;
  double epsilon = 0.0;
  double tau = 0.0;
  std::size_t reps = 100;
  double alpha = 0.05;
  HcVariant variant = HcVariant::plus;
  double alpha0 = 0.5;
  std::uint64_t seed = 0;
  /// Used as-is when set; otherwise simulated with `calibration_reps`.
  std::optional<double> critical;
  std::size_t calibration_reps = 10000;
};

struct DetectionSummary {
  std::vector<double> null_scores;
  std::vector<double> alt_scores;
  double critical = 0.0;
  double power = 0.0;
  double size = 0.0;

  /// Every alternative score above every null score.
  [[nodiscard]] bool separated() const;
};

/// Null replicate r uses stream 2r, alternative replicate r stream 2r + 1;
/// calibration draws from seed + 1.
DetectionSummary detection_experiment(const DetectionConfig& config);

struct PermutationResult {
  double p_value = 1.0;
  double observed = 0.0;
  std::vector<double> shuffle_scores;
};

/// HC score of the standardized two-sample Z-vector of `matrix`, from
/// two-sided P-values.
double matrix_hc_score(const LabeledMatrix& matrix, HcVariant variant = HcVariant::plus, double alpha0 = 0.5);

/// Shuffles each column independently, rescores, and returns the add-one
/// estimate (1 + #{shuffle >= observed}) / (1 + shuffles).
PermutationResult permutation_pvalue(const LabeledMatrix& matrix, std::size_t shuffles, std::uint64_t seed,
                                     HcVariant variant = HcVariant::plus, double alpha0 = 0.5);

}  // namespace hicrit
