#pragma once

// HC-threshold feature selection and the thresholded LDA classifier.
// Class +1 plays the role of C1 and class -1 of C2, so a positive Z-score
// means the feature is larger in class +1.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "hicrit/rng.hpp"

namespace hicrit {

struct LabeledMatrix {
  Eigen::MatrixXd data;  // rows = samples, columns = features
  std::vector<int> labels;  // each -1 or +1
  std::vector<std::string> feature_names;

  [[nodiscard]] std::size_t samples() const { return static_cast<std::size_t>(data.rows()); }
  [[nodiscard]] std::size_t features() const { return static_cast<std::size_t>(data.cols()); }
  [[nodiscard]] std::size_t class_count(int label) const;

  /// Shape, label alphabet and finiteness checks.
  void validate() const;
};

struct ZScores {
  std::vector<double> raw;           // z*_j
  std::vector<double> standardized;  // Z_j = (z*_j - mean_shift) / sd_scale
  double mean_shift = 0.0;
  double sd_scale = 1.0;
};

/// Efron recentering with the (p - 1) sample standard deviation.
ZScores standardize(std::vector<double> raw);

/// Per-feature training constants: two-sample t-like statistics, overall
/// means and pooled standard deviations.
struct FeatureStats {
  std::vector<double> raw_z;
  std::vector<double> means;
  std::vector<double> pooled_sds;
};

FeatureStats feature_stats(const LabeledMatrix& train);

ZScores feature_zscores(const LabeledMatrix& train);

/// P{|N(0,1)| >= |z|}, clamped away from zero.
double two_sided_pvalue(double z);

struct HctThreshold {
  double threshold = 0.0;
  std::size_t hct_index = 1;
  double hc_score = 0.0;
};

/// Maximizes the HC feature score over 1 <= i <= floor(alpha0 p) and sets the
/// threshold at the i-th largest |Z|. Falls back to i = 1 when no score is
/// positive.
HctThreshold hct_threshold(const ZScores& z, double alpha0 = 0.10);

struct HctModel {
  static constexpr int kFormatVersion = 1;

  std::vector<int> weights;  // sgn(Z_j) on selected features, else 0
  double threshold = 0.0;
  std::size_t hct_index = 0;
  double hc_score = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  double alpha0 = 0.10;
  /// Set when ties at the threshold select more than hct_index features.
  bool tie_at_threshold = false;

  [[nodiscard]] std::size_t features() const { return weights.size(); }
  [[nodiscard]] std::size_t selected() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static HctModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static HctModel load(const std::filesystem::path& path);
};

HctModel train(const LabeledMatrix& train, double alpha0 = 0.10);

/// sum_j w_j (x_j - mean_j) / sd_j
double lda_score(const HctModel& model, std::span<const double> sample);

/// +1 if the LDA score is >= 0, else -1.
int predict(const HctModel& model, std::span<const double> sample);

struct Evaluation {
  double error_rate = 0.0;
  std::vector<std::size_t> misclassified;  // 0-based test rows
  std::vector<double> scores_positive;     // raw scores, true class +1
  std::vector<double> scores_negative;     // raw scores, true class -1
  double normalization = 1.0;              // 1 / sqrt(hct_index)
  std::size_t ties = 0;
};

Evaluation evaluate(const HctModel& model, const LabeledMatrix& test);

/// Benjamini-Hochberg on the two-sided feature P-values; returns the selected
/// feature indices in ascending order.
std::vector<std::size_t> fdr_feature_select(const ZScores& z, double q);

/// Rare/weak class means: sqrt(n) mu_j is tau_p with probability p^-vartheta
/// and 0 otherwise, tau_p = sqrt(2 r log p).
std::vector<double> sample_rare_weak_means(std::size_t p, std::size_t n, double vartheta, double r, RngSeed seed);

/// n samples X_i = Y_i mu + N(0, I), labels alternating +1, -1.
LabeledMatrix sample_two_class(std::span<const double> mu, std::size_t n, RngSeed seed);

}  // namespace hicrit
