#include "hicrit/hct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "hicrit/errors.hpp"
#include "hicrit/hc.hpp"
#include "hicrit/numerics.hpp"

namespace hicrit {

std::size_t LabeledMatrix::class_count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void LabeledMatrix::validate() const {
  if (labels.size() != samples()) {
    throw InvalidInput(fmt::format("labels ({}) do not match sample count ({})", labels.size(), samples()));
  }
  if (!feature_names.empty() && feature_names.size() != features()) {
    throw InvalidInput("feature_names length does not match the number of columns");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw InvalidInput(fmt::format("row {}: label must be -1 or +1", i + 1));
  }
  if (!data.allFinite()) throw InvalidInput("data matrix contains non-finite entries");
}

ZScores standardize(std::vector<double> raw) {
  const std::size_t p = raw.size();
  if (p < 2) throw InvalidInput("standardize: need at least two scores");
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(p);
  double ss = 0.0;
  for (double v : raw) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(p - 1));
  if (!(sd > 0.0)) throw InvalidInput("standardize: scores have zero spread");
  ZScores z;
  z.standardized.resize(p);
  for (std::size_t j = 0; j < p; ++j) z.standardized[j] = (raw[j] - mean) / sd;
  z.raw = std::move(raw);
  z.mean_shift = mean;
  z.sd_scale = sd;
  return z;
}

FeatureStats feature_stats(const LabeledMatrix& train) {
  train.validate();
  const std::size_t n1 = train.class_count(1);
  const std::size_t n2 = train.class_count(-1);
  if (n1 < 2 || n2 < 2) throw InvalidInput("training data needs at least two samples in each class");

  const std::size_t n = train.samples();
  const std::size_t p = train.features();
  const double scale = std::sqrt(1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));

  FeatureStats out;
  out.raw_z.resize(p);
  out.means.resize(p);
  out.pooled_sds.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = train.data.col(static_cast<Eigen::Index>(j));
    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) (train.labels[i] == 1 ? sum1 : sum2) += col(static_cast<Eigen::Index>(i));
    const double m1 = sum1 / static_cast<double>(n1);
    const double m2 = sum2 / static_cast<double>(n2);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = col(static_cast<Eigen::Index>(i)) - (train.labels[i] == 1 ? m1 : m2);
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 2));
    if (!(sd > 0.0)) {
      const std::string name = train.feature_names.empty() ? fmt::format("#{}", j + 1) : train.feature_names[j];
      throw InvalidInput(fmt::format("feature {} has zero pooled variance", name));
    }
    out.raw_z[j] = (m1 - m2) / (sd * scale);
    out.means[j] = (sum1 + sum2) / static_cast<double>(n);
    out.pooled_sds[j] = sd;
  }
  return out;
}

ZScores feature_zscores(const LabeledMatrix& train) { return standardize(feature_stats(train).raw_z); }

double two_sided_pvalue(double z) { return clamp_pvalue(2.0 * std_normal_sf(std::fabs(z))); }

namespace {
constexpr double kFlatScoreTolerance = 1e-9;
}  // namespace

HctThreshold hct_threshold(const ZScores& z, double alpha0) {
  const std::size_t p = z.standardized.size();
  if (p < 2) throw InvalidInput("hct_threshold: need at least two features");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("hct_threshold: alpha0 must lie in (0, 1]");

  std::vector<double> abs_z(p);
  for (std::size_t j = 0; j < p; ++j) abs_z[j] = std::fabs(z.standardized[j]);
  std::vector<double> pvals(p);
  for (std::size_t j = 0; j < p; ++j) pvals[j] = two_sided_pvalue(abs_z[j]);

  // Largest |Z| first; P-values then come out ascending.
  std::vector<double> sorted_abs = abs_z;
  std::sort(sorted_abs.begin(), sorted_abs.end(), std::greater<>());
  std::sort(pvals.begin(), pvals.end());
  const auto scores = hc_feature_scores(PValueSeries::from_sorted(std::move(pvals)));

  const std::size_t bound = std::clamp<std::size_t>(index_bound(p, alpha0), 1, p - 1);
  std::size_t best = 1;
  for (std::size_t i = 2; i <= bound; ++i) {
    if (scores[i - 1] > scores[best - 1]) best = i;
  }
  HctThreshold t;
  t.hc_score = scores[best - 1];
  // A flat null profile yields scores that are zero up to rounding.
  if (!(t.hc_score > kFlatScoreTolerance)) best = 1;
  t.hct_index = best;
  t.threshold = sorted_abs[best - 1];
  return t;
}

std::size_t HctModel::selected() const {
  return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](int w) { return w != 0; }));
}

nlohmann::json HctModel::to_json() const {
  nlohmann::json sparse = nlohmann::json::object();
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] != 0) sparse[std::to_string(j)] = weights[j];
  }
  return {{"format_version", kFormatVersion},
          {"n_features", weights.size()},
          {"weights", sparse},
          {"threshold", threshold},
          {"hct_index", hct_index},
          {"hc_score", hc_score},
          {"feature_means", feature_means},
          {"feature_sds", feature_sds},
          {"alpha0", alpha0},
          {"tie_at_threshold", tie_at_threshold}};
}

HctModel HctModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ValidationError("unsupported model format_version");
    }
    HctModel m;
    const auto p = j.at("n_features").get<std::size_t>();
    m.weights.assign(p, 0);
    for (const auto& [key, value] : j.at("weights").items()) {
      const auto idx = std::stoull(key);
      const int w = value.get<int>();
      if (idx >= p || (w != 1 && w != -1)) throw ValidationError("model weight entry '" + key + "' is invalid");
      m.weights[idx] = w;
    }
    m.threshold = j.at("threshold").get<double>();
    m.hct_index = j.at("hct_index").get<std::size_t>();
    m.hc_score = j.value("hc_score", 0.0);
    m.feature_means = j.at("feature_means").get<std::vector<double>>();
    m.feature_sds = j.at("feature_sds").get<std::vector<double>>();
    m.alpha0 = j.at("alpha0").get<double>();
    m.tie_at_threshold = j.value("tie_at_threshold", false);
    if (m.feature_means.size() != p || m.feature_sds.size() != p) {
      throw ValidationError("model feature_means/feature_sds length mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void HctModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

HctModel HctModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  return from_json(j);
}

HctModel train(const LabeledMatrix& data, double alpha0) {
  auto stats = feature_stats(data);
  const auto z = standardize(std::move(stats.raw_z));
  const auto t = hct_threshold(z, alpha0);

  HctModel m;
  m.threshold = t.threshold;
  m.hct_index = t.hct_index;
  m.hc_score = t.hc_score;
  m.alpha0 = alpha0;
  m.feature_means = std::move(stats.means);
  m.feature_sds = std::move(stats.pooled_sds);
  m.weights.resize(z.standardized.size());
  for (std::size_t j = 0; j < z.standardized.size(); ++j) {
    const double zj = z.standardized[j];
    m.weights[j] = std::fabs(zj) >= t.threshold ? (zj > 0.0 ? 1 : (zj < 0.0 ? -1 : 0)) : 0;
  }
  m.tie_at_threshold = m.selected() != m.hct_index;
  return m;
}

double lda_score(const HctModel& model, std::span<const double> sample) {
  if (sample.size() != model.features()) {
    throw InvalidInput(fmt::format("sample has {} features, model expects {}", sample.size(), model.features()));
  }
  double score = 0.0;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    if (model.weights[j] != 0) score += model.weights[j] * (sample[j] - model.feature_means[j]) / model.feature_sds[j];
  }
  return score;
}

int predict(const HctModel& model, std::span<const double> sample) {
  return lda_score(model, sample) >= 0.0 ? 1 : -1;
}

Evaluation evaluate(const HctModel& model, const LabeledMatrix& test) {
  test.validate();
  if (test.features() != model.features()) {
    throw InvalidInput(fmt::format("test data has {} features, model expects {}", test.features(), model.features()));
  }
  Evaluation ev;
  ev.normalization = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(model.hct_index, 1)));
  std::vector<double> row(test.features());
  for (std::size_t i = 0; i < test.samples(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = test.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double s = lda_score(model, row);
    if (s == 0.0) ++ev.ties;
    const int label = s >= 0.0 ? 1 : -1;
    if (label != test.labels[i]) ev.misclassified.push_back(i);
    (test.labels[i] == 1 ? ev.scores_positive : ev.scores_negative).push_back(s);
  }
  ev.error_rate = test.samples() == 0 ? 0.0
                                      : static_cast<double>(ev.misclassified.size()) /
                                            static_cast<double>(test.samples());
  return ev;
}

std::vector<std::size_t> fdr_feature_select(const ZScores& z, double q) {
  const std::size_t p = z.standardized.size();
  if (p == 0) return {};
  std::vector<double> pvals(p);
  for (std::size_t j = 0; j < p; ++j) pvals[j] = two_sided_pvalue(z.standardized[j]);
  auto series = PValueSeries::from_unsorted(pvals);
  const std::size_t k = bh_fdr_select(series, q);
  std::vector<std::size_t> selected;
  if (k == 0) return selected;
  const double cutoff = series.order_stat(k);
  for (std::size_t j = 0; j < p; ++j) {
    if (pvals[j] <= cutoff) selected.push_back(j);
  }
  return selected;
}

std::vector<double> sample_rare_weak_means(std::size_t p, std::size_t n, double vartheta, double r, RngSeed seed) {
  if (p < 2 || n < 1) throw InvalidInput("sample_rare_weak_means: need p >= 2 and n >= 1");
  const double pp = static_cast<double>(p);
  const double eps = std::pow(pp, -vartheta);
  const double tau = std::sqrt(2.0 * r * std::log(pp));
  const double mean = tau / std::sqrt(static_cast<double>(n));
  RngStream rng(seed);
  std::vector<double> mu(p, 0.0);
  for (double& m : mu) {
    if (rng.uniform() < eps) m = mean;
  }
  return mu;
}

LabeledMatrix sample_two_class(std::span<const double> mu, std::size_t n, RngSeed seed) {
  const auto p = static_cast<Eigen::Index>(mu.size());
  LabeledMatrix out;
  out.data.resize(static_cast<Eigen::Index>(n), p);
  out.labels.resize(n);
  RngStream rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    out.labels[i] = y;
    for (Eigen::Index j = 0; j < p; ++j) {
      out.data(static_cast<Eigen::Index>(i), j) = y * mu[static_cast<std::size_t>(j)] + rng.normal();
    }
  }
  return out;
}

}  // namespace hicrit
