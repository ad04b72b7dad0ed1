#include "hicrit/arw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hicrit/calibrate.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/numerics.hpp"
#include "hicrit/parallel.hpp"

namespace hicrit {

ArwParams::ArwParams(std::size_t n, double vartheta, double r) : n_(n), vartheta_(vartheta), r_(r) {
  if (n < 2) throw InvalidInput("ArwParams: N must be at least 2");
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw InvalidInput("ArwParams: vartheta must lie in (0, 1)");
  if (!(r > 0.0)) throw InvalidInput("ArwParams: r must be positive");
}

double ArwParams::epsilon() const { return std::pow(static_cast<double>(n_), -vartheta_); }

double ArwParams::tau() const { return std::sqrt(2.0 * r_ * std::log(static_cast<double>(n_))); }

MixtureSample sample_mixture(std::size_t n, double epsilon, double tau, RngSeed seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("sample_mixture: epsilon must lie in [0, 1]");
  if (!std::isfinite(tau)) throw InvalidInput("sample_mixture: tau must be finite");
  RngStream rng(seed);
  MixtureSample s;
  s.x.resize(n);
  s.nonnull.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool signal = rng.uniform() < epsilon;
    s.nonnull[i] = signal;
    s.x[i] = rng.normal() + (signal ? tau : 0.0);
  }
  return s;
}

MixtureSample sample_mixture(const ArwParams& params, RngSeed seed) {
  return sample_mixture(params.n(), params.epsilon(), params.tau(), seed);
}

PValueSeries pvalues_one_sided(std::span<const double> x) {
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = clamp_pvalue(std_normal_sf(x[i]));
  return PValueSeries::from_unsorted(std::move(p));
}

PValueSeries pvalues_two_sided(std::span<const double> x) {
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = clamp_pvalue(2.0 * std_normal_sf(std::fabs(x[i])));
  return PValueSeries::from_unsorted(std::move(p));
}

bool DetectionSummary::separated() const {
  if (null_scores.empty() || alt_scores.empty()) return false;
  return *std::min_element(alt_scores.begin(), alt_scores.end()) >
         *std::max_element(null_scores.begin(), null_scores.end());
}

DetectionSummary detection_experiment(const DetectionConfig& cfg) {
  if (cfg.reps < 2) throw InvalidInput("detection_experiment: need at least 2 replicates");
  DetectionSummary out;
  out.critical = cfg.critical ? *cfg.critical
                              : simulate_critical(cfg.n, cfg.alpha, cfg.variant, cfg.alpha0,
                                                  cfg.calibration_reps, cfg.seed + 1)
                                    .quantile;
  out.null_scores.resize(cfg.reps);
  out.alt_scores.resize(cfg.reps);
  parallel_for(2 * cfg.reps, [&](std::size_t job) {
    const std::size_t r = job / 2;
    const bool alternative = (job % 2) == 1;
    const auto sample = sample_mixture(cfg.n, alternative ? cfg.epsilon : 0.0, cfg.tau, RngSeed{cfg.seed, job});
    const double score = hc_score(pvalues_one_sided(sample.x), cfg.variant, cfg.alpha0).score;
    (alternative ? out.alt_scores : out.null_scores)[r] = score;
  });
  auto rate = [&](const std::vector<double>& scores) {
    const auto hits = std::count_if(scores.begin(), scores.end(), [&](double s) { return s > out.critical; });
    return static_cast<double>(hits) / static_cast<double>(scores.size());
  };
  out.power = rate(out.alt_scores);
  out.size = rate(out.null_scores);
  return out;
}

double matrix_hc_score(const LabeledMatrix& matrix, HcVariant variant, double alpha0) {
  const auto z = feature_zscores(matrix);
  return hc_score(pvalues_two_sided(z.standardized), variant, alpha0).score;
}

PermutationResult permutation_pvalue(const LabeledMatrix& matrix, std::size_t shuffles, std::uint64_t seed,
                                     HcVariant variant, double alpha0) {
  if (shuffles < 1) throw InvalidInput("permutation_pvalue: need at least one shuffle");
  PermutationResult out;
  out.observed = matrix_hc_score(matrix, variant, alpha0);
  out.shuffle_scores.resize(shuffles);
  parallel_for(shuffles, [&](std::size_t b) {
    LabeledMatrix shuffled = matrix;
    RngStream rng(RngSeed{seed, b});
    for (Eigen::Index j = 0; j < shuffled.data.cols(); ++j) {
      auto col = shuffled.data.col(j);
      rng.shuffle(std::span<double>(col.data(), static_cast<std::size_t>(col.size())));
    }
    try {
      out.shuffle_scores[b] = matrix_hc_score(shuffled, variant, alpha0);
    } catch (const InvalidInput&) {
      // A shuffle can leave a column constant within both classes.
      out.shuffle_scores[b] = -std::numeric_limits<double>::infinity();
    }
  });
  const auto exceed = std::count_if(out.shuffle_scores.begin(), out.shuffle_scores.end(),
                                    [&](double s) { return s >= out.observed; });
  out.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(shuffles));
  return out;
}

}  // namespace hicrit
