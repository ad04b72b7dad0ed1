#include "hicrit/covtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "hicrit/csv.hpp"
#include "hicrit/errors.hpp"
#include "hicrit/numerics.hpp"
#include "hicrit/parallel.hpp"

namespace hicrit {

namespace {

constexpr const char* kProfileHeader = "n,p,replicates,seed,rng_version,rank,mean,sd";

double correlation_t(double rho, std::int64_t df) {
  return std::sqrt(static_cast<double>(df)) * rho / std::sqrt((1.0 - rho) * (1.0 + rho));
}

// Upper tail P(rho_ij >= rho) with df = observations - 1.
double correlation_sf(double rho, std::int64_t df) {
  if (rho >= 1.0) return kMinPValue;
  if (rho <= -1.0) return 1.0;
  return student_t_sf(correlation_t(rho, df), df);
}

double correlation_pvalue(double rho, std::int64_t df, Tail tail) {
  if (tail == Tail::upper) return clamp_pvalue(correlation_sf(rho, df));
  return clamp_pvalue(2.0 * correlation_sf(std::fabs(rho), df));
}

double rowmax_sf(double rho_star, std::int64_t df, std::size_t p) {
  const double tail = correlation_sf(rho_star, df);
  return clamp_pvalue(-std::expm1(static_cast<double>(p - 1) * std::log1p(-tail)));
}

}  // namespace

CorrelationSummary correlation_summary(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (n < 3 || p < 2) throw InvalidInput("correlation_summary: need n >= 3 and p >= 2");
  if (!x.allFinite()) throw InvalidInput("correlation_summary: non-finite entries");

  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(norms(j) > 0.0)) throw InvalidInput(fmt::format("column {} is constant", j + 1));
  }
  const Eigen::MatrixXd gram = centered.transpose() * centered;

  CorrelationSummary s;
  s.n = static_cast<std::size_t>(n);
  s.p = static_cast<std::size_t>(p);
  s.pairwise.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
  s.rowmax.assign(static_cast<std::size_t>(p), -1.0);
  const double top = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const double rho = std::clamp(gram(i, j) / (norms(i) * norms(j)), -top, top);
      s.pairwise.push_back(rho);
      s.rowmax[static_cast<std::size_t>(i)] = std::max(s.rowmax[static_cast<std::size_t>(i)], rho);
      s.rowmax[static_cast<std::size_t>(j)] = std::max(s.rowmax[static_cast<std::size_t>(j)], rho);
    }
  }
  return s;
}

double pairwise_pvalue(double rho, std::size_t n, Tail tail) {
  if (n < 3) throw InvalidInput("pairwise_pvalue: need n >= 3");
  if (!(rho >= -1.0 && rho <= 1.0)) throw InvalidInput("pairwise_pvalue: rho outside [-1, 1]");
  return correlation_pvalue(rho, static_cast<std::int64_t>(n) - 1, tail);
}

double rowmax_cdf(double rho_star, std::size_t n, std::size_t p) {
  if (n < 3 || p < 2) throw InvalidInput("rowmax_cdf: need n >= 3 and p >= 2");
  if (!(rho_star >= -1.0 && rho_star <= 1.0)) throw InvalidInput("rowmax_cdf: rho outside [-1, 1]");
  const double below = 1.0 - correlation_sf(rho_star, static_cast<std::int64_t>(n) - 1);
  return std::pow(below, static_cast<double>(p - 1));
}

double rowmax_pvalue(double rho_star, std::size_t n, std::size_t p) {
  if (n < 3 || p < 2) throw InvalidInput("rowmax_pvalue: need n >= 3 and p >= 2");
  if (!(rho_star >= -1.0 && rho_star <= 1.0)) throw InvalidInput("rowmax_pvalue: rho outside [-1, 1]");
  return rowmax_sf(rho_star, static_cast<std::int64_t>(n) - 1, p);
}

CliqueMode parse_clique_mode(std::string_view name) {
  if (name == "pairwise") return CliqueMode::pairwise;
  if (name == "rowmax") return CliqueMode::rowmax;
  throw InvalidInput("unknown clique mode '" + std::string(name) + "'");
}

HcResult clique_test(const Eigen::MatrixXd& x, CliqueMode mode, double alpha0, Tail tail) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("clique_test: alpha0 must lie in (0, 1]");
  const auto summary = correlation_summary(x);
  // Centered columns behave like n - 1 uncentered observations.
  const auto df = static_cast<std::int64_t>(summary.n) - 2;
  std::vector<double> pvals;
  if (mode == CliqueMode::pairwise) {
    pvals.resize(summary.pairwise.size());
    parallel_for((pvals.size() + 4095) / 4096, [&](std::size_t block) {
      const std::size_t end = std::min(pvals.size(), (block + 1) * 4096);
      for (std::size_t k = block * 4096; k < end; ++k) pvals[k] = correlation_pvalue(summary.pairwise[k], df, tail);
    });
  } else {
    pvals.resize(summary.p);
    for (std::size_t i = 0; i < summary.p; ++i) pvals[i] = rowmax_sf(summary.rowmax[i], df, summary.p);
  }
  const auto series = PValueSeries::from_unsorted(std::move(pvals));
  return hc_pvalue_bounded(series, 1.0 / static_cast<double>(series.size()), alpha0);
}

Eigen::MatrixXd make_clique_sigma(std::size_t p, std::size_t k, double a) {
  if (k < 1 || k > p) throw InvalidInput("make_clique_sigma: need 1 <= k <= p");
  if (k >= 2 && !(a < 1.0 && a > -1.0 / static_cast<double>(k - 1))) {
    throw InvalidInput(fmt::format("make_clique_sigma: a = {} leaves the {}-block indefinite", a, k));
  }
  const auto pp = static_cast<Eigen::Index>(p);
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(pp, pp);
  for (Eigen::Index i = 0; i < kk; ++i) {
    for (Eigen::Index j = 0; j < kk; ++j) {
      if (i != j) sigma(i, j) = a;
    }
  }
  return sigma;
}

Eigen::MatrixXd haar_orthogonal(std::size_t p, RngStream& rng) {
  const auto pp = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd g(pp, pp);
  for (Eigen::Index i = 0; i < pp; ++i) {
    for (Eigen::Index j = 0; j < pp; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < pp; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd make_spiked_sigma(std::size_t p, std::size_t rank, double h, RngSeed seed) {
  if (rank >= p) throw InvalidInput("make_spiked_sigma: rank must be below p");
  if (!(h > -1.0)) throw InvalidInput("make_spiked_sigma: h must exceed -1");
  RngStream rng(seed);
  const Eigen::MatrixXd q = haar_orthogonal(p, rng);
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
  lambda.head(static_cast<Eigen::Index>(rank)).array() += h;
  Eigen::MatrixXd sigma = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd sample_standard_gaussian(std::size_t n, std::size_t p, RngSeed seed) {
  RngStream rng(seed);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();
  }
  return z;
}

Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& sigma, std::size_t n, RngSeed seed) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw InvalidInput("sample_gaussian: covariance is not positive definite");
  const Eigen::MatrixXd z = sample_standard_gaussian(n, static_cast<std::size_t>(sigma.rows()), seed);
  return z * llt.matrixL().transpose();
}

std::vector<double> sample_cov_eigenvalues(const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = x.rows() >= x.cols() ? Eigen::MatrixXd(x.transpose() * x) / n
                                                    : Eigen::MatrixXd(x * x.transpose()) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = ev(ev.size() - 1 - i);
  return out;
}

EigenNullProfile eigen_null_profile(std::size_t n, std::size_t p, std::size_t replicates, std::uint64_t seed) {
  if (replicates < 100) throw InvalidInput("eigen_null_profile: need at least 100 replicates");
  if (n < 1 || p < 1) throw InvalidInput("eigen_null_profile: empty dimensions");
  const std::size_t m = std::min(n, p);
  std::vector<std::vector<double>> draws(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    draws[r] = sample_cov_eigenvalues(sample_standard_gaussian(n, p, RngSeed{seed, r}));
  });
  EigenNullProfile prof;
  prof.n = n;
  prof.p = p;
  prof.replicates = replicates;
  prof.seed = seed;
  prof.means.assign(m, 0.0);
  prof.sds.assign(m, 0.0);
  const double reps = static_cast<double>(replicates);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (const auto& d : draws) sum += d[i];
    const double mean = sum / reps;
    double ss = 0.0;
    for (const auto& d : draws) ss += (d[i] - mean) * (d[i] - mean);
    prof.means[i] = mean;
    prof.sds[i] = std::sqrt(ss / (reps - 1.0));
  }
  return prof;
}

EigenHcResult eigen_hc_test(const Eigen::MatrixXd& x, const EigenNullProfile& profile, double alpha0) {
  if (static_cast<std::size_t>(x.rows()) != profile.n || static_cast<std::size_t>(x.cols()) != profile.p) {
    throw InvalidInput(fmt::format("eigen_hc_test: data is {}x{} but the null profile is for {}x{}", x.rows(),
                                   x.cols(), profile.n, profile.p));
  }
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw InvalidInput("eigen_hc_test: alpha0 must lie in (0, 1]");
  const auto lambda = sample_cov_eigenvalues(x);
  const std::size_t m = lambda.size();
  const std::size_t bound = index_bound(m, alpha0);
  if (bound < 1) throw InvalidInput("eigen_hc_test: empty index range");

  EigenHcResult out;
  out.components.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.components[i] = profile.sds[i] > 0.0 ? (lambda[i] - profile.means[i]) / profile.sds[i] : 0.0;
  }
  out.argmax_index = 1;
  for (std::size_t i = 2; i <= bound; ++i) {
    if (out.components[i - 1] > out.components[out.argmax_index - 1]) out.argmax_index = i;
  }
  out.score = out.components[out.argmax_index - 1];
  return out;
}

std::optional<EigenNullProfile> load_cached_profile(const std::filesystem::path& path, std::size_t n, std::size_t p,
                                                    std::size_t replicates) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto lines = csv::read_lines(path);
  if (lines.empty()) return std::nullopt;
  if (lines.front() != kProfileHeader) throw ValidationError(path.string() + ": unexpected profile cache header");
  std::map<std::size_t, std::pair<double, double>> rows;
  std::uint64_t seed = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto where = fmt::format("{}:{}", path.string(), li + 1);
    const auto f = csv::split_line(lines[li]);
    if (f.size() != 8) throw ValidationError(where + ": expected 8 fields");
    if (std::stoull(f[0]) != n || std::stoull(f[1]) != p || std::stoull(f[2]) != replicates ||
        f[4] != kRngVersion) {
      continue;
    }
    seed = std::stoull(f[3]);
    rows[std::stoull(f[5])] = {csv::parse_double(f[6], where), csv::parse_double(f[7], where)};
  }
  const std::size_t m = std::min(n, p);
  if (rows.size() != m) return std::nullopt;
  EigenNullProfile prof{n, p, {}, {}, replicates, seed};
  for (const auto& [rank, ms] : rows) {
    prof.means.push_back(ms.first);
    prof.sds.push_back(ms.second);
  }
  return prof;
}

void store_cached_profile(const std::filesystem::path& path, const EigenNullProfile& profile) {
  std::ostringstream out;
  out << kProfileHeader << '\n';
  if (std::filesystem::exists(path)) {
    const auto lines = csv::read_lines(path);
    for (std::size_t li = 1; li < lines.size(); ++li) {
      if (lines[li].empty()) continue;
      const auto f = csv::split_line(lines[li]);
      const bool same_key = f.size() == 8 && std::stoull(f[0]) == profile.n && std::stoull(f[1]) == profile.p &&
                            std::stoull(f[2]) == profile.replicates && f[4] == kRngVersion;
      if (!same_key) out << lines[li] << '\n';
    }
  }
  for (std::size_t i = 0; i < profile.means.size(); ++i) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", profile.n, profile.p, profile.replicates, profile.seed,
                       kRngVersion, i + 1, csv::exact(profile.means[i]), csv::exact(profile.sds[i]));
  }
  csv::atomic_write(path, out.str());
}

}  // namespace hicrit
