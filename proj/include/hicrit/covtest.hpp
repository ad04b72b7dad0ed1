#pragma once

// HC tests on covariance structure: clique detection from pairwise and
// row-maximum correlations, and eigenHC against a Monte Carlo null profile.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hicrit/hc.hpp"
#include "hicrit/rng.hpp"

namespace hicrit {

struct CorrelationSummary {
  std::vector<double> pairwise;  // rho_ij for i < j, row-major over i
  std::vector<double> rowmax;    // rho*_i = max_{j != i} rho_ij
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Correlations of the mean-centered columns of X (n x p). Throws on a
/// constant column.
CorrelationSummary correlation_summary(const Eigen::MatrixXd& x);

enum class Tail { upper, two_sided };

/// Null P-value of a sample correlation from n observations:
/// P(t_{n-1} >= sqrt(n-1) rho / sqrt(1 - rho^2)) for the upper tail.
double pairwise_pvalue(double rho, std::size_t n, Tail tail = Tail::upper);

/// F_{p,n}(rho*) = [P(t_{n-1} <= sqrt(n-1) rho* / sqrt(1 - rho*^2))]^{p-1}.
double rowmax_cdf(double rho_star, std::size_t n, std::size_t p);

/// Upper-tail P-value 1 - F_{p,n}(rho*), computed without cancellation.
double rowmax_pvalue(double rho_star, std::size_t n, std::size_t p);

enum class CliqueMode { pairwise, rowmax };

CliqueMode parse_clique_mode(std::string_view name);

/// Sorts the chosen P-values and applies OHC restricted to
/// 1/N <= pi_(i) <= alpha0. Centering costs one degree of freedom, so the
/// null laws are evaluated with n - 1 observations.
HcResult clique_test(const Eigen::MatrixXd& x, CliqueMode mode, double alpha0 = 0.5, Tail tail = Tail::two_sided);

/// Identity with a k x k equicorrelated leading block of off-diagonal a.
Eigen::MatrixXd make_clique_sigma(std::size_t p, std::size_t k, double a);

/// Q Lambda Q' with Lambda = diag(1 + h (x rank), 1, ...) and Q Haar.
Eigen::MatrixXd make_spiked_sigma(std::size_t p, std::size_t rank, double h, RngSeed seed);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed
/// so that R has a positive diagonal).
Eigen::MatrixXd haar_orthogonal(std::size_t p, RngStream& rng);

/// n rows i.i.d. N(0, sigma).
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& sigma, std::size_t n, RngSeed seed);

/// n x p matrix of i.i.d. standard normals.
Eigen::MatrixXd sample_standard_gaussian(std::size_t n, std::size_t p, RngSeed seed);

/// The min(n, p) nonzero eigenvalues of X'X / n, descending.
std::vector<double> sample_cov_eigenvalues(const Eigen::MatrixXd& x);

struct EigenNullProfile {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> means;
  std::vector<double> sds;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

EigenNullProfile eigen_null_profile(std::size_t n, std::size_t p, std::size_t replicates, std::uint64_t seed);

struct EigenHcResult {
  std::vector<double> components;  // (lambda_i - E0) / SD0, i = 1..min(n, p)
  double score = 0.0;
  std::size_t argmax_index = 1;
};

EigenHcResult eigen_hc_test(const Eigen::MatrixXd& x, const EigenNullProfile& profile, double alpha0 = 0.5);

/// Profile cache: CSV `n,p,replicates,seed,rng_version,rank,mean,sd`, one row
/// per eigenvalue rank. Lookups match (n, p, replicates, rng_version).
std::optional<EigenNullProfile> load_cached_profile(const std::filesystem::path& path, std::size_t n, std::size_t p,
                                                    std::size_t replicates);
void store_cached_profile(const std::filesystem::path& path, const EigenNullProfile& profile);

}  // namespace hicrit
