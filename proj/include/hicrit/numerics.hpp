#pragma once

// Special functions and distribution primitives shared by every statistic.

#include <cstdint>

namespace hicrit {

/// Smallest P-value any computation hands downstream.
inline constexpr double kMinPValue = 1e-300;

/// Clamp a computed P-value into [kMinPValue, 1].
double clamp_pvalue(double p) noexcept;

/// Phi(x). Accurate to ~1e-15 absolute; never returns exactly 1.
double std_normal_cdf(double x);

/// 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x);

/// Phi^{-1}(p) for 0 < p < 1 (Wichura's AS241, ~1e-16 relative).
double std_normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double regularized_incomplete_beta(double a, double b, double x, double y);
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of the central Student t distribution.
double student_t_cdf(double x, std::int64_t df);

/// Upper tail P(T >= x) of the central Student t distribution.
double student_t_sf(double x, std::int64_t df);

/// Binary KL divergence D(p0, p1) = p0 log(p0/p1) + (1-p0) log((1-p0)/(1-p1)),
/// with 0 log 0 := 0. Returns +infinity when p1 is 0 or 1 and p0 differs.
double binomial_kl(double p0, double p1);

}  // namespace hicrit
