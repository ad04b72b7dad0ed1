#include "hicrit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hicrit/errors.hpp"

namespace hicrit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest double strictly below one.
constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

double poly(const double* c, int n, double r) {
  double acc = c[n - 1];
  for (int i = n - 2; i >= 0; --i) acc = acc * r + c[i];
  return acc;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

double clamp_pvalue(double p) noexcept {
  if (std::isnan(p)) return 1.0;
  return std::clamp(p, kMinPValue, 1.0);
}

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw InvalidInput("std_normal_cdf: non-finite argument");
  const double v = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  return std::min(v, kBelowOne);
}

double std_normal_sf(double x) {
  if (!std::isfinite(x)) throw InvalidInput("std_normal_sf: non-finite argument");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidInput("std_normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  static constexpr double a[] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1,
                                 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3,
                                 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4,
                                 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0,
                                 1.67638483018380384940e0,
                                 6.89767334985100004550e-1,
                                 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1,
                                 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2,
                                 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q * poly(a, 8, r) / poly(b, 8, r);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = poly(c, 8, r) / poly(d, 8, r);
    } else {
      r -= 5.0;
      x = poly(e, 8, r) / poly(f, 8, r);
    }
    if (q < 0.0) x = -x;
  }

  // One Halley step against the tail that is represented exactly.
  const double err = (p < 0.5) ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_sf(x);
  const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidInput("incomplete beta: shape parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_sf(double x, std::int64_t df) {
  if (df < 1) throw InvalidInput("student_t: degrees of freedom must be >= 1");
  if (!std::isfinite(x)) throw InvalidInput("student_t: non-finite argument");
  const double nu = static_cast<double>(df);
  const double t2 = x * x;
  // P(|T| >= |x|) = I_{nu/(nu+t^2)}(nu/2, 1/2)
  const double two_tail = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2), t2 / (nu + t2));
  return x >= 0.0 ? 0.5 * two_tail : 1.0 - 0.5 * two_tail;
}

double student_t_cdf(double x, std::int64_t df) {
  if (df < 1) throw InvalidInput("student_t: degrees of freedom must be >= 1");
  if (!std::isfinite(x)) throw InvalidInput("student_t: non-finite argument");
  return student_t_sf(-x, df);
}

double binomial_kl(double p0, double p1) {
  if (!(p0 >= 0.0 && p0 <= 1.0) || !(p1 >= 0.0 && p1 <= 1.0)) {
    throw InvalidInput("binomial_kl: arguments must lie in [0, 1]");
  }
  double d = 0.0;
  if (p0 > 0.0) {
    if (p1 == 0.0) return kInf;
    d += p0 * std::log(p0 / p1);
  }
  if (p0 < 1.0) {
    if (p1 == 1.0) return kInf;
    d += (1.0 - p0) * std::log((1.0 - p0) / (1.0 - p1));
  }
  return std::max(d, 0.0);
}

}  // namespace hicrit
