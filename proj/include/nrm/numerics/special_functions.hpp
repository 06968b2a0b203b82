#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"

namespace nrm {

namespace detail {

// Sum of a series of positive terms given by t_{k+1} = t_k * ratio(k),
// t_0 = 1, returned as a logarithm.  Rescales to stay inside double range.
template <class Ratio>
double log_positive_series(Ratio&& ratio, int max_terms, double rel_tol, const char* what) {
  double log_scale = 0.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < max_terms; ++k) {
    term *= ratio(k);
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::numbers::ln10;
    }
    // Terms are eventually decreasing geometrically; stop when negligible.
    if (term < rel_tol * sum && ratio(k + 1) < 0.5) {
      return log_scale + std::log(sum);
    }
  }
  throw NumericalError(std::string(what) + ": series did not converge in " +
                       std::to_string(max_terms) + " terms");
}

}  // namespace detail

/// log 1F1(a; b; z) for a, b > 0.
///
/// z >= 0 sums the positive Taylor series.  For z < 0 with b >= a the Kummer
/// transformation 1F1(a;b;z) = e^z 1F1(b-a;b;-z) turns the alternating
/// series into a positive one; very large |z| uses the asymptotic expansion.
inline double log_hyp1f1(double a, double b, double z) {
  if (!(b > 0)) throw DomainError("hyp1f1: b must be positive");
  if (!(a >= 0)) throw DomainError("hyp1f1: a must be non-negative");
  if (z == 0.0 || a == 0.0) return 0.0;
  constexpr int kMaxTerms = 10000;
  constexpr double kTol = 1e-17;

  // sum_k (p)_k (q)_k / (k! x^k), truncated at its smallest term; NaN when
  // the truncation does not reach full precision.
  auto asymptotic_sum = [](double p, double q, double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 200; ++k) {
      const double next = term * (p + k) * (q + k) / ((k + 1.0) * x);
      if (std::abs(next) > std::abs(term) && k > 0) break;
      term = next;
      sum += term;
      if (std::abs(term) < kTol * std::abs(sum)) return sum;
    }
    return std::nan("");
  };

  if (z > 0) {
    if (z > 2000.0) {
      // 1F1(a;b;z) ~ G(b)/G(a) e^z z^{a-b} sum_k (b-a)_k (1-a)_k / (k! z^k)
      const double sum = asymptotic_sum(b - a, 1.0 - a, z);
      if (sum > 0) {
        return std::lgamma(b) - std::lgamma(a) + z + (a - b) * std::log(z) + std::log(sum);
      }
    }
    return detail::log_positive_series(
        [=](int k) { return (a + k) * z / ((b + k) * (k + 1.0)); }, kMaxTerms, kTol, "hyp1f1");
  }

  const double x = -z;
  if (b >= a) {
    if (b == a) return z;
    if (x > 2000.0) {
      // 1F1(a;b;-x) ~ G(b)/G(b-a) x^{-a} sum_k (a)_k (1+a-b)_k / (k! x^k);
      // the e^{-x} companion term is below double precision here.
      const double sum = asymptotic_sum(a, 1.0 + a - b, x);
      if (sum > 0) return std::lgamma(b) - std::lgamma(b - a) - a * std::log(x) + std::log(sum);
    }
    return z + log_hyp1f1(b - a, b, x);
  }

  // b < a with z < 0: alternating Taylor series; accepted only when the
  // cancellation leaves at least 1e-10 relative accuracy.
  double term = 1.0, sum = 1.0, largest = 1.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    term *= (a + k) * z / ((b + k) * (k + 1.0));
    sum += term;
    largest = std::max(largest, std::abs(term));
    if (std::abs(term) < kTol * std::abs(sum) && k > x) {
      if (largest * 2.2e-16 > 1e-10 * std::abs(sum)) {
        throw NumericalError("hyp1f1: loss of precision in alternating series");
      }
      if (!(sum > 0)) throw NumericalError("hyp1f1: non-positive value in log form");
      return std::log(sum);
    }
  }
  throw NumericalError("hyp1f1: series did not converge");
}

inline double hyp1f1(double a, double b, double z) {
  return checked_exp(log_hyp1f1(a, b, z), "hyp1f1");
}

namespace detail {

inline bool is_half_integer(double nu) {
  const double twice = 2.0 * nu;
  const double r = std::round(twice);
  return std::abs(twice - r) < 1e-12 && static_cast<long long>(std::abs(r)) % 2 == 1;
}

}  // namespace detail

/// log K_nu(z) for half-integer nu = m + 1/2 via the terminating sum
///   K_{m+1/2}(z) = sqrt(pi/(2z)) e^{-z} sum_k (m+k)! / (2^k (m-k)! k!) z^{-k}.
inline double log_bessel_k_half_integer(double nu, double z) {
  if (!(z > 0)) throw DomainError("bessel_k: z must be positive");
  if (!detail::is_half_integer(nu)) throw DomainError("bessel_k: order is not half-integer");
  const int m = static_cast<int>(std::lround(std::abs(nu) - 0.5));
  LogAccumulator acc;
  for (int k = 0; k <= m; ++k) {
    acc.add(std::lgamma(m + k + 1.0) - std::lgamma(m - k + 1.0) - std::lgamma(k + 1.0) -
            k * std::numbers::ln2 - k * std::log(z));
  }
  return 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + acc.log_value();
}

/// log K_nu(z), z > 0.  Half-integer orders use the exact finite sum; other
/// orders use Boost.Math below z = 500 and the Hankel expansion above, where
/// K itself underflows.
inline double log_bessel_k(double nu, double z) {
  if (!(z > 0)) throw DomainError("bessel_k: z must be positive");
  nu = std::abs(nu);
  if (detail::is_half_integer(nu)) return log_bessel_k_half_integer(nu, z);
  if (z < 500.0) {
    const double k = boost::math::cyl_bessel_k(nu, z);
    if (k > 0 && std::isfinite(k)) return std::log(k);
    if (k == std::numeric_limits<double>::infinity() || !(k > 0)) {
      // Small z with large order: K_nu(z) ~ G(nu)/2 (z/2)^{-nu}.
      if (z < 1.0) {
        return std::lgamma(nu) - std::numbers::ln2 - nu * std::log(0.5 * z);
      }
    }
    throw RangeError("bessel_k: value not representable for nu=" + std::to_string(nu));
  }
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + std::log(sum);
}

inline double bessel_k(double nu, double z) {
  return checked_exp(log_bessel_k(nu, z), "bessel_k");
}

/// log of Gamma(a, c) = int_c^inf w^{a-1} e^{-w} dw for any real a and c > 0.
inline double log_upper_incomplete_gamma(double a, double c) {
  if (!(c > 0)) throw DomainError("upper incomplete gamma: c must be positive");
  if (a > 0) {
    const double q = boost::math::gamma_q(a, c);
    if (q > 0) return std::lgamma(a) + std::log(q);
    // Deep tail: Gamma(a, c) ~ c^{a-1} e^{-c} (1 + (a-1)/c + (a-1)(a-2)/c^2 ...).
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= (a - k) / c;
      sum += term;
      if (std::abs(term) < 1e-17) break;
    }
    return (a - 1.0) * std::log(c) - c + std::log(sum);
  }
  // Downward recurrence Gamma(s, c) = (Gamma(s+1, c) - c^s e^{-c}) / s from a
  // base order in [0, 1).
  const int steps = static_cast<int>(std::ceil(-a - 1e-12));
  double s = a + steps;
  double value;
  if (std::abs(s) < 1e-12) {
    s = 0.0;
    value = boost::math::expint(1, c);
  } else {
    value = boost::math::tgamma(s, c);
  }
  for (int i = 0; i < steps; ++i) {
    const double lower = s - 1.0;
    value = (value - std::pow(c, lower) * std::exp(-c)) / lower;
    s = lower;
  }
  if (!(value > 0)) throw NumericalError("upper incomplete gamma: cancellation");
  return std::log(value);
}

/// E[G^{-k/alpha} 1{G > c}] for G ~ Gamma(shape, 1):
///   int_c^inf w^{shape - k/alpha - 1} e^{-w} dw / Gamma(shape).
inline double upper_incomplete_gamma_moment(double k_over_alpha, double shape, double c) {
  if (!(shape > 0)) throw DomainError("upper_incomplete_gamma_moment: shape must be positive");
  if (c < 0) throw DomainError("upper_incomplete_gamma_moment: c must be non-negative");
  const double a = shape - k_over_alpha;
  if (c == 0.0) {
    if (!(a > 0)) {
      throw DomainError("upper_incomplete_gamma_moment: divergent at c = 0");
    }
    return std::exp(std::lgamma(a) - std::lgamma(shape));
  }
  return std::exp(log_upper_incomplete_gamma(a, c) - std::lgamma(shape));
}

}  // namespace nrm
