#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "nrm/errors.hpp"

namespace nrm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

/// Exponentiate at an API boundary; overflow is reported, never returned as inf.
inline double checked_exp(double log_value, const char* what) {
  if (std::isnan(log_value)) throw NumericalError(std::string(what) + ": NaN");
  if (log_value > 709.78) {
    throw RangeError(std::string(what) + " overflows double (log value " +
                     std::to_string(log_value) + ")");
  }
  return std::exp(log_value);
}

/// Streaming log-sum-exp accumulator.
class LogAccumulator {
 public:
  void add(double log_term) { value_ = log_add(value_, log_term); }
  double log_value() const noexcept { return value_; }

 private:
  double value_ = kNegInf;
};

}  // namespace nrm
