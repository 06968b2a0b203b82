#pragma once

// Portable random stream.  std::mt19937_64 is fully specified by the
// standard, but the std:: distributions are not, so every variate below is
// derived from raw 64-bit words by code in this file.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"

namespace nrm {

class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 5489u) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("below: n must be positive");
    const std::uint64_t limit = max() - max() % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x < limit) return x % n;
    }
  }

  double exponential() { return -std::log(uniform()); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, 1) by Marsaglia and Tsang; shape < 1 uses
  /// G_a = G_{a+1} U^{1/a}, carried in logs so tiny shapes do not underflow.
  double gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

  double log_gamma_variate(double shape) {
    if (!(shape > 0)) throw DomainError("gamma: shape must be positive");
    if (shape < 1.0) {
      return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

  double beta(double a, double b) {
    const double la = log_gamma_variate(a);
    const double lb = log_gamma_variate(b);
    // a / (a + b) computed as 1 / (1 + e^{lb - la}).
    return 1.0 / (1.0 + std::exp(lb - la));
  }

  /// Index drawn with probability proportional to exp(log_weights[i]).
  std::size_t categorical_log(std::span<const double> log_weights) {
    const double total = log_sum_exp(log_weights);
    if (!(total > kNegInf) || !std::isfinite(total)) {
      throw NumericalError("categorical: weights are not normalizable");
    }
    double target = uniform();
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
      target -= std::exp(log_weights[i] - total);
      if (target <= 0.0) return i;
    }
    // Rounding left a sliver; return the last index with positive weight.
    for (std::size_t i = log_weights.size(); i-- > 0;) {
      if (log_weights[i] > kNegInf) return i;
    }
    return log_weights.size() - 1;
  }

  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0 || !std::isfinite(w)) throw DomainError("categorical: invalid weight");
      total += w;
    }
    if (!(total > 0)) throw DomainError("categorical: zero total weight");
    double target = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      target -= weights[i];
      if (target <= 0.0) return i;
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0) return i;
    }
    return weights.size() - 1;
  }

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nrm
