#pragma once

// Cumulant and moment tables at a fixed u, linked by Theile's recursion
//   m_n = kappa_n + sum_{l=1}^{n-1} C(n-1, l-1) kappa_l m_{n-l}.
// Entries are stored as logarithms together with extended-precision
// values of the rescaled table (T -> cT), which the inverse recursion needs.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"

namespace nrm {

namespace detail {

inline constexpr int kExactBinomialMax = 64;

inline const std::vector<std::vector<std::uint64_t>>& exact_binomials() {
  static const auto table = [] {
    std::vector<std::vector<std::uint64_t>> t(kExactBinomialMax + 1);
    for (int n = 0; n <= kExactBinomialMax; ++n) {
      t[n].assign(n + 1, 1);
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

}  // namespace detail

/// C(n, k); exact integers up to n = 64, lgamma beyond.
inline double binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  if (n <= detail::kExactBinomialMax) {
    return static_cast<double>(detail::exact_binomials()[n][k]);
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(n - k + 1.0)));
}

inline double log_binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return kNegInf;
  if (n <= detail::kExactBinomialMax) {
    return std::log(static_cast<double>(detail::exact_binomials()[n][k]));
  }
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

namespace detail {

using Quad = boost::multiprecision::cpp_bin_float_quad;

// Shared storage for cumulant and moment tables.  With scale s the entry
// x_i is held as x_i e^{i s}; s is chosen so every rescaled entry is at most
// one.  Inverting Theile's recursion subtracts nearly equal quantities when
// high orders are small next to products of low ones, so the rescaled values
// carry 113 bits.
inline constexpr int kMaxRecursionOrder = 1000;

inline void check_recursion_order(int N) {
  if (N > kMaxRecursionOrder) {
    throw SizeLimitError("Theile recursion: order " + std::to_string(N) + " exceeds " +
                         std::to_string(kMaxRecursionOrder));
  }
}

// C(n, 0..n) in quad precision; exact while the entries stay below 2^113.
inline std::vector<Quad> binomial_row(int n) {
  std::vector<Quad> row(n + 1);
  row[0] = 1;
  for (int k = 1; k <= n; ++k) row[k] = row[k - 1] * (n - k + 1) / k;
  return row;
}

class LogTable {
 public:
  LogTable(double u, std::vector<long double> log_values, const char* what)
      : u_(u), log_values_(std::move(log_values)) {
    check(what);
    log_scale_ = 0.0L;
    for (int i = 1; i <= order(); ++i) {
      const long double candidate = -log_values_[i - 1] / i;
      if (i == 1 || candidate < log_scale_) log_scale_ = candidate;
    }
    scaled_.reserve(log_values_.size());
    for (int i = 1; i <= order(); ++i) {
      scaled_.emplace_back(std::exp(log_values_[i - 1] + i * log_scale_));
    }
  }

  LogTable(double u, long double log_scale, std::vector<Quad> scaled, const char* what)
      : u_(u), log_scale_(log_scale), scaled_(std::move(scaled)) {
    log_values_.reserve(scaled_.size());
    for (int i = 1; i <= static_cast<int>(scaled_.size()); ++i) {
      const long double v = static_cast<long double>(scaled_[i - 1]);
      log_values_.push_back(v > 0 ? std::log(v) - i * log_scale_ : -INFINITY);
    }
    check(what);
  }

  double u() const noexcept { return u_; }
  int order() const noexcept { return static_cast<int>(log_values_.size()); }
  long double log_entry(int i) const { return log_values_.at(i - 1); }
  std::vector<double> log_values() const {
    return std::vector<double>(log_values_.begin(), log_values_.end());
  }
  long double log_scale() const noexcept { return log_scale_; }
  const std::vector<Quad>& scaled() const noexcept { return scaled_; }

 protected:
  static std::vector<long double> logs_of(const std::vector<double>& values, const char* what) {
    std::vector<long double> logs;
    logs.reserve(values.size());
    for (double v : values) {
      if (!(v > 0)) throw DomainError(std::string(what) + " table: entries must be positive");
      logs.push_back(std::log(static_cast<long double>(v)));
    }
    return logs;
  }
  static std::vector<long double> widen(const std::vector<double>& v) {
    return std::vector<long double>(v.begin(), v.end());
  }

 private:
  void check(const char* what) const {
    for (std::size_t i = 0; i < log_values_.size(); ++i) {
      if (!std::isfinite(log_values_[i])) {
        throw RangeError(std::string(what) + " table: entry " + std::to_string(i + 1) +
                         " is zero or not representable");
      }
    }
  }

  double u_;
  std::vector<long double> log_values_;
  long double log_scale_ = 0.0L;
  std::vector<Quad> scaled_;
};

}  // namespace detail

/// kappa_1(u)..kappa_N(u).
class CumulantTable : public detail::LogTable {
 public:
  CumulantTable(double u, std::vector<long double> log_values)
      : LogTable(u, std::move(log_values), "cumulant") {}
  CumulantTable(double u, const std::vector<double>& log_values)
      : LogTable(u, widen(log_values), "cumulant") {}
  CumulantTable(double u, long double log_scale, std::vector<detail::Quad> scaled)
      : LogTable(u, log_scale, std::move(scaled), "cumulant") {}

  static CumulantTable from_values(double u, const std::vector<double>& values) {
    return CumulantTable(u, logs_of(values, "cumulant"));
  }

  double log_kappa(int l) const { return static_cast<double>(log_entry(l)); }
  double kappa(int l) const { return checked_exp(log_kappa(l), "kappa"); }
};

/// m_0(u) = 1, m_1(u)..m_N(u).
class MomentTable : public detail::LogTable {
 public:
  MomentTable(double u, std::vector<long double> log_values)
      : LogTable(u, std::move(log_values), "moment") {}
  MomentTable(double u, const std::vector<double>& log_values)
      : LogTable(u, widen(log_values), "moment") {}
  MomentTable(double u, long double log_scale, std::vector<detail::Quad> scaled)
      : LogTable(u, log_scale, std::move(scaled), "moment") {}

  static MomentTable from_values(double u, const std::vector<double>& values) {
    return MomentTable(u, logs_of(values, "moment"));
  }

  double log_moment(int n) const { return n == 0 ? 0.0 : static_cast<double>(log_entry(n)); }
  double moment(int n) const { return checked_exp(log_moment(n), "moment"); }
};

/// Theile's recursion forward, on the rescaled table; every term is positive.
inline MomentTable moments_from_cumulants(const CumulantTable& kt) {
  using detail::Quad;
  const int N = kt.order();
  detail::check_recursion_order(N);
  const auto& k = kt.scaled();
  std::vector<Quad> m(N + 1);
  m[0] = 1;
  for (int n = 1; n <= N; ++n) {
    Quad acc = k[n - 1];
    const auto c = detail::binomial_row(n - 1);
    for (int l = 1; l < n; ++l) {
      acc += c[l - 1] * k[l - 1] * m[n - l];
    }
    m[n] = acc;
  }
  m.erase(m.begin());
  return MomentTable(kt.u(), kt.log_scale(), std::move(m));
}

/// Theile's recursion inverted:
///   kappa_n = m_n - sum_{l=1}^{n-1} C(n-1, l-1) kappa_l m_{n-l}.
inline CumulantTable cumulants_from_moments(const MomentTable& mt) {
  using detail::Quad;
  const int N = mt.order();
  detail::check_recursion_order(N);
  const auto& m = mt.scaled();
  std::vector<Quad> kappa(N);
  for (int n = 1; n <= N; ++n) {
    Quad s = m[n - 1];
    const auto c = detail::binomial_row(n - 1);
    for (int l = 1; l < n; ++l) {
      s -= c[l - 1] * kappa[l - 1] * m[n - l - 1];
    }
    if (!(s > 0)) {
      throw NumericalError("cumulants_from_moments: kappa_" + std::to_string(n) +
                           " is not positive; the moment table is inconsistent");
    }
    kappa[n - 1] = s;
  }
  return CumulantTable(mt.u(), mt.log_scale(), std::move(kappa));
}

}  // namespace nrm
