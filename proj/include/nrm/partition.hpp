#pragma once

// Set partitions of {1..n}, occupancy (multiplicity) vectors and partial
// Bell polynomials.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"

namespace nrm {

inline constexpr int kMaxEnumerationSize = 12;

/// A set partition of n items.  Cells are labelled in order of first
/// appearance; internally labels are 0-based, the text form is 1-based.
class Partition {
 public:
  Partition() = default;

  /// Relabels an arbitrary assignment into canonical order-of-appearance form.
  static Partition from_assignment(std::span<const int> labels) {
    Partition p;
    std::vector<int> relabel;
    std::vector<int> seen_label;
    p.assignment_.reserve(labels.size());
    for (int label : labels) {
      auto it = std::find(seen_label.begin(), seen_label.end(), label);
      int cell;
      if (it == seen_label.end()) {
        cell = static_cast<int>(seen_label.size());
        seen_label.push_back(label);
        p.sizes_.push_back(0);
      } else {
        cell = static_cast<int>(it - seen_label.begin());
      }
      p.assignment_.push_back(cell);
      ++p.sizes_[cell];
    }
    return p;
  }

  static Partition from_assignment(std::initializer_list<int> labels) {
    std::vector<int> v(labels);
    return from_assignment(std::span<const int>(v));
  }

  /// All items in one cell.
  static Partition single_block(int n) { return from_assignment(std::vector<int>(n, 0)); }

  static Partition singletons(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return from_assignment(v);
  }

  /// Parses "1|1|2".
  static Partition parse(const std::string& text) {
    std::vector<int> labels;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, '|')) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(field, &used);
        if (used != field.size() || v < 1) throw std::invalid_argument(field);
        labels.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("partition: cannot parse label '" + field + "' in '" + text + "'");
      }
    }
    if (labels.empty()) throw ConfigError("partition: empty assignment");
    return from_assignment(std::span<const int>(labels));
  }

  int n() const noexcept { return static_cast<int>(assignment_.size()); }
  int k() const noexcept { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int cell_of(int item) const { return assignment_.at(item); }

  std::vector<std::vector<int>> cells() const {
    std::vector<std::vector<int>> out(sizes_.size());
    for (int i = 0; i < n(); ++i) out[assignment_[i]].push_back(i);
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (int i = 0; i < n(); ++i) {
      if (i) s += '|';
      s += std::to_string(assignment_[i] + 1);
    }
    return s;
  }

  bool is_canonical() const {
    int next = 0;
    for (int c : assignment_) {
      if (c > next) return false;
      if (c == next) ++next;
    }
    return next == k();
  }

  auto operator<=>(const Partition& other) const { return assignment_ <=> other.assignment_; }
  bool operator==(const Partition& other) const { return assignment_ == other.assignment_; }

 private:
  std::vector<int> assignment_;
  std::vector<int> sizes_;
};

/// Calls f(assignment) for every restricted growth string of length n, i.e.
/// every canonical set partition, in lexicographic order.
inline void for_each_assignment(int n, const std::function<void(const std::vector<int>&)>& f) {
  if (n < 1) throw DomainError("enumerate: n must be positive");
  if (n > kMaxEnumerationSize) {
    throw SizeLimitError("enumerate: n=" + std::to_string(n) + " exceeds the cap of " +
                         std::to_string(kMaxEnumerationSize) + "; use a sampler instead");
  }
  std::vector<int> a(n, 0), maxima(n, 0);
  for (;;) {
    f(a);
    int i = n - 1;
    while (i > 0 && a[i] == maxima[i - 1] + 1) --i;
    if (i == 0) return;
    ++a[i];
    maxima[i] = std::max(maxima[i - 1], a[i]);
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxima[j] = maxima[i];
    }
  }
}

inline void for_each_partition(int n, const std::function<void(const Partition&)>& f) {
  for_each_assignment(n, [&](const std::vector<int>& a) {
    f(Partition::from_assignment(std::span<const int>(a)));
  });
}

inline std::vector<Partition> enumerate_partitions(int n) {
  std::vector<Partition> out;
  for_each_partition(n, [&](const Partition& p) { out.push_back(p); });
  return out;
}

/// m_1..m_n with m_i the number of cells of size i.
struct OccupancyVector {
  std::vector<int> counts;  // counts[i - 1] = m_i

  int n() const {
    int s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) s += static_cast<int>(i + 1) * counts[i];
    return s;
  }
  int k() const {
    int s = 0;
    for (int c : counts) s += c;
    return s;
  }
  int m(int i) const {
    return (i >= 1 && i <= static_cast<int>(counts.size())) ? counts[i - 1] : 0;
  }

  /// Non-increasing cell sizes with these multiplicities.
  std::vector<int> sizes() const {
    std::vector<int> out;
    for (int i = static_cast<int>(counts.size()); i >= 1; --i) {
      for (int r = 0; r < counts[i - 1]; ++r) out.push_back(i);
    }
    return out;
  }

  bool operator==(const OccupancyVector&) const = default;
};

inline OccupancyVector occupancy_of_sizes(std::span<const int> sizes) {
  int n = 0;
  for (int e : sizes) {
    if (e < 1) throw DomainError("occupancy: cell sizes must be positive");
    n += e;
  }
  OccupancyVector m{std::vector<int>(n, 0)};
  for (int e : sizes) ++m.counts[e - 1];
  return m;
}

inline OccupancyVector occupancy(const Partition& p) {
  return occupancy_of_sizes(std::span<const int>(p.sizes()));
}

/// All occupancy vectors of n (equivalently, integer partitions of n).
inline std::vector<OccupancyVector> enumerate_occupancies(int n) {
  if (n < 1) throw DomainError("enumerate_occupancies: n must be positive");
  if (n > 64) throw SizeLimitError("enumerate_occupancies: n above 64");
  std::vector<OccupancyVector> out;
  std::vector<int> parts;
  std::function<void(int, int)> rec = [&](int remaining, int largest) {
    if (remaining == 0) {
      out.push_back(occupancy_of_sizes(std::span<const int>(parts)));
      return;
    }
    for (int part = std::min(remaining, largest); part >= 1; --part) {
      parts.push_back(part);
      rec(remaining - part, part);
      parts.pop_back();
    }
  };
  rec(n, n);
  return out;
}

/// log of the number of set partitions of {1..n} whose cell sizes are the
/// given multiset: n! / (prod e_j! prod m_i!).
inline double log_count_with_sizes(std::span<const int> sizes) {
  const OccupancyVector m = occupancy_of_sizes(sizes);
  double out = std::lgamma(m.n() + 1.0);
  for (int e : sizes) out -= std::lgamma(e + 1.0);
  for (int c : m.counts) out -= std::lgamma(c + 1.0);
  return out;
}

/// Bell number B_n by the triangle recursion (exact for n <= 25).
inline std::uint64_t bell_number(int n) {
  if (n < 0 || n > 25) throw DomainError("bell_number: n must lie in [0, 25]");
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

/// Partial Bell polynomials B_{n,k}(x_1, x_2, ...) for 0 <= k <= n <= n_max,
/// through B_{n,k} = sum_{i=1}^{n-k+1} C(n-1, i-1) x_i B_{n-i,k-1}.
///
/// With log_space set, inputs and stored values are logarithms; use this
/// when the x_i span many orders of magnitude.
class BellTable {
 public:
  BellTable(std::span<const double> x, int n_max, bool log_space = false)
      : n_max_(n_max), log_space_(log_space) {
    if (n_max < 0) throw DomainError("BellTable: n_max must be non-negative");
    if (static_cast<int>(x.size()) < n_max) {
      throw DomainError("BellTable: need x_1..x_n_max");
    }
    values_.assign(static_cast<std::size_t>(n_max + 1) * (n_max + 1),
                   log_space ? kNegInf : 0.0);
    at(0, 0) = log_space ? 0.0 : 1.0;
    // log C(n-1, i-1) built row by row.
    std::vector<double> log_binom_row;
    for (int n = 1; n <= n_max; ++n) {
      log_binom_row.assign(n, 0.0);
      for (int j = 1; j < n; ++j) {
        log_binom_row[j] = log_binom_row[j - 1] + std::log(static_cast<double>(n - j)) -
                           std::log(static_cast<double>(j));
      }
      for (int k = 1; k <= n; ++k) {
        if (log_space) {
          LogAccumulator acc;
          for (int i = 1; i <= n - k + 1; ++i) {
            acc.add(log_binom_row[i - 1] + x[i - 1] + at(n - i, k - 1));
          }
          at(n, k) = acc.log_value();
        } else {
          double s = 0.0;
          double binom = 1.0;  // C(n-1, i-1)
          for (int i = 1; i <= n - k + 1; ++i) {
            s += binom * x[i - 1] * at(n - i, k - 1);
            binom = binom * (n - i) / i;
          }
          at(n, k) = s;
        }
      }
    }
  }

  int n_max() const noexcept { return n_max_; }
  bool log_space() const noexcept { return log_space_; }

  /// B_{n,k}, or its logarithm when the table was built in log space.
  double operator()(int n, int k) const {
    if (n < 0 || n > n_max_ || k < 0) throw DomainError("BellTable: index out of range");
    if (k > n) return log_space_ ? kNegInf : 0.0;
    return values_[static_cast<std::size_t>(n) * (n_max_ + 1) + k];
  }

 private:
  double& at(int n, int k) { return values_[static_cast<std::size_t>(n) * (n_max_ + 1) + k]; }

  int n_max_;
  bool log_space_;
  std::vector<double> values_;
};

/// B_{n,k}(x) with x[0] = x_1.
inline double bell_partial(int n, int k, std::span<const double> x) {
  if (k < 1 || k > n) throw DomainError("bell_partial: need 1 <= k <= n");
  if (static_cast<int>(x.size()) < n - k + 1) {
    throw DomainError("bell_partial: need x_1..x_{n-k+1}");
  }
  std::vector<double> padded(x.begin(), x.end());
  padded.resize(std::max<std::size_t>(padded.size(), n), 0.0);
  return BellTable(padded, n)(n, k);
}

inline double bell_partial(int n, int k, std::initializer_list<double> x) {
  std::vector<double> v(x);
  return bell_partial(n, k, std::span<const double>(v));
}

}  // namespace nrm
