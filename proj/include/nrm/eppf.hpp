#pragma once

// Partition-level laws: conditional (finite Gibbs) and marginal EPPFs, the
// laws of the latent variable U_n, block counts, occupancy laws and moments
// of linear functionals.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/models/families.hpp"
#include "nrm/models/family.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/numerics/quadrature.hpp"
#include "nrm/numerics/special_functions.hpp"
#include "nrm/partition.hpp"

namespace nrm {

namespace detail {

inline int checked_total(std::span<const int> sizes) {
  if (sizes.empty()) throw DomainError("eppf: empty size sequence");
  int n = 0;
  for (int e : sizes) {
    if (e < 1) throw DomainError("eppf: cell sizes must be positive");
    n += e;
  }
  return n;
}

inline double log_kappa_product(const CumulantTable& kt, std::span<const int> sizes) {
  double s = 0.0;
  for (int e : sizes) s += kt.log_kappa(e);
  return s;
}

inline int max_size(std::span<const int> sizes) {
  return *std::max_element(sizes.begin(), sizes.end());
}

}  // namespace detail

/// The finite Gibbs partition law p(e | u) = prod_j kappa_{e_j}(u) / m_n(u)
/// for partitions of n items at a fixed u, with the tables cached.
class ConditionalGibbsLaw {
 public:
  ConditionalGibbsLaw(const NrmFamily& family, int n, double u)
      : n_(n),
        u_(u),
        cumulants_(family.cumulant_table(n, u)),
        log_m_n_(family.moment_table(n, u).log_moment(n)) {}

  int n() const noexcept { return n_; }
  double u() const noexcept { return u_; }
  const CumulantTable& cumulants() const noexcept { return cumulants_; }
  double log_kappa(int l) const { return cumulants_.log_kappa(l); }
  double log_m_n() const noexcept { return log_m_n_; }

  double log_eppf(std::span<const int> sizes) const {
    if (detail::checked_total(sizes) != n_) {
      throw DomainError("conditional eppf: sizes do not sum to n=" + std::to_string(n_));
    }
    return detail::log_kappa_product(cumulants_, sizes) - log_m_n_;
  }
  double eppf(std::span<const int> sizes) const { return std::exp(log_eppf(sizes)); }

 private:
  int n_;
  double u_;
  CumulantTable cumulants_;
  double log_m_n_;
};

inline double log_conditional_eppf(const NrmFamily& family, std::span<const int> sizes,
                                   double u) {
  const int n = detail::checked_total(sizes);
  return ConditionalGibbsLaw(family, n, u).log_eppf(sizes);
}

inline double conditional_eppf(const NrmFamily& family, std::span<const int> sizes, double u) {
  return std::exp(log_conditional_eppf(family, sizes, u));
}

/// log of u^{n+q-1} e^{-psi(u)} prod_j kappa_{e_j}(u), the unnormalized
/// density of U_n given the partition (q = 0) or of its T^{-q}-weighted
/// analogue.
inline double log_u_density_given_partition(const NrmFamily& family, std::span<const int> sizes,
                                            double u, double q = 0.0) {
  const int n = detail::checked_total(sizes);
  if (!(u > 0)) return kNegInf;
  const CumulantTable kt = family.cumulant_table(detail::max_size(sizes), u);
  return (n + q - 1.0) * std::log(u) - family.psi(u) + detail::log_kappa_product(kt, sizes);
}

inline double u_density_given_partition(const NrmFamily& family, std::span<const int> sizes,
                                        double u) {
  return std::exp(log_u_density_given_partition(family, sizes, u));
}

/// log int_0^inf u^{n+q-1} e^{-psi(u)} prod_j kappa_{e_j}(u) du.
inline IntegrationResult integrate_u_given_partition(const NrmFamily& family,
                                                     std::span<const int> sizes,
                                                     const QuadratureConfig& cfg = {},
                                                     double q = 0.0) {
  std::vector<int> sz(sizes.begin(), sizes.end());
  return integrate_halfline(
      [&](double u) { return log_u_density_given_partition(family, sz, u, q); }, cfg);
}

/// The normalized density of U_n given the partition.
class UPosterior {
 public:
  UPosterior(const NrmFamily& family, std::vector<int> sizes, const QuadratureConfig& cfg = {},
             double q = 0.0)
      : family_(&family), sizes_(std::move(sizes)), q_(q) {
    const int n = detail::checked_total(sizes_);
    if (!(n + q > 0)) throw DomainError("u posterior: need n + q > 0");
    log_normalizer_ = integrate_u_given_partition(family, sizes_, cfg, q).log_value;
  }

  double log_unnormalized(double u) const {
    return log_u_density_given_partition(*family_, sizes_, u, q_);
  }
  double log_density(double u) const { return log_unnormalized(u) - log_normalizer_; }
  double density(double u) const { return std::exp(log_density(u)); }
  double log_normalizer() const noexcept { return log_normalizer_; }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  double q() const noexcept { return q_; }

 private:
  const NrmFamily* family_;
  std::vector<int> sizes_;
  double q_;
  double log_normalizer_;
};

inline double u_density_given_partition_normalized(const NrmFamily& family,
                                                   std::span<const int> sizes, double u,
                                                   const QuadratureConfig& cfg = {}) {
  return UPosterior(family, std::vector<int>(sizes.begin(), sizes.end()), cfg).density(u);
}

/// log p(e_1, ..., e_k) = log int u^{n-1} prod kappa e^{-psi} du - log Gamma(n).
inline double log_marginal_eppf(const NrmFamily& family, std::span<const int> sizes,
                                const QuadratureConfig& cfg = {}) {
  const int n = detail::checked_total(sizes);
  if (n == 1) return 0.0;
  return integrate_u_given_partition(family, sizes, cfg).log_value - std::lgamma(n);
}

inline double marginal_eppf(const NrmFamily& family, std::span<const int> sizes,
                            const QuadratureConfig& cfg = {}) {
  return std::exp(log_marginal_eppf(family, sizes, cfg));
}

/// log f_{U_n}(u) = (n-1) log u - psi(u) + log m_n(u) - log Gamma(n).
inline double log_u_density_marginal(const NrmFamily& family, int n, double u) {
  if (n < 1) throw DomainError("u density: n must be positive");
  if (!(u > 0)) return kNegInf;
  return (n - 1.0) * std::log(u) - family.psi(u) + family.moment_table(n, u).log_moment(n) -
         std::lgamma(n);
}

inline double u_density_marginal(const NrmFamily& family, int n, double u) {
  return std::exp(log_u_density_marginal(family, n, u));
}

/// P(n(p) = k | u) = B_{n,k}(kappa_1(u), kappa_2(u), ...) / m_n(u), k = 1..n.
inline std::vector<double> block_count_distribution(const NrmFamily& family, int n, double u) {
  if (n < 1) throw DomainError("block counts: n must be positive");
  if (n > 64) throw SizeLimitError("block counts: n above 64");
  const CumulantTable kt = family.cumulant_table(n, u);
  const double log_m = family.moment_table(n, u).log_moment(n);
  const std::vector<double> log_kappa = kt.log_values();
  const BellTable bell(log_kappa, n, true);
  std::vector<double> out(n);
  for (int k = 1; k <= n; ++k) out[k - 1] = std::exp(bell(n, k) - log_m);
  return out;
}

/// P(m | u) = n! / m_n(u) prod_j (kappa_j(u) / j!)^{m_j} / m_j!.
inline double log_occupancy_probability(const NrmFamily& family, const OccupancyVector& m,
                                        double u) {
  const int n = static_cast<int>(m.counts.size());
  if (n < 1) throw DomainError("occupancy: empty vector");
  if (m.n() != n) {
    throw DomainError("occupancy: sum of j m_j is " + std::to_string(m.n()) +
                      ", expected n=" + std::to_string(n));
  }
  int largest = 0;
  for (int j = 1; j <= n; ++j) {
    if (m.m(j) < 0) throw DomainError("occupancy: negative count");
    if (m.m(j) > 0) largest = j;
  }
  const CumulantTable kt = family.cumulant_table(largest, u);
  double out = std::lgamma(n + 1.0) - family.moment_table(n, u).log_moment(n);
  for (int j = 1; j <= largest; ++j) {
    const int mj = m.m(j);
    if (mj == 0) continue;
    out += mj * (kt.log_kappa(j) - std::lgamma(j + 1.0)) - std::lgamma(mj + 1.0);
  }
  return out;
}

inline double occupancy_distribution(const NrmFamily& family, const OccupancyVector& m,
                                     double u) {
  return std::exp(log_occupancy_probability(family, m, u));
}

/// Integral of prod_l g_l^{c_l} against the base distribution H, where c_l
/// counts how many of the items carrying g_l share a cell.
using CellIntegral = std::function<double(const std::vector<int>& counts)>;

inline constexpr int kMaxFunctionalOrder = 10;

/// E[prod_l P(g_l)^{powers[l]}] for a homogeneous NRM with base H.
///
/// Item i carries function g_{l(i)}; the moment equals
/// sum_p EPPF(p) prod_j H(prod_{i in C_j} g_{l(i)}).  Partitions are grouped
/// by their size multiset so each distinct EPPF value is integrated once.
inline double functional_moment(const NrmFamily& family, const std::vector<int>& powers,
                                const CellIntegral& cell_integral,
                                const QuadratureConfig& cfg = {}) {
  if (!family.capabilities().is_homogeneous) {
    throw CapabilityError("functional_moment: homogeneous families only");
  }
  std::vector<int> label;
  for (std::size_t l = 0; l < powers.size(); ++l) {
    if (powers[l] < 0) throw DomainError("functional_moment: negative power");
    for (int r = 0; r < powers[l]; ++r) label.push_back(static_cast<int>(l));
  }
  const int n = static_cast<int>(label.size());
  if (n == 0) return 1.0;
  if (n > kMaxFunctionalOrder) {
    throw SizeLimitError("functional_moment: total power above " +
                         std::to_string(kMaxFunctionalOrder));
  }
  std::map<std::vector<int>, double> weight_by_sizes;
  std::map<std::vector<int>, double> cell_cache;
  for_each_assignment(n, [&](const std::vector<int>& a) {
    const int k = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<std::vector<int>> counts(k, std::vector<int>(powers.size(), 0));
    std::vector<int> sizes(k, 0);
    for (int i = 0; i < n; ++i) {
      ++counts[a[i]][label[i]];
      ++sizes[a[i]];
    }
    double product = 1.0;
    for (const auto& c : counts) {
      auto it = cell_cache.find(c);
      if (it == cell_cache.end()) it = cell_cache.emplace(c, cell_integral(c)).first;
      product *= it->second;
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    weight_by_sizes[sizes] += product;
  });
  double total = 0.0;
  for (const auto& [sizes, weight] : weight_by_sizes) {
    if (weight == 0.0) continue;
    total += weight * marginal_eppf(family, sizes, cfg);
  }
  return total;
}

/// Marginal EPPF of the generalized gamma family through the binomial
/// expansion of (y - b)^{n-1} and truncated gamma moments; an alternative
/// to the quadrature route.
inline double gen_gamma_eppf_series(const GenGamma& family, std::span<const int> sizes) {
  const int n = detail::checked_total(sizes);
  const int k = static_cast<int>(sizes.size());
  const double a = family.alpha(), b = family.b(), theta = family.theta();
  double log_front = k * (std::log(theta * a) - std::lgamma(1.0 - a)) - std::lgamma(n) -
                     std::log(a) - k * std::log(theta) + std::lgamma(k);
  for (int e : sizes) log_front += std::lgamma(e - a);
  const double c = theta * std::pow(b, a);
  if (b == 0.0) return std::exp(log_front);
  log_front += c;
  long double sum = 0.0L;
  for (int i = 0; i < n; ++i) {
    const double log_term = log_binomial(n - 1, i) + i * std::log(b) + (i / a) * std::log(theta);
    const double moment = upper_incomplete_gamma_moment(i / a, k, c);
    const long double term = std::exp(static_cast<long double>(log_term)) * moment;
    sum += (i % 2 == 0) ? term : -term;
  }
  if (!(sum > 0)) throw NumericalError("gen_gamma_eppf_series: cancellation");
  return std::exp(log_front + static_cast<double>(std::log(sum)));
}

}  // namespace nrm
