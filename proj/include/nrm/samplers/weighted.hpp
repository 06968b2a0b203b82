#pragma once

// The T^{-q}-weighted version of an NRM law and the Laplace-inversion
// density of Y_n = n T / Gamma_n.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nrm/eppf.hpp"
#include "nrm/errors.hpp"
#include "nrm/models/family.hpp"
#include "nrm/samplers/u_samplers.hpp"

namespace nrm {

/// Laws under P_q(d mu) proportional to T^{-q} P(d mu).  Cumulants are
/// unchanged; the density of U_{n,q} given p gains a factor u^q:
///   f(u | p) proportional to u^{n+q-1} e^{-psi(u)} prod_j kappa_{e_j}(u),
/// and the EPPF is
///   int u^{n+q-1} e^{-psi} prod kappa du / int u^{n+q-1} e^{-psi} m_n du.
class WeightedVariant {
 public:
  template <class F>
  static decltype(auto) guarded(F&& f) {
    try {
      return f();
    } catch (const IntegrationError& e) {
      throw NumericalError(std::string("weighted variant: the weighted integral diverges or "
                                       "failed to converge: ") +
                           e.what());
    }
  }

  WeightedVariant(const NrmFamily& base, double q) : base_(&base), q_(q) {
    if (!std::isfinite(q)) throw DomainError("weighted variant: q must be finite");
  }

  const NrmFamily& base() const noexcept { return *base_; }
  double q() const noexcept { return q_; }

  double log_u_density_given_partition(std::span<const int> sizes, double u) const {
    check(detail::checked_total(sizes));
    return nrm::log_u_density_given_partition(*base_, sizes, u, q_);
  }

  UPosterior posterior(std::vector<int> sizes, const QuadratureConfig& cfg = {}) const {
    check(detail::checked_total(sizes));
    return guarded([&] { return UPosterior(*base_, std::move(sizes), cfg, q_); });
  }

  double log_eppf(std::span<const int> sizes, const QuadratureConfig& cfg = {}) const {
    const int n = detail::checked_total(sizes);
    check(n);
    if (q_ == 0.0) return log_marginal_eppf(*base_, sizes, cfg);
    const double log_num = guarded([&] {
      return integrate_u_given_partition(*base_, sizes, cfg, q_).log_value;
    });
    const double log_den = guarded([&] {
      return integrate_halfline(
                 [&](double u) {
                   return (n + q_ - 1.0) * std::log(u) - base_->psi(u) +
                          base_->moment_table(n, u).log_moment(n);
                 },
                 cfg)
          .log_value;
    });
    return log_num - log_den;
  }

  double eppf(std::span<const int> sizes, const QuadratureConfig& cfg = {}) const {
    return std::exp(log_eppf(sizes, cfg));
  }

  GridSampler u_grid(std::vector<int> sizes) const {
    check(detail::checked_total(sizes));
    return guarded([&] { return u_posterior_grid(*base_, std::move(sizes), q_); });
  }

 private:
  void check(int n) const {
    if (!(n + q_ > 0)) {
      throw DomainError("weighted variant: need n + q > 0 (n=" + std::to_string(n) +
                        ", q=" + std::to_string(q_) + ")");
    }
  }

  const NrmFamily* base_;
  double q_;
};

inline WeightedVariant weighted_variant(const NrmFamily& base, double q) {
  return WeightedVariant(base, q);
}

/// log f_{Y_n}(y) = (n+1) log(n/y) - log Gamma(n+1) - psi(n/y) + log m_n(n/y).
inline double log_inversion_density(const NrmFamily& family, int n, double y) {
  if (n < 1) throw DomainError("inversion density: n must be positive");
  if (!(y > 0)) throw DomainError("inversion density: y must be positive");
  const double u = n / y;
  return (n + 1.0) * std::log(u) - std::lgamma(n + 1.0) - family.psi(u) +
         family.moment_table(n, u).log_moment(n);
}

inline double inversion_density(const NrmFamily& family, int n, double y) {
  return std::exp(log_inversion_density(family, n, y));
}

}  // namespace nrm
