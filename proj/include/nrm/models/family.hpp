#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nrm/cumulants.hpp"
#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/random.hpp"

namespace nrm {

struct Capabilities {
  bool has_closed_kappa = false;
  bool has_T_sampler = false;
  bool is_homogeneous = true;
};

using ParameterList = std::vector<std::pair<std::string, double>>;

/// A homogeneous normalized random measure, described through its tilted
/// cumulants kappa_l(u) and Laplace exponent psi(u).
class NrmFamily {
 public:
  virtual ~NrmFamily() = default;

  virtual std::string name() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual ParameterList parameters() const = 0;

  /// log kappa_l(u).
  virtual double log_kappa(int l, double u) const = 0;

  /// psi(u), the Laplace exponent of the total mass T.
  virtual double psi(double u) const = 0;

  /// Whether kappa_l(0) is finite for every l, so u = 0 is admissible.
  virtual bool finite_at_zero() const { return true; }

  virtual double sample_total_mass(RandomStream&) const {
    throw CapabilityError(name() + ": no sampler for the total mass T");
  }

  double kappa(int l, double u) const { return checked_exp(log_kappa(l, u), "kappa"); }

  virtual CumulantTable cumulant_table(int N, double u) const {
    check_order(N);
    std::vector<long double> logs(N);
    for (int l = 1; l <= N; ++l) logs[l - 1] = log_kappa(l, u);
    return CumulantTable(u, std::move(logs));
  }

  /// m_1(u)..m_N(u) with m_n(u) = E[T^n e^{-uT}] e^{psi(u)}.
  virtual MomentTable moment_table(int N, double u) const {
    return moments_from_cumulants(cumulant_table(N, u));
  }

  std::string describe() const {
    std::string s = name();
    for (const auto& [key, value] : parameters()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", value);
      s += " " + key + "=" + buf;
    }
    return s;
  }

 protected:
  void check_u(double u) const {
    if (!(u >= 0) || !std::isfinite(u)) {
      throw DomainError(name() + ": u must be finite and non-negative");
    }
    if (u == 0 && !finite_at_zero()) {
      throw DomainError(name() + ": cumulants diverge at u = 0");
    }
  }
  static void check_order(int l) {
    if (l < 1) throw DomainError("cumulant order must be at least 1");
  }
};

using FamilyPtr = std::shared_ptr<const NrmFamily>;

inline MomentTable moment_table(const NrmFamily& family, int N, double u) {
  return family.moment_table(N, u);
}

}  // namespace nrm
