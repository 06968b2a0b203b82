#pragma once

// The concrete prior families.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "nrm/errors.hpp"
#include "nrm/models/family.hpp"
#include "nrm/models/thorin.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/numerics/quadrature.hpp"
#include "nrm/numerics/special_functions.hpp"

namespace nrm {

namespace detail {

// Positive stable variate with E[exp(-lambda S)] = exp(-lambda^alpha), by
// Kanter's representation, in logs.
inline double log_positive_stable(double alpha, RandomStream& rng) {
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  return std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(e));
}

inline const QuadratureConfig& family_quadrature() {
  static const QuadratureConfig cfg{1e-12, 0.0, 4000};
  return cfg;
}

}  // namespace detail

/// Dirichlet process: rho(ds) = theta s^{-1} e^{-s} ds.
class Dirichlet final : public NrmFamily {
 public:
  explicit Dirichlet(double theta) : theta_(theta) {
    if (!(theta > 0) || !std::isfinite(theta)) throw DomainError("dirichlet: theta must be positive");
  }

  std::string name() const override { return "dirichlet"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ParameterList parameters() const override { return {{"theta", theta_}}; }
  double theta() const noexcept { return theta_; }

  double log_kappa(int l, double u) const override {
    check_order(l);
    check_u(u);
    return std::log(theta_) + std::lgamma(static_cast<double>(l)) - l * std::log1p(u);
  }

  double psi(double u) const override {
    check_u(u);
    return theta_ * std::log1p(u);
  }

  double sample_total_mass(RandomStream& rng) const override { return rng.gamma(theta_); }

 private:
  double theta_;
};

/// Positive alpha-stable NRM with psi(u) = theta u^alpha.
class Stable final : public NrmFamily {
 public:
  Stable(double alpha, double theta) : alpha_(alpha), theta_(theta) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("stable: alpha must lie in (0, 1)");
    if (!(theta > 0) || !std::isfinite(theta)) throw DomainError("stable: theta must be positive");
  }

  std::string name() const override { return "stable"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ParameterList parameters() const override { return {{"alpha", alpha_}, {"theta", theta_}}; }
  bool finite_at_zero() const override { return false; }
  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }

  /// C in psi(u) = C u^alpha.  Integrating the Thorin density
  /// alpha v^{alpha-1} / (Gamma(alpha) Gamma(1-alpha)) against
  /// theta log(1 + u/v) gives exactly C = theta.
  double scale_constant() const noexcept { return theta_; }

  double log_kappa(int l, double u) const override {
    check_order(l);
    check_u(u);
    return std::log(theta_ * alpha_) + (alpha_ - l) * std::log(u) + std::lgamma(l - alpha_) -
           std::lgamma(1.0 - alpha_);
  }

  double psi(double u) const override {
    if (!(u >= 0)) throw DomainError("stable: u must be non-negative");
    return theta_ * std::pow(u, alpha_);
  }

  double sample_total_mass(RandomStream& rng) const override {
    return std::exp(std::log(theta_) / alpha_ + detail::log_positive_stable(alpha_, rng));
  }

  ThorinMeasure thorin() const { return stable_thorin(alpha_); }

 private:
  double alpha_, theta_;
};

/// Generalized gamma NRM: the stable law tilted by e^{-bT},
/// psi(u) = theta ((u + b)^alpha - b^alpha).
class GenGamma final : public NrmFamily {
 public:
  static constexpr long kMaxTrials = 10'000'000;

  GenGamma(double alpha, double b, double theta) : alpha_(alpha), b_(b), theta_(theta) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("gen-gamma: alpha must lie in (0, 1)");
    if (!(b >= 0) || !std::isfinite(b)) throw DomainError("gen-gamma: b must be non-negative");
    if (!(theta > 0) || !std::isfinite(theta)) throw DomainError("gen-gamma: theta must be positive");
  }

  std::string name() const override { return "gen-gamma"; }
  Capabilities capabilities() const override { return {true, true, true}; }
  ParameterList parameters() const override {
    return {{"alpha", alpha_}, {"b", b_}, {"theta", theta_}};
  }
  bool finite_at_zero() const override { return b_ > 0; }
  double alpha() const noexcept { return alpha_; }
  double b() const noexcept { return b_; }
  double theta() const noexcept { return theta_; }
  double scale_constant() const noexcept { return theta_; }

  double log_kappa(int l, double u) const override {
    check_order(l);
    check_u(u);
    return std::log(theta_ * alpha_) + (alpha_ - l) * std::log(u + b_) +
           std::lgamma(l - alpha_) - std::lgamma(1.0 - alpha_);
  }

  double psi(double u) const override {
    check_u(u);
    if (b_ == 0) return theta_ * std::pow(u, alpha_);
    // b^alpha ((1 + u/b)^alpha - 1) without cancellation for small u.
    return theta_ * std::pow(b_, alpha_) * std::expm1(alpha_ * std::log1p(u / b_));
  }

  double sample_total_mass(RandomStream& rng) const override {
    const double log_scale = std::log(theta_) / alpha_;
    for (long trial = 0; trial < kMaxTrials; ++trial) {
      const double t = std::exp(log_scale + detail::log_positive_stable(alpha_, rng));
      if (b_ == 0 || std::log(rng.uniform()) < -b_ * t) return t;
    }
    throw NumericalError("gen-gamma: tilted stable rejection exceeded " +
                         std::to_string(kMaxTrials) + " trials");
  }

  ThorinMeasure thorin() const {
    const ThorinMeasure base = stable_thorin(alpha_);
    return b_ > 0 ? base.tilt(b_) : base;
  }

 private:
  double alpha_, b_, theta_;
};

/// NRM built from a beta process with constant concentration c:
/// rho(ds) = mass * c s^{-1} (1 - s)^{c-1} ds on (0, 1).
class BetaNrm final : public NrmFamily {
 public:
  BetaNrm(double c, double mass) : c_(c), mass_(mass) {
    if (!(c > 0) || !std::isfinite(c)) throw DomainError("beta: c must be positive");
    if (!(mass > 0) || !std::isfinite(mass)) throw DomainError("beta: mass must be positive");
  }

  std::string name() const override { return "beta"; }
  Capabilities capabilities() const override { return {true, false, true}; }
  ParameterList parameters() const override { return {{"c", c_}, {"mass", mass_}}; }
  double c() const noexcept { return c_; }
  double mass() const noexcept { return mass_; }

  double log_kappa(int l, double u) const override {
    check_order(l);
    check_u(u);
    return std::log(mass_) + std::lgamma(static_cast<double>(l)) + std::lgamma(c_ + 1.0) -
           std::lgamma(l + c_) + log_hyp1f1(l, c_ + l, -u);
  }

  /// psi(u) = int (1 - e^{-us}) rho(ds). Below s = 1/2 the integral runs in
  /// x = log s; above it in t = (1 - s)^c, which turns c (1 - s)^{c-1} ds into dt.
  double psi(double u) const override {
    check_u(u);
    if (u == 0) return 0.0;
    const double inv_c = 1.0 / c_;
    const double x_lo = std::log(1e-17 / std::max(u, 1.0));
    const auto small = integrate(
        [u, c = c_](double x) {
          const double s = std::exp(x);
          return -std::expm1(-u * s) * c * std::exp((c - 1.0) * std::log1p(-s));
        },
        x_lo, -std::numbers::ln2, detail::family_quadrature(), 16);
    const auto large = integrate(
        [=](double t) {
          const double s = -std::expm1(std::log(t) * inv_c);
          return -std::expm1(-u * s) / s;
        },
        0.0, std::exp(-c_ * std::numbers::ln2), detail::family_quadrature(), 8);
    return mass_ * (small.value + large.value);
  }

 private:
  double c_, mass_;
};

/// Generalized gamma convolution with Thorin measure U:
/// psi(u) = theta int log(1 + u/v) U(dv).
class Ggc final : public NrmFamily {
 public:
  Ggc(double theta, ThorinMeasure thorin, std::string label = "ggc")
      : theta_(theta), thorin_(std::move(thorin)), label_(std::move(label)) {
    if (!(theta > 0) || !std::isfinite(theta)) throw DomainError("ggc: theta must be positive");
  }

  std::string name() const override { return label_; }
  Capabilities capabilities() const override {
    const bool finite = thorin_.kind() == ThorinMeasure::Kind::Atoms ||
                        thorin_.kind() == ThorinMeasure::Kind::Arcsine;
    return {false, finite, true};
  }
  ParameterList parameters() const override {
    ParameterList out{{"theta", theta_}};
    if (thorin_.kind() == ThorinMeasure::Kind::Arcsine) {
      out.emplace_back("support_lo", thorin_.support_lo());
      out.emplace_back("support_hi", thorin_.support_hi());
    } else if (thorin_.kind() == ThorinMeasure::Kind::Atoms) {
      int i = 0;
      for (auto [v, w] : thorin_.atom_list()) {
        out.emplace_back("v" + std::to_string(i), v);
        out.emplace_back("w" + std::to_string(i), w);
        ++i;
      }
    }
    return out;
  }
  bool finite_at_zero() const override { return thorin_.support_lo() > 0; }
  const ThorinMeasure& thorin() const noexcept { return thorin_; }
  double theta() const noexcept { return theta_; }

  double log_kappa(int l, double u) const override {
    check_order(l);
    check_u(u);
    const double log_int = thorin_.integrate_log(
        [=](double v) { return -l * std::log(v + u); }, detail::family_quadrature());
    return std::log(theta_) + std::lgamma(static_cast<double>(l)) + log_int;
  }

  double psi(double u) const override {
    if (!(u >= 0)) throw DomainError("ggc: u must be non-negative");
    if (u == 0) return 0.0;
    const double log_int = thorin_.integrate_log(
        [=](double v) { return std::log(std::log1p(u / v)); }, detail::family_quadrature());
    return theta_ * std::exp(log_int);
  }

  /// T = G_{theta beta} sum_i P_i / V_i with beta = |U|, stick-breaking
  /// weights P_i from Beta(1, theta beta) and V_i iid from U / beta.  The
  /// series stops once the unbroken stick falls below 1e-10; the remainder
  /// R contributes R E[1/V] when that is finite and R / V otherwise.
  double sample_total_mass(RandomStream& rng) const override {
    if (!capabilities().has_T_sampler) {
      throw CapabilityError("ggc: total mass sampling needs a finite Thorin measure");
    }
    const double beta = thorin_.total_mass();
    const double concentration = theta_ * beta;
    double remaining = 1.0;
    double series = 0.0;
    while (remaining >= kStickTolerance) {
      const double w = rng.beta(1.0, concentration);
      series += remaining * w / thorin_.sample_normalized(rng);
      remaining *= 1.0 - w;
    }
    const double mean_inv = thorin_.mean_inverse();
    series += std::isfinite(mean_inv) ? remaining * mean_inv
                                      : remaining / thorin_.sample_normalized(rng);
    return rng.gamma(concentration) * series;
  }

  static constexpr double kStickTolerance = 1e-10;

 private:
  double theta_;
  ThorinMeasure thorin_;
  std::string label_;
};

/// Generalized inverse Gaussian total mass with density proportional to
/// t^{lambda-1} exp(-(delta^2/t + v^2 t)/2).  Moments of the tilted law are
/// Bessel ratios and cumulants follow by inverting Theile's recursion.  When
/// that inversion cancels badly (large u, where the tilted law concentrates)
/// the cumulants come from the Thorin representation instead:
///   kappa_l(u) = Gamma(l) [ int_0^inf g(xi)/2 (w + xi/(2 delta^2))^{-l} dxi
///                           + max(lambda, 0) w^{-l} ],   w = u + v^2/2,
///   g(xi) = 2 / (xi pi^2 (J_nu^2 + Y_nu^2)(sqrt xi)),      nu = |lambda|.
class Gig final : public NrmFamily {
 public:
  Gig(double lambda, double delta, double v) : lambda_(lambda), delta_(delta), v_(v) {
    if (!std::isfinite(lambda)) throw DomainError("gig: lambda must be finite");
    if (!(delta >= 0) || !(v >= 0) || !std::isfinite(delta) || !std::isfinite(v)) {
      throw DomainError("gig: delta and v must be non-negative");
    }
    if (delta == 0) {
      throw DomainError("gig: delta must be positive (delta = 0 is the gamma law)");
    }
    if (v == 0 && !(lambda < 0)) throw DomainError("gig: v = 0 requires lambda < 0");
  }

  std::string name() const override { return "gig"; }
  Capabilities capabilities() const override { return {false, true, true}; }
  ParameterList parameters() const override {
    return {{"lambda", lambda_}, {"delta", delta_}, {"v", v_}};
  }
  bool finite_at_zero() const override { return v_ > 0; }
  double lambda() const noexcept { return lambda_; }
  double delta() const noexcept { return delta_; }
  double v() const noexcept { return v_; }

  /// log m_n(u) = n log(delta/w) + log K_{lambda+n}(delta w) - log K_lambda(delta w).
  double log_moment(int n, double u) const {
    if (n < 0) throw DomainError("gig: moment order must be non-negative");
    check_u(u);
    if (n == 0) return 0.0;
    const double w = std::sqrt(2.0 * u + v_ * v_);
    return n * std::log(delta_ / w) + log_bessel_k(lambda_ + n, delta_ * w) -
           log_bessel_k(lambda_, delta_ * w);
  }

  MomentTable moment_table(int N, double u) const override { return tables(N, u).second; }

  CumulantTable cumulant_table(int N, double u) const override { return tables(N, u).first; }

  double log_kappa(int l, double u) const override {
    return cumulant_table(l, u).log_kappa(l);
  }

  /// kappa_l(u) by quadrature over the Thorin measure.
  double log_kappa_thorin(int l, double u) const {
    check_order(l);
    check_u(u);
    const double w = u + 0.5 * v_ * v_;
    const double nu = std::abs(lambda_);
    const double inv_scale = 0.5 / (delta_ * delta_);
    auto log_f = [=](double xi) { return -l * std::log(w + xi * inv_scale); };
    // On (0, xi0) the kernel is flat to 1e-10 and g dxi = (2/pi) d arg(J + iY),
    // so that piece is (1/pi) atan(-J/Y)(sqrt xi0) times the kernel.
    const double xi0 = std::min(1e-2, 1e-10 * w / (inv_scale * l));
    const double z0 = std::sqrt(xi0);
    const double phase = std::atan2(boost::math::cyl_bessel_j(nu, z0),
                                    -boost::math::cyl_neumann(nu, z0));
    const double head = std::log(phase / std::numbers::pi) + log_f(0.5 * xi0);
    const auto res = integrate_halfline(
        [=](double t) {
          const double xi = xi0 + t;
          return log_thorin_density(nu, xi) - std::numbers::ln2 + log_f(xi);
        },
        detail::family_quadrature());
    double out = log_add(head, res.log_value);
    if (lambda_ > 0) out = log_add(out, std::log(lambda_) - l * std::log(w));
    return out + std::lgamma(static_cast<double>(l));
  }

  /// log kappa_1..N(u) from the same Thorin integral, by one trapezoid sweep
  /// in x = log(xi - xi0) so every order reuses the Bessel evaluations.
  std::vector<long double> thorin_log_cumulants(int N, double u) const {
    check_order(N);
    check_u(u);
    const double w = u + 0.5 * v_ * v_;
    const double nu = std::abs(lambda_);
    const double inv_scale = 0.5 / (delta_ * delta_);
    const double xi0 = std::min(1e-2, 1e-10 * w / (inv_scale * N));
    const double z0 = std::sqrt(xi0);
    const double phase = std::atan2(boost::math::cyl_bessel_j(nu, z0),
                                    -boost::math::cyl_neumann(nu, z0));
    const double x_lo = std::log(xi0) - 40.0;
    const double x_hi = std::max(std::log(w / inv_scale), 0.0) + 90.0;
    constexpr double h = 0.1;
    const int steps = static_cast<int>(std::ceil((x_hi - x_lo) / h));
    std::vector<std::vector<double>> terms(N);
    for (auto& t : terms) t.reserve(steps + 2);
    for (int i = 0; i <= steps; ++i) {
      const double x = x_lo + i * h;
      const double xi = xi0 + std::exp(x);
      const double base = log_thorin_density(nu, xi) - std::numbers::ln2 + x + std::log(h);
      const double log_kernel = std::log(w + xi * inv_scale);
      for (int l = 1; l <= N; ++l) terms[l - 1].push_back(base - l * log_kernel);
    }
    std::vector<long double> out(N);
    for (int l = 1; l <= N; ++l) {
      double v = log_add(std::log(phase / std::numbers::pi) - l * std::log(w + 0.5 * xi0 * inv_scale),
                         log_sum_exp(terms[l - 1]));
      if (lambda_ > 0) v = log_add(v, std::log(lambda_) - l * std::log(w));
      out[l - 1] = v + std::lgamma(static_cast<double>(l));
    }
    return out;
  }

  /// log g(xi) with g(xi) = 2 / (xi pi^2 (J_nu^2 + Y_nu^2)(sqrt xi)).
  static double log_thorin_density(double nu, double xi) {
    const double z = std::sqrt(xi);
    double log_modulus;  // log(J^2 + Y^2)
    if (z > 1e4) {
      const double mu = 4.0 * nu * nu, r = 1.0 / (4.0 * z * z);
      log_modulus = std::log(2.0 / (std::numbers::pi * z)) +
                    std::log1p(0.5 * (mu - 1.0) * r + 0.375 * (mu - 1.0) * (mu - 9.0) * r * r);
    } else {
      const double j = boost::math::cyl_bessel_j(nu, z);
      const double y = boost::math::cyl_neumann(nu, z);
      if (!std::isfinite(y)) return kNegInf;
      log_modulus = std::log(j * j + y * y);
    }
    return std::numbers::ln2 - std::log(xi) - 2.0 * std::log(std::numbers::pi) - log_modulus;
  }

  double psi(double u) const override {
    if (!(u >= 0)) throw DomainError("gig: u must be non-negative");
    if (u == 0) return 0.0;
    const double w = std::sqrt(2.0 * u + v_ * v_);
    double log_phi;
    if (v_ > 0) {
      log_phi = lambda_ * (std::log(v_) - std::log(w)) + log_bessel_k(lambda_, delta_ * w) -
                log_bessel_k(lambda_, delta_ * v_);
    } else {
      // v^lambda / K_lambda(delta v) -> 2 (delta/2)^{-lambda} / Gamma(-lambda) as v -> 0.
      log_phi = std::numbers::ln2 - lambda_ * std::log(0.5 * delta_) - std::lgamma(-lambda_) -
                lambda_ * std::log(w) + log_bessel_k(lambda_, delta_ * w);
    }
    return -log_phi;
  }

  double sample_total_mass(RandomStream& rng) const override {
    if (v_ == 0) {
      // Inverse gamma: T = delta^2 / (2 G_{-lambda}).
      return delta_ * delta_ / (2.0 * rng.gamma(-lambda_));
    }
    const double omega = delta_ * v_;
    const double x = lambda_ >= 0 ? standard_gig(lambda_, omega, rng)
                                  : 1.0 / standard_gig(-lambda_, omega, rng);
    return delta_ / v_ * x;
  }

  /// Density proportional to x^{lambda-1} exp(-omega (x + 1/x) / 2), lambda >= 0,
  /// by Devroye's two-sided exponential envelope on log x.
  static double standard_gig(double lambda, double omega, RandomStream& rng) {
    const double alpha = std::sqrt(omega * omega + lambda * lambda) - lambda;
    auto psi = [&](double x) {
      return -alpha * (std::cosh(x) - 1.0) - lambda * (std::expm1(x) - x);
    };
    auto dpsi = [&](double x) { return -alpha * std::sinh(x) - lambda * std::expm1(x); };
    double t, s;
    {
      const double x = -psi(1.0);
      if (x >= 0.5 && x <= 2.0) {
        t = 1.0;
      } else if (x > 2.0) {
        t = std::sqrt(2.0 / (alpha + lambda));
      } else {
        t = std::log(4.0 / (alpha + 2.0 * lambda));
      }
    }
    {
      const double x = -psi(-1.0);
      if (x >= 0.5 && x <= 2.0) {
        s = 1.0;
      } else if (x > 2.0) {
        s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lambda));
      } else {
        const double inv_a = 1.0 / alpha;
        const double cand = std::log1p(inv_a + std::sqrt(inv_a * inv_a + 2.0 * inv_a));
        s = lambda > 0 ? std::min(1.0 / lambda, cand) : cand;
      }
    }
    const double eta = -psi(t), zeta = -dpsi(t), theta = -psi(-s), xi = dpsi(-s);
    const double p = 1.0 / xi, r = 1.0 / zeta;
    const double td = t - r * eta, sd = s - p * theta, q = td + sd;
    for (;;) {
      const double u = rng.uniform(), v = rng.uniform(), w = rng.uniform();
      double x;
      if (u < q / (p + q + r)) {
        x = -sd + q * v;
      } else if (u < (q + r) / (p + q + r)) {
        x = td - r * std::log(v);
      } else {
        x = -sd + p * std::log(v);
      }
      double log_env = 0.0;
      if (x > td) {
        log_env = -eta - zeta * (x - t);
      } else if (x < -sd) {
        log_env = -theta + xi * (x + s);
      }
      if (std::log(w) + log_env <= psi(x)) {
        const double ratio = lambda / omega;
        return (ratio + std::sqrt(1.0 + ratio * ratio)) * std::exp(x);
      }
    }
  }

 private:
  // Largest m_n / kappa_n accepted from the inverse recursion; beyond it the
  // cancellation costs more than five digits of the double moments.
  static constexpr double kMaxCancellation = 1e5;

  std::pair<CumulantTable, MomentTable> tables(int N, double u) const {
    check_order(N);
    check_u(u);
    const double w = std::sqrt(2.0 * u + v_ * v_);
    const double z = delta_ * w;
    const double log_k0 = log_bessel_k(lambda_, z);
    std::vector<long double> logs(N);
    for (int n = 1; n <= N; ++n) {
      logs[n - 1] = n * std::log(delta_ / w) + log_bessel_k(lambda_ + n, z) - log_k0;
    }
    MomentTable mt(u, std::move(logs));
    try {
      auto kt = cumulants_from_moments(mt);
      bool stable = true;
      for (int n = 1; n <= N; ++n) {
        stable = stable && mt.log_moment(n) - kt.log_kappa(n) < std::log(kMaxCancellation);
      }
      if (stable) return {std::move(kt), std::move(mt)};
    } catch (const NumericalError&) {
    }
    std::vector<long double> klogs = thorin_log_cumulants(N, u);
    CumulantTable kt(u, std::move(klogs));
    auto moments = moments_from_cumulants(kt);
    return {std::move(kt), std::move(moments)};
  }

  double lambda_, delta_, v_;
};

/// m_n(u) for the GIG family.
inline double gig_moment(double lambda, double delta, double v, int n, double u) {
  return checked_exp(Gig(lambda, delta, v).log_moment(n, u), "gig_moment");
}

}  // namespace nrm
