#pragma once

// Thorin measures U on (0, inf) for generalized gamma convolutions,
//   psi(u) = theta int log(1 + u/v) U(dv),
//   kappa_l(u) = theta Gamma(l) int (v + u)^{-l} U(dv).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/numerics/quadrature.hpp"
#include "nrm/random.hpp"

namespace nrm {

class ThorinMeasure {
 public:
  enum class Kind { Atoms, PowerLaw, Arcsine, Density };

  /// Finite list of atoms (v_i, w_i) with v_i > 0, w_i > 0.
  static ThorinMeasure atoms(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw DomainError("thorin: atom list is empty");
    for (auto [v, w] : atoms) {
      if (!(v > 0) || !(w > 0) || !std::isfinite(v) || !std::isfinite(w)) {
        throw DomainError("thorin: atoms need v > 0 and w > 0");
      }
    }
    ThorinMeasure m(Kind::Atoms);
    m.atoms_ = std::move(atoms);
    return m;
  }

  /// scale * (v - shift)^{alpha - 1} on (shift, inf).
  static ThorinMeasure power_law(double alpha, double scale, double shift = 0.0) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("thorin: power law needs 0 < alpha < 1");
    if (!(scale > 0)) throw DomainError("thorin: power law scale must be positive");
    if (!(shift >= 0)) throw DomainError("thorin: shift must be non-negative");
    ThorinMeasure m(Kind::PowerLaw);
    m.alpha_ = alpha;
    m.scale_ = scale;
    m.lo_ = shift;
    m.hi_ = std::numeric_limits<double>::infinity();
    return m;
  }

  /// mass * arcsine law on (lo, hi): mass / (pi sqrt((v - lo)(hi - v))).
  static ThorinMeasure arcsine(double lo, double hi, double mass = 1.0) {
    if (!(lo >= 0) || !(hi > lo) || !std::isfinite(hi)) {
      throw DomainError("thorin: arcsine needs 0 <= lo < hi < inf");
    }
    if (!(mass > 0)) throw DomainError("thorin: arcsine mass must be positive");
    ThorinMeasure m(Kind::Arcsine);
    m.lo_ = lo;
    m.hi_ = hi;
    m.scale_ = mass;
    return m;
  }

  /// A density given by its logarithm on (lo, hi); hi may be infinite.
  /// The Thorin integrability conditions are checked numerically.
  static ThorinMeasure density(std::function<double(double)> log_density, double lo, double hi) {
    if (!(lo >= 0) || !(hi > lo)) throw DomainError("thorin: density support must be (lo, hi)");
    ThorinMeasure m(Kind::Density);
    m.log_density_ = std::move(log_density);
    m.lo_ = lo;
    m.hi_ = hi;
    // int_0^1 |log v| U(dv) < inf and int_1^inf U(dv)/v < inf.
    try {
      m.integrate_log([](double v) {
        const double a = std::abs(std::log(v));
        const double g = v < 1 ? a : 1.0 / v;
        return g > 0 ? std::log(g) : kNegInf;
      });
    } catch (const Error& e) {
      throw DomainError(std::string("thorin: density violates the integrability conditions: ") +
                        e.what());
    }
    return m;
  }

  Kind kind() const noexcept { return kind_; }
  double support_lo() const noexcept { return kind_ == Kind::Atoms ? atoms_min() : lo_; }
  double support_hi() const noexcept { return kind_ == Kind::Atoms ? atoms_max() : hi_; }
  const std::vector<std::pair<double, double>>& atom_list() const noexcept { return atoms_; }
  double power_alpha() const noexcept { return alpha_; }
  double power_scale() const noexcept { return scale_; }

  /// Total mass; infinite for the power law.
  double total_mass() const {
    switch (kind_) {
      case Kind::Atoms: {
        double s = 0.0;
        for (auto [v, w] : atoms_) s += w;
        return s;
      }
      case Kind::PowerLaw:
        return std::numeric_limits<double>::infinity();
      case Kind::Arcsine:
        return scale_;
      case Kind::Density:
        return std::exp(integrate_log([](double) { return 0.0; }));
    }
    return 0.0;
  }

  /// Thorin measure of the law tilted by e^{-bT}: support shifted right by b.
  ThorinMeasure tilt(double b) const {
    if (!(b > 0) || !std::isfinite(b)) throw DomainError("thorin tilt: b must be positive");
    ThorinMeasure m = *this;
    switch (kind_) {
      case Kind::Atoms:
        for (auto& [v, w] : m.atoms_) v += b;
        break;
      case Kind::PowerLaw:
      case Kind::Arcsine:
        m.lo_ += b;
        m.hi_ += b;
        break;
      case Kind::Density: {
        auto base = log_density_;
        m.log_density_ = [base, b](double v) { return base(v - b); };
        m.lo_ += b;
        m.hi_ += b;
        break;
      }
    }
    return m;
  }

  /// log int g(v) U(dv) for a positive function supplied as log g.
  template <class LogG>
  double integrate_log(LogG&& log_g, const QuadratureConfig& cfg = {1e-12, 0.0, 4000}) const {
    switch (kind_) {
      case Kind::Atoms: {
        LogAccumulator acc;
        for (auto [v, w] : atoms_) acc.add(std::log(w) + log_g(v));
        return acc.log_value();
      }
      case Kind::PowerLaw: {
        const double log_scale = std::log(scale_);
        const double a = alpha_, lo = lo_;
        return integrate_halfline(
                   [&](double t) { return log_scale + (a - 1.0) * std::log(t) + log_g(lo + t); },
                   cfg)
            .log_value;
      }
      case Kind::Arcsine: {
        // v = lo + 2h sin^2(phi/2) = c - h cos(phi); dU = (mass/pi) dphi.
        const double h = 0.5 * (hi_ - lo_);
        auto v_of = [&](double phi) {
          const double s = std::sin(0.5 * phi);
          return lo_ + 2.0 * h * s * s;
        };
        double peak = kNegInf;
        for (int i = 0; i <= 64; ++i) {
          const double phi = std::numbers::pi * (i + 0.5) / 65.0;
          peak = std::max(peak, static_cast<double>(log_g(v_of(phi))));
        }
        peak = std::max(peak, static_cast<double>(log_g(v_of(1e-12))));
        if (peak == kNegInf) return kNegInf;
        auto res = integrate(
            [&](double phi) {
              const double g = log_g(v_of(phi));
              return g == kNegInf ? 0.0 : std::exp(g - peak);
            },
            0.0, std::numbers::pi, cfg, 8);
        if (!(res.value > 0)) return kNegInf;
        return peak + std::log(res.value) + std::log(scale_) - std::log(std::numbers::pi);
      }
      case Kind::Density: {
        if (std::isinf(hi_)) {
          const double lo = lo_;
          return integrate_halfline(
                     [&](double t) { return log_density_(lo + t) + log_g(lo + t); }, cfg)
              .log_value;
        }
        // Logistic map of the line onto (lo, hi).
        const double lo = lo_, width = hi_ - lo_;
        return integrate_line_log(
                   [&](double x) {
                     const double sig = 1.0 / (1.0 + std::exp(-x));
                     const double v = lo + width * sig;
                     if (!(v > lo) || !(v < lo + width)) return kNegInf;
                     // log(sig (1 - sig)) = -|x| - 2 log1p(e^{-|x|})
                     const double log_jac =
                         std::log(width) - std::abs(x) - 2.0 * std::log1p(std::exp(-std::abs(x)));
                     return log_density_(v) + log_g(v) + log_jac;
                   },
                   cfg)
            .log_value;
      }
    }
    return kNegInf;
  }

  /// E[1/V] for V ~ U / |U|; infinite when the integral diverges.
  double mean_inverse() const {
    switch (kind_) {
      case Kind::Atoms: {
        double s = 0.0;
        for (auto [v, w] : atoms_) s += w / v;
        return s / total_mass();
      }
      case Kind::Arcsine: {
        const double c = 0.5 * (lo_ + hi_);
        const double h = 0.5 * (hi_ - lo_);
        const double prod = (c - h) * (c + h);
        if (!(lo_ > 0) || !(prod > 0)) return std::numeric_limits<double>::infinity();
        return 1.0 / std::sqrt(prod);
      }
      default:
        throw CapabilityError("thorin: mean_inverse needs a finite atom or arcsine measure");
    }
  }

  /// A draw from the normalized measure U / |U| (finite measures only).
  double sample_normalized(RandomStream& rng) const {
    switch (kind_) {
      case Kind::Atoms: {
        std::vector<double> w;
        w.reserve(atoms_.size());
        for (auto [v, wt] : atoms_) w.push_back(wt);
        return atoms_[rng.categorical(w)].first;
      }
      case Kind::Arcsine: {
        const double h = 0.5 * (hi_ - lo_);
        const double s = std::sin(0.5 * std::numbers::pi * rng.uniform());
        return lo_ + 2.0 * h * s * s;
      }
      default:
        throw CapabilityError("thorin: sampling needs a finite atom or arcsine measure");
    }
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Atoms: {
        std::string s = "atoms(";
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(atoms_[i].first) + ":" + std::to_string(atoms_[i].second);
        }
        return s + ")";
      }
      case Kind::PowerLaw:
        return "power_law(alpha=" + std::to_string(alpha_) + ",shift=" + std::to_string(lo_) + ")";
      case Kind::Arcsine:
        return "arcsine(" + std::to_string(lo_) + "," + std::to_string(hi_) + ")";
      case Kind::Density:
        return "density(" + std::to_string(lo_) + "," + std::to_string(hi_) + ")";
    }
    return "";
  }

 private:
  explicit ThorinMeasure(Kind kind) : kind_(kind) {}

  double atoms_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (auto [v, w] : atoms_) m = std::min(m, v);
    return m;
  }
  double atoms_max() const {
    double m = 0.0;
    for (auto [v, w] : atoms_) m = std::max(m, v);
    return m;
  }

  Kind kind_;
  std::vector<std::pair<double, double>> atoms_;
  std::function<double(double)> log_density_;
  double alpha_ = 0.0;
  double scale_ = 1.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Thorin measure of the positive alpha-stable law with psi(u) = theta u^alpha
/// when used with scale parameter theta: alpha / (Gamma(alpha) Gamma(1-alpha)) v^{alpha-1}.
inline ThorinMeasure stable_thorin(double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("stable_thorin: alpha must lie in (0, 1)");
  return ThorinMeasure::power_law(alpha, alpha / (std::tgamma(alpha) * std::tgamma(1.0 - alpha)));
}

/// Arcsine Thorin measure of the first passage time law with parameter p.
inline ThorinMeasure first_passage_thorin(double p) {
  if (!(p >= 0.5 && p < 1.0)) throw DomainError("first_passage_thorin: p must lie in [1/2, 1)");
  const double b = 2.0 * std::sqrt(p * (1.0 - p));
  return ThorinMeasure::arcsine(std::max(0.0, 1.0 - b), 1.0 + b, 1.0);
}

}  // namespace nrm
