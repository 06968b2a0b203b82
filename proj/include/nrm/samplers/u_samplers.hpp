#pragma once

// Draws of the latent variable U_n, marginally and given a partition.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nrm/eppf.hpp"
#include "nrm/errors.hpp"
#include "nrm/models/family.hpp"
#include "nrm/numerics/log_space.hpp"
#include "nrm/random.hpp"

namespace nrm {

namespace detail {

// Locates the maximum of a log-density on the line: a coarse scan followed by
// golden-section refinement around the best scan point.
inline double find_mode(const std::function<double(double)>& log_g, double lo = -40.0,
                        double hi = 40.0, double step = 0.5) {
  double best_x = lo, best = kNegInf;
  for (double x = lo; x <= hi + 1e-12; x += step) {
    const double g = log_g(x);
    if (std::isnan(g)) throw NumericalError("mode search: log-density is NaN");
    if (g > best) {
      best = g;
      best_x = x;
    }
  }
  if (best == kNegInf) throw NumericalError("mode search: log-density is -inf on the scan range");
  // A maximum on the scan boundary means the mass lies further out.
  while ((best_x <= lo || best_x >= hi) && std::abs(best_x) < 700.0) {
    const double dir = best_x <= lo ? -1.0 : 1.0;
    const double x = best_x + dir * step * 4.0;
    const double g = log_g(x);
    if (!(g > best)) break;
    best = g;
    best_x = x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double a = best_x - step, b = best_x + step;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double gc = log_g(c), gd = log_g(d);
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = log_g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = log_g(d);
    }
  }
  const double x = 0.5 * (a + b);
  return log_g(x) >= best ? x : best_x;
}

}  // namespace detail

/// Inverse-CDF sampler for a density on (0, inf) given by its logarithm.
/// Works on x = log u: the mode is located, the grid is widened until the
/// density is 40 log-units below the mode on both sides, and the density is
/// tabulated on 4096 points and interpolated linearly between them.
class GridSampler {
 public:
  static constexpr int kPoints = 4096;
  static constexpr double kDrop = 40.0;

  explicit GridSampler(const std::function<double(double)>& log_density_u) {
    auto log_g = [&](double x) {
      const double u = std::exp(x);
      if (!(u > 0) || !std::isfinite(u)) return kNegInf;
      return log_density_u(u) + x;
    };
    mode_x_ = detail::find_mode(log_g);
    const double peak = log_g(mode_x_);
    auto edge = [&](double dir) {
      double step = 0.25, x = mode_x_;
      for (;;) {
        x += dir * step;
        if (std::abs(x) > 700.0) {
          throw NumericalError("grid sampler: cannot bracket the tail mass within |log u| <= 700");
        }
        if (log_g(x) < peak - kDrop) return x;
        step *= 1.5;
      }
    };
    const double lo = edge(-1.0), hi = edge(1.0);
    h_ = (hi - lo) / (kPoints - 1);
    x_.resize(kPoints);
    f_.resize(kPoints);
    for (int i = 0; i < kPoints; ++i) {
      x_[i] = lo + i * h_;
      const double g = log_g(x_[i]);
      if (std::isnan(g)) throw NumericalError("grid sampler: log-density is NaN");
      f_[i] = std::exp(g - peak);
    }
    cdf_.assign(kPoints, 0.0);
    for (int i = 1; i < kPoints; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * h_ * (f_[i - 1] + f_[i]);
    log_mass_ = peak + std::log(cdf_.back());
  }

  double sample(RandomStream& rng) const { return std::exp(sample_log(rng)); }

  /// A draw of log u.
  double sample_log(RandomStream& rng) const {
    const double target = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const int i = std::clamp(static_cast<int>(it - cdf_.begin()) - 1, 0, kPoints - 2);
    const double r = target - cdf_[i];
    const double f0 = f_[i], slope = (f_[i + 1] - f_[i]) / h_;
    double t;
    if (std::abs(slope) * h_ < 1e-12 * (f0 + 1e-300)) {
      t = f0 > 0 ? r / f0 : 0.5 * h_;
    } else {
      // f0 t + slope t^2 / 2 = r, root in [0, h].
      const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * r);
      t = 2.0 * r / (f0 + std::sqrt(disc));
    }
    return x_[i] + std::clamp(t, 0.0, h_);
  }

  /// Mode of the density of log u.
  double mode_log_u() const noexcept { return mode_x_; }
  double lower_u() const { return std::exp(x_.front()); }
  double upper_u() const { return std::exp(x_.back()); }
  /// log of the integral of the input density (trapezoid estimate).
  double log_mass() const noexcept { return log_mass_; }

 private:
  std::vector<double> x_, f_, cdf_;
  double h_ = 0.0;
  double mode_x_ = 0.0;
  double log_mass_ = 0.0;
};

/// One univariate slice-sampling update (stepping out, then shrinkage) for a
/// log-density on the line.
inline double slice_step(const std::function<double(double)>& log_g, double x, RandomStream& rng,
                         double width = 1.0, int max_steps = 50) {
  const double gx = log_g(x);
  if (!(gx > kNegInf)) throw NumericalError("slice: current point has zero density");
  const double level = gx - rng.exponential();
  double left = x - width * rng.uniform();
  double right = left + width;
  int j = static_cast<int>(std::floor(max_steps * rng.uniform()));
  int k = max_steps - 1 - j;
  while (j-- > 0 && log_g(left) > level) left -= width;
  while (k-- > 0 && log_g(right) > level) right += width;
  for (int guard = 0; guard < 200; ++guard) {
    const double cand = left + (right - left) * rng.uniform();
    if (log_g(cand) > level) return cand;
    if (cand < x) {
      left = cand;
    } else {
      right = cand;
    }
  }
  throw NumericalError("slice: shrinkage did not terminate");
}

enum class USamplerMethod { Grid, Slice };

struct UDraw {
  double u;
  std::string method;
};

/// Grid sampler for the posterior of U_n given the cell sizes (optionally
/// with the extra factor u^q of a T^{-q}-weighted law).
inline GridSampler u_posterior_grid(const NrmFamily& family, std::vector<int> sizes,
                                    double q = 0.0) {
  return GridSampler(
      [&family, sizes, q](double u) { return log_u_density_given_partition(family, sizes, u, q); });
}

inline GridSampler u_marginal_grid(const NrmFamily& family, int n) {
  return GridSampler([&family, n](double u) { return log_u_density_marginal(family, n, u); });
}

/// A draw of U_n = Gamma_n / T, falling back to a grid on its density when
/// the family has no sampler for T.
inline UDraw sample_u_marginal(const NrmFamily& family, int n, RandomStream& rng) {
  if (n < 1) throw DomainError("sample_u_marginal: n must be positive");
  if (family.capabilities().has_T_sampler) {
    const double g = rng.gamma(n);
    const double t = family.sample_total_mass(rng);
    return {g / t, "gamma-over-T"};
  }
  return {u_marginal_grid(family, n).sample(rng), "grid"};
}

inline constexpr int kSliceBurnIn = 50;

/// A draw from the posterior of U_n given the cell sizes.
inline double sample_u_given_partition(const NrmFamily& family, std::span<const int> sizes,
                                       RandomStream& rng,
                                       USamplerMethod method = USamplerMethod::Grid) {
  std::vector<int> sz(sizes.begin(), sizes.end());
  detail::checked_total(sz);
  if (method == USamplerMethod::Grid) return u_posterior_grid(family, sz).sample(rng);
  std::function<double(double)> log_g = [&](double x) {
    return log_u_density_given_partition(family, sz, std::exp(x)) + x;
  };
  double x = detail::find_mode(log_g);
  for (int i = 0; i < kSliceBurnIn; ++i) x = slice_step(log_g, x, rng);
  return std::exp(x);
}

/// One slice update of u given the cell sizes, starting from the current u;
/// used inside Markov chains where a full burn-in per call is unnecessary.
inline double slice_update_u(const NrmFamily& family, std::span<const int> sizes, double u,
                             RandomStream& rng, double q = 0.0) {
  std::vector<int> sz(sizes.begin(), sizes.end());
  std::function<double(double)> log_g = [&](double x) {
    return log_u_density_given_partition(family, sz, std::exp(x), q) + x;
  };
  return std::exp(slice_step(log_g, std::log(u), rng));
}

}  // namespace nrm
