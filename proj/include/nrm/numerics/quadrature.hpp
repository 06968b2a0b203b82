#pragma once

// Adaptive Gauss-Kronrod quadrature on finite intervals and on (0, inf).
//
// Half-line integrals are taken after the substitution u = e^x, with the
// integrand supplied as a log-density.  The integrand is shifted by its
// maximum before exponentiation so that values spanning hundreds of orders
// of magnitude integrate without overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nrm/errors.hpp"
#include "nrm/numerics/log_space.hpp"

namespace nrm {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

struct IntegrationResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
  bool converged = false;
  // log(value); carries the result when value itself under- or overflows.
  double log_value = kNegInf;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478250, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_21(F& f, double a, double b, long& evaluations) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[10];
  double gauss = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kKronrodWeights[i] * (f1 + f2);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  evaluations += 21;
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    throw IntegrationError("non-finite integrand on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]",
                           kronrod, kronrod);
  }
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

// Globally adaptive bisection driven by the largest panel error.
template <class F>
IntegrationResult adaptive_gk(F& f, double a, double b, int initial_panels,
                              double rel_tol, double abs_tol, int max_subdivisions) {
  IntegrationResult out;
  std::priority_queue<Panel> heap;
  const double width = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == initial_panels) ? b : lo + width;
    heap.push(gauss_kronrod_21(f, lo, hi, out.evaluations));
  }
  auto exact_totals = [&heap]() {
    auto copy = heap;
    double v = 0.0, e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair{v, e};
  };
  auto [value, error] = exact_totals();
  int subdivisions = 0;
  for (;;) {
    double tol = std::max(abs_tol, rel_tol * std::abs(value));
    if (error <= tol || error <= 50.0 * 2.2e-16 * std::abs(value)) {
      // Running sums drift; confirm against a fresh summation.
      std::tie(value, error) = exact_totals();
      tol = std::max(abs_tol, rel_tol * std::abs(value));
      if (error <= tol || error <= 50.0 * 2.2e-16 * std::abs(value)) {
        out.converged = true;
        break;
      }
    }
    if (subdivisions >= max_subdivisions) break;
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    heap.pop();
    const Panel left = gauss_kronrod_21(f, worst.a, mid, out.evaluations);
    const Panel right = gauss_kronrod_21(f, mid, worst.b, out.evaluations);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  out.value = value;
  out.abs_error_estimate = error;
  out.log_value = value > 0 ? std::log(value) : kNegInf;
  return out;
}

}  // namespace detail

/// Integral of f over the finite interval [a, b].
template <class F>
IntegrationResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {},
                            int initial_panels = 4) {
  if (!(b > a)) {
    if (a == b) return {0.0, 0.0, 0, true, kNegInf};
    throw DomainError("integrate: expected a < b");
  }
  auto fn = [&f](double x) { return static_cast<double>(f(x)); };
  auto res = detail::adaptive_gk(fn, a, b, initial_panels, cfg.rel_tol, cfg.abs_tol,
                                 cfg.max_subdivisions);
  if (!res.converged) {
    throw IntegrationError("integrate: no convergence on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]",
                           res.value, res.abs_error_estimate);
  }
  return res;
}

/// Integral over the real line of exp(log_g(x)), where exp(log_g) is
/// unimodal-ish and decays in both directions.  The integration window is
/// the region where log_g lies within 50 log-units of its maximum.
template <class LogG>
IntegrationResult integrate_line_log(LogG&& log_g, const QuadratureConfig& cfg = {},
                                     double scan_lo = -40.0, double scan_hi = 40.0) {
  constexpr double kStep = 0.5;
  constexpr double kDrop = 50.0;
  constexpr double kLimit = 700.0;
  long evaluations = 0;
  auto eval = [&](double x) {
    ++evaluations;
    const double v = log_g(x);
    if (std::isnan(v)) {
      throw IntegrationError("log-integrand is NaN at x=" + std::to_string(x), 0.0, 0.0);
    }
    return v;
  };

  const int steps = static_cast<int>(std::ceil((scan_hi - scan_lo) / kStep));
  std::vector<double> xs(steps + 1), gs(steps + 1);
  int best = -1;
  for (int i = 0; i <= steps; ++i) {
    xs[i] = scan_lo + i * kStep;
    gs[i] = eval(xs[i]);
    if (gs[i] > kNegInf && (best < 0 || gs[i] > gs[best])) best = i;
  }
  if (best < 0) {
    throw IntegrationError("log-integrand is -inf on the whole scan range", 0.0, 0.0);
  }
  double peak = gs[best];
  if (peak == std::numeric_limits<double>::infinity()) {
    throw IntegrationError("log-integrand is +inf", peak, peak);
  }

  // Walk outward from the peak until the integrand has dropped by kDrop.
  auto find_edge = [&](int direction) {
    int i = best;
    while (i + direction >= 0 && i + direction <= steps) {
      i += direction;
      if (gs[i] > peak) peak = gs[i];
      if (gs[i] < peak - kDrop) return xs[i];
    }
    double x = xs[i];
    double step = kStep;
    for (;;) {
      x += direction * step;
      if (std::abs(x) > kLimit) {
        throw IntegrationError("integrand does not decay within |x| <= 700", 0.0, 0.0);
      }
      const double g = eval(x);
      if (g > peak) peak = g;
      if (g < peak - kDrop) return x;
      step = std::min(step * 1.5, 8.0);
    }
  };
  const double lo = find_edge(-1);
  const double hi = find_edge(+1);

  const double shift = peak;
  auto shifted = [&](double x) {
    const double g = log_g(x);
    if (std::isnan(g)) {
      throw IntegrationError("log-integrand is NaN at x=" + std::to_string(x), 0.0, 0.0);
    }
    return g == kNegInf ? 0.0 : std::exp(g - shift);
  };
  const int panels = std::clamp(static_cast<int>(std::ceil((hi - lo) / 2.0)), 8, 256);
  // abs_tol is stated on the unshifted scale.
  const double abs_tol_shifted =
      cfg.abs_tol > 0 ? cfg.abs_tol * std::exp(std::min(700.0, -shift)) : 0.0;
  auto res = detail::adaptive_gk(shifted, lo, hi, panels, cfg.rel_tol, abs_tol_shifted,
                                 cfg.max_subdivisions);
  res.evaluations += evaluations;
  if (!res.converged) {
    throw IntegrationError("integrate_line_log: no convergence", res.value,
                           res.abs_error_estimate);
  }
  if (!(res.value > 0)) {
    res.log_value = kNegInf;
    res.value = 0.0;
    return res;
  }
  res.log_value = shift + std::log(res.value);
  res.abs_error_estimate *= std::exp(std::min(700.0, shift));
  res.value = std::exp(std::min(709.0, res.log_value));
  return res;
}

/// Integral over (0, inf) of exp(log_f(u)), evaluated after u = e^x.
template <class LogF>
IntegrationResult integrate_halfline(LogF&& log_f, const QuadratureConfig& cfg = {}) {
  return integrate_line_log(
      [&log_f](double x) {
        const double u = std::exp(x);
        if (!(u > 0) || !std::isfinite(u)) return kNegInf;
        return static_cast<double>(log_f(u)) + x;
      },
      cfg);
}

}  // namespace nrm
