#pragma once

// Independent reference values and goodness-of-fit helpers for the tests.
// Nothing here calls into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

inline double rising(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x + i;
  return r;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Chinese restaurant (Ewens) EPPF: theta^k prod (e_j - 1)! / (theta)_n.
inline double crp_eppf(double theta, const std::vector<int>& sizes) {
  int n = 0;
  double num = std::pow(theta, static_cast<double>(sizes.size()));
  for (int e : sizes) {
    n += e;
    num *= factorial(e - 1);
  }
  return num / rising(theta, n);
}

/// Two-parameter Poisson-Dirichlet EPPF with discount alpha and strength q.
inline double py_eppf(double alpha, double q, const std::vector<int>& sizes) {
  const int k = static_cast<int>(sizes.size());
  int n = 0;
  double v = 1.0;
  for (int i = 1; i < k; ++i) v *= q + i * alpha;
  for (int e : sizes) {
    n += e;
    v *= rising(1.0 - alpha, e - 1);
  }
  return v / rising(q + 1.0, n - 1);
}

/// Ewens sampling formula for occupancy counts m (m[j-1] = m_j).
inline double ewens(double theta, const std::vector<int>& m) {
  int n = 0;
  for (std::size_t j = 0; j < m.size(); ++j) n += static_cast<int>(j + 1) * m[j];
  double v = factorial(n) / rising(theta, n);
  for (std::size_t j = 0; j < m.size(); ++j) {
    v *= std::pow(theta / (j + 1.0), m[j]) / factorial(m[j]);
  }
  return v;
}

/// Unsigned Stirling numbers of the first kind c(n, k).
inline std::vector<std::vector<double>> stirling1(int n_max) {
  std::vector<std::vector<double>> c(n_max + 1, std::vector<double>(n_max + 1, 0.0));
  c[0][0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (n - 1) * c[n - 1][k];
  }
  return c;
}

/// Block-count law of the Chinese restaurant process.
inline std::vector<double> crp_block_counts(double theta, int n) {
  const auto c = stirling1(n);
  std::vector<double> p(n);
  for (int k = 1; k <= n; ++k) p[k - 1] = c[n][k] * std::pow(theta, k) / rising(theta, n);
  return p;
}

/// Bell numbers by B_{n+1} = sum_i C(n, i) B_i.
inline std::vector<double> bell_numbers(int n_max) {
  std::vector<double> b(n_max + 1, 0.0);
  b[0] = 1.0;
  for (int n = 0; n < n_max; ++n) {
    double s = 0.0;
    double binom = 1.0;
    for (int i = 0; i <= n; ++i) {
      s += binom * b[i];
      binom = binom * (n - i) / (i + 1);
    }
    b[n + 1] = s;
  }
  return b;
}

/// Brute-force set partitions as label vectors (recursive, unoptimized).
inline void all_set_partitions(int n, std::vector<std::vector<int>>& out) {
  std::vector<int> labels(n, 0);
  std::function<void(int, int)> rec = [&](int i, int k) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (int c = 0; c <= k; ++c) {
      labels[i] = c;
      rec(i + 1, std::max(k, c + 1));
    }
  };
  if (n == 0) return;
  labels[0] = 0;
  rec(1, 1);
}

inline std::vector<int> sizes_of(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  std::vector<int> s(k, 0);
  for (int l : labels) ++s[l];
  return s;
}

/// Composite Gauss-Legendre quadrature with 10 nodes per panel on [a, b].
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int panels = 100) {
  static const double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                              0.8650633666889845, 0.9739065285171717};
  static const double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                              0.1494513491505806, 0.0666713443086881};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * h, r = 0.5 * h;
    for (int i = 0; i < 5; ++i) s += w[i] * r * (f(c - r * x[i]) + f(c + r * x[i]));
  }
  return s;
}

/// Tanh-sinh quadrature on (a, b).  f receives the distances x - a and
/// b - x, both accurate near the endpoints, so singular factors such as
/// (b - x)^{-0.8} can be evaluated without cancellation.
inline double tanh_sinh_ends(const std::function<double(double, double)>& f, double a, double b,
                             double h = 1.0 / 128.0, double t_max = 5.0) {
  const double pi2 = 0.5 * M_PI;
  const double r = 0.5 * (b - a);
  double s = 0.0;
  const int steps = static_cast<int>(std::round(t_max / h));
  for (int i = -steps; i <= steps; ++i) {
    const double t = i * h;
    const double sh = pi2 * std::sinh(t);
    const double ch = std::cosh(sh);
    const double w = pi2 * std::cosh(t) / (ch * ch);
    const double d = r / (std::exp(std::abs(sh)) * ch);
    if (!(d > 0)) continue;
    const double lo = t < 0 ? d : 2 * r - d;
    const double hi = t < 0 ? 2 * r - d : d;
    s += w * f(lo, hi);
  }
  return s * h * r;
}

/// Tanh-sinh quadrature of f(x) on (a, b).
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double h = 1.0 / 128.0, double t_max = 5.0) {
  return tanh_sinh_ends(
      [&](double lo, double hi) {
        const double x = lo < hi ? a + lo : b - hi;
        return (x > a && x < b) ? f(x) : 0.0;
      },
      a, b, h, t_max);
}

/// theta Gamma(l) int (v + u)^{-l} U(dv) for the power-law Thorin measure
/// U(dv) = alpha / (Gamma(alpha) Gamma(1 - alpha)) (v - b)^{alpha - 1} dv on
/// (b, inf).  With c = u + b and t = w / (w + c) the integral becomes
/// c^{alpha - l} int_0^1 t^{alpha - 1} (1 - t)^{l - alpha - 1} dt.
inline double power_thorin_kappa(double alpha, double theta, double b, int l, double u) {
  const double c = u + b;
  const double beta_int = tanh_sinh_ends(
      [&](double t, double one_minus_t) {
        return std::exp((alpha - 1) * std::log(t) + (l - alpha - 1) * std::log(one_minus_t));
      },
      0.0, 1.0);
  const double a = alpha / (std::tgamma(alpha) * std::tgamma(1.0 - alpha));
  return theta * factorial(l - 1) * a * std::pow(c, alpha - l) * beta_int;
}

/// Integral over (0, inf) through u = e^x with a fixed wide trapezoid grid.
inline double halfline(const std::function<double(double)>& f, double x_lo = -40.0,
                       double x_hi = 40.0, int points = 200000) {
  const double h = (x_hi - x_lo) / points;
  double s = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double x = x_lo + i * h;
    const double u = std::exp(x);
    const double wgt = (i == 0 || i == points) ? 0.5 : 1.0;
    s += wgt * f(u) * u;
  }
  return s * h;
}

/// Asymptotic Kolmogorov p-value for statistic D on effective size n.
inline double kolmogorov_pvalue(double d, double n) {
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// One-sample KS test p-value against a continuous CDF.
inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return kolmogorov_pvalue(d, n);
}

inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Two-sample KS test p-value.
inline double ks2_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return kolmogorov_pvalue(d, na * nb / (na + nb));
}

/// Pearson chi-square p-value of observed counts against probabilities.
/// Cells with expected count below 5 are pooled.
inline double chi_square_pvalue(const std::vector<double>& observed,
                                const std::vector<double>& probs) {
  double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<double> o, e;
  double pool_o = 0.0, pool_e = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double ex = probs[i] * total;
    if (ex < 5.0) {
      pool_o += observed[i];
      pool_e += ex;
    } else {
      o.push_back(observed[i]);
      e.push_back(ex);
    }
  }
  if (pool_e > 0) {
    o.push_back(pool_o);
    e.push_back(pool_e);
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (e[i] > 0) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  }
  const int df = static_cast<int>(o.size()) - 1;
  if (df < 1) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

inline double beta_cdf(double a, double b, double x) {
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  return boost::math::ibeta(a, b, x);
}

inline double gamma_cdf(double shape, double x) {
  return x <= 0 ? 0.0 : boost::math::gamma_p(shape, x);
}

inline double gamma_density(double shape, double rate, double x) {
  if (x <= 0) return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  std::lgamma(shape));
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Standard error of the mean for iid values.
inline double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1.0) / v.size());
}

/// Batch-means standard error for a correlated series.
inline double batch_means_se(const std::vector<double>& v, int batches = 50) {
  const std::size_t len = v.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += v[i];
    means.push_back(s / len);
  }
  return std_error(means);
}

}  // namespace oracle
