#pragma once

// Mixture models W_i | X_i ~ f(. | X_i) with (X_i) drawn from an NRM, for
// conjugate kernel/base pairs.  Cell parameters are integrated out; the
// samplers act on (partition, u).

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nrm/eppf.hpp"
#include "nrm/errors.hpp"
#include "nrm/models/family.hpp"
#include "nrm/partition.hpp"
#include "nrm/random.hpp"
#include "nrm/samplers/partition_samplers.hpp"
#include "nrm/samplers/u_samplers.hpp"

namespace nrm {

/// Normal kernel with known sd sigma around a location with normal(m0, s0^2) base.
struct GaussianKernel {
  double sigma = 1.0;
  double m0 = 0.0;
  double s0 = 1.0;
};

/// Poisson kernel with gamma(a0, rate b0) base on the rate.
struct PoissonKernel {
  double a0 = 1.0;
  double b0 = 1.0;
};

using Kernel = std::variant<GaussianKernel, PoissonKernel>;

struct CellStats {
  int count = 0;
  double sum = 0.0;
  double sumsq = 0.0;
  double log_factorials = 0.0;  // sum log(w_i!) for count data
};

struct MixtureSpec {
  FamilyPtr family;
  Kernel kernel;
  std::vector<double> data;
};

namespace detail {

inline void validate(const MixtureSpec& spec) {
  if (!spec.family) throw DomainError("mixture: family is not set");
  if (!spec.family->capabilities().is_homogeneous) {
    throw CapabilityError("mixture: homogeneous families only");
  }
  if (auto g = std::get_if<GaussianKernel>(&spec.kernel)) {
    if (!(g->sigma > 0) || !(g->s0 > 0)) throw DomainError("mixture: sigma and s0 must be positive");
  } else {
    const auto& p = std::get<PoissonKernel>(spec.kernel);
    if (!(p.a0 > 0) || !(p.b0 > 0)) throw DomainError("mixture: a0 and b0 must be positive");
    for (double w : spec.data) {
      if (!(w >= 0) || w != std::floor(w)) {
        throw DomainError("mixture: poisson data must be non-negative integers");
      }
    }
  }
}

}  // namespace detail

inline CellStats add_observation(CellStats s, double w) {
  ++s.count;
  s.sum += w;
  s.sumsq += w * w;
  s.log_factorials += std::lgamma(w + 1.0);
  return s;
}

inline CellStats remove_observation(CellStats s, double w) {
  --s.count;
  s.sum -= w;
  s.sumsq -= w * w;
  s.log_factorials -= std::lgamma(w + 1.0);
  if (s.count == 0) s = CellStats{};
  return s;
}

/// log int prod_{i in cell} f(w_i | y) H(dy).
inline double log_cell_marginal(const Kernel& kernel, const CellStats& s) {
  if (s.count == 0) return 0.0;
  if (auto g = std::get_if<GaussianKernel>(&kernel)) {
    const double var = g->sigma * g->sigma, v0 = g->s0 * g->s0;
    const double precision = 1.0 / v0 + s.count / var;
    const double mean = (g->m0 / v0 + s.sum / var) / precision;
    return -0.5 * s.count * std::log(2.0 * std::numbers::pi * var) -
           0.5 * std::log(v0 * precision) -
           0.5 * (s.sumsq / var + g->m0 * g->m0 / v0 - precision * mean * mean);
  }
  const auto& p = std::get<PoissonKernel>(kernel);
  return p.a0 * std::log(p.b0) - std::lgamma(p.a0) + std::lgamma(p.a0 + s.sum) -
         (p.a0 + s.sum) * std::log(p.b0 + s.count) - s.log_factorials;
}

inline CellStats cell_stats(const std::vector<double>& data, std::span<const int> items) {
  CellStats s;
  for (int i : items) s = add_observation(s, data.at(i));
  return s;
}

/// int prod_{i in cell (+ extra)} f(W_i | y) H(dy).
inline double cell_marginal(const MixtureSpec& spec, std::span<const int> cell, int extra = -1) {
  CellStats s = cell_stats(spec.data, cell);
  if (extra >= 0) s = add_observation(s, spec.data.at(extra));
  return std::exp(log_cell_marginal(spec.kernel, s));
}

/// log of the density of a new observation w joining a cell with these statistics.
inline double log_cell_predictive(const Kernel& kernel, const CellStats& s, double w) {
  if (auto g = std::get_if<GaussianKernel>(&kernel)) {
    const double var = g->sigma * g->sigma, v0 = g->s0 * g->s0;
    const double precision = 1.0 / v0 + s.count / var;
    const double mean = (g->m0 / v0 + s.sum / var) / precision;
    const double pv = var + 1.0 / precision;
    return -0.5 * std::log(2.0 * std::numbers::pi * pv) - 0.5 * (w - mean) * (w - mean) / pv;
  }
  const auto& p = std::get<PoissonKernel>(kernel);
  if (!(w >= 0) || w != std::floor(w)) return kNegInf;
  const double a = p.a0 + s.sum, b = p.b0 + s.count;
  return std::lgamma(a + w) - std::lgamma(a) - std::lgamma(w + 1.0) + a * std::log(b) -
         (a + w) * std::log(b + 1.0);
}

/// Unnormalized log posterior of a partition with u integrated out:
/// log marginal EPPF + sum of log cell marginals.
inline double log_partition_posterior(const MixtureSpec& spec, const Partition& p,
                                      const QuadratureConfig& cfg = {}) {
  double out = log_marginal_eppf(*spec.family, p.sizes(), cfg);
  for (const auto& cell : p.cells()) {
    out += log_cell_marginal(spec.kernel, cell_stats(spec.data, cell));
  }
  return out;
}

struct PosteriorSample {
  LatentState state;
  double log_marginal_increment = 0.0;  // SIS: log importance weight of the particle
};

struct MixtureGibbsOptions {
  int burn_in = 0;
  int thin = 1;
  double initial_u = 1.0;
};

namespace detail {

// Collapsed urn sweep with likelihood-tilted seat weights at fixed u.
inline void mixture_sweep(const MixtureSpec& spec, double u, std::vector<int>& labels,
                          std::vector<int>& sizes, std::vector<CellStats>& stats,
                          RandomStream& rng) {
  const int n = static_cast<int>(labels.size());
  const CumulantTable kt = spec.family->cumulant_table(n, u);
  std::vector<double> logw;
  std::vector<int> ids;
  for (int i = 0; i < n; ++i) {
    const double w = spec.data[i];
    const int old = labels[i];
    --sizes[old];
    stats[old] = remove_observation(stats[old], w);
    logw.clear();
    ids.clear();
    for (int c = 0; c < static_cast<int>(sizes.size()); ++c) {
      if (sizes[c] == 0) continue;
      logw.push_back(kt.log_kappa(sizes[c] + 1) - kt.log_kappa(sizes[c]) +
                     log_cell_predictive(spec.kernel, stats[c], w));
      ids.push_back(c);
    }
    logw.push_back(kt.log_kappa(1) + log_cell_predictive(spec.kernel, CellStats{}, w));
    ids.push_back(-1);
    int chosen = ids[rng.categorical_log(logw)];
    if (chosen == -1) {
      auto it = std::find(sizes.begin(), sizes.end(), 0);
      chosen = static_cast<int>(it - sizes.begin());
      if (it == sizes.end()) {
        sizes.push_back(0);
        stats.emplace_back();
      }
    }
    labels[i] = chosen;
    ++sizes[chosen];
    stats[chosen] = add_observation(stats[chosen], w);
  }
}

}  // namespace detail

/// Gibbs sampler over (partition, u): a collapsed urn sweep at the current u,
/// then one slice update of u given the partition.
inline std::vector<PosteriorSample> mixture_gibbs(const MixtureSpec& spec, int iterations,
                                                  RandomStream& rng,
                                                  const MixtureGibbsOptions& opt = {}) {
  detail::validate(spec);
  const int n = static_cast<int>(spec.data.size());
  std::vector<PosteriorSample> out;
  if (n == 0) return out;
  if (iterations < 0 || opt.burn_in < 0 || opt.thin < 1) {
    throw DomainError("mixture_gibbs: invalid iteration settings");
  }
  std::vector<int> labels(n, 0), sizes{n};
  std::vector<CellStats> stats(1);
  for (double w : spec.data) stats[0] = add_observation(stats[0], w);
  double u = opt.initial_u;
  out.reserve(iterations / opt.thin + 1);
  for (int it = 0; it < opt.burn_in + iterations; ++it) {
    detail::mixture_sweep(spec, u, labels, sizes, stats, rng);
    const Partition p = Partition::from_assignment(std::span<const int>(labels));
    u = slice_update_u(*spec.family, p.sizes(), u, rng);
    if (it >= opt.burn_in && (it - opt.burn_in) % opt.thin == 0) {
      PosteriorSample s;
      s.state.u = u;
      s.state.partition = p;
      out.push_back(std::move(s));
    }
  }
  return out;
}

struct SisResult {
  std::vector<PosteriorSample> samples;  // log weight in log_marginal_increment
  double log_marginal_likelihood = kNegInf;
  double effective_sample_size = 0.0;
  bool degenerate = false;
  std::string warning;
};

/// Sequential importance sampling.  Each particle draws u from the marginal
/// law of U_n and seats observations in order with weights kappa-ratio times
/// the cell predictive density; its weight is prod_r l(r) / m_n(u), whose
/// mean is an unbiased estimate of the marginal likelihood.
inline SisResult mixture_sis(const MixtureSpec& spec, int particles, RandomStream& rng) {
  detail::validate(spec);
  if (particles < 1) throw DomainError("mixture_sis: need at least one particle");
  const int n = static_cast<int>(spec.data.size());
  SisResult res;
  if (n == 0) {
    res.log_marginal_likelihood = 0.0;
    res.effective_sample_size = particles;
    return res;
  }
  std::vector<double> log_w;
  log_w.reserve(particles);
  std::vector<int> labels(n), sizes;
  std::vector<CellStats> stats;
  std::vector<double> lw;
  for (int k = 0; k < particles; ++k) {
    const double u = sample_u_marginal(*spec.family, n, rng).u;
    const CumulantTable kt = spec.family->cumulant_table(n, u);
    double log_l = -spec.family->moment_table(n, u).log_moment(n);
    sizes.clear();
    stats.clear();
    for (int r = 0; r < n; ++r) {
      const double w = spec.data[r];
      lw.clear();
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        lw.push_back(kt.log_kappa(sizes[c] + 1) - kt.log_kappa(sizes[c]) +
                     log_cell_predictive(spec.kernel, stats[c], w));
      }
      lw.push_back(kt.log_kappa(1) + log_cell_predictive(spec.kernel, CellStats{}, w));
      log_l += log_sum_exp(lw);
      const std::size_t c = rng.categorical_log(lw);
      if (c == sizes.size()) {
        sizes.push_back(0);
        stats.emplace_back();
      }
      ++sizes[c];
      stats[c] = add_observation(stats[c], w);
      labels[r] = static_cast<int>(c);
    }
    PosteriorSample s;
    s.state.u = u;
    s.state.partition = Partition::from_assignment(std::span<const int>(labels));
    s.log_marginal_increment = log_l;
    res.samples.push_back(std::move(s));
    log_w.push_back(log_l);
  }
  const double lse = log_sum_exp(log_w);
  res.log_marginal_likelihood = lse - std::log(static_cast<double>(particles));
  double sq = 0.0;
  for (double l : log_w) sq += std::exp(2.0 * (l - lse));
  res.effective_sample_size = 1.0 / sq;
  if (res.effective_sample_size < 0.05 * particles) {
    res.degenerate = true;
    res.warning = "effective sample size " + std::to_string(res.effective_sample_size) +
                  " is below 5% of " + std::to_string(particles) + " particles";
  }
  return res;
}

/// One-step-ahead predictive density averaged over posterior samples:
/// zeta0 times the prior predictive plus zeta_j times each cell's predictive.
/// Prediction-rule weights are integrated over u given the partition, so the
/// unique values never have to be imputed.
class PredictiveMixture {
 public:
  PredictiveMixture(const MixtureSpec& spec, const std::vector<PosteriorSample>& samples,
                    const std::vector<double>& weights = {}, const QuadratureConfig& cfg = {})
      : kernel_(spec.kernel) {
    detail::validate(spec);
    if (samples.empty()) throw DomainError("predictive density: no samples");
    if (!weights.empty() && weights.size() != samples.size()) {
      throw DomainError("predictive density: weight count mismatch");
    }
    std::map<std::vector<int>, PredictiveWeights> cache;
    double total = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const double wt = weights.empty() ? 1.0 : weights[s];
      if (!(wt >= 0)) throw DomainError("predictive density: negative weight");
      if (wt == 0) continue;
      total += wt;
      const Partition& p = samples[s].state.partition;
      if (p.n() == 0) {
        components_.push_back({wt, CellStats{}});
        continue;
      }
      if (p.n() != static_cast<int>(spec.data.size())) {
        throw DomainError("predictive density: sample does not cover the data");
      }
      std::vector<int> key = p.sizes();
      std::sort(key.begin(), key.end());
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, predictive_weights(*spec.family, key, cfg)).first;
      }
      const PredictiveWeights& zw = it->second;
      components_.push_back({wt * zw.zeta0, CellStats{}});
      const auto cells = p.cells();
      for (const auto& cell : cells) {
        // Sorted sizes map back to cells of equal size; weights depend on size only.
        const int e = static_cast<int>(cell.size());
        const auto pos = std::find(key.begin(), key.end(), e) - key.begin();
        components_.push_back({wt * zw.zetas[pos], cell_stats(spec.data, cell)});
      }
    }
    if (!(total > 0)) throw DomainError("predictive density: zero total weight");
    for (auto& c : components_) c.weight /= total;
  }

  double operator()(double w) const {
    double out = 0.0;
    for (const auto& c : components_) {
      out += c.weight * std::exp(log_cell_predictive(kernel_, c.stats, w));
    }
    return out;
  }

 private:
  struct Component {
    double weight;
    CellStats stats;
  };
  Kernel kernel_;
  std::vector<Component> components_;
};

inline double predictive_density(const MixtureSpec& spec,
                                 const std::vector<PosteriorSample>& samples, double w_new) {
  return PredictiveMixture(spec, samples)(w_new);
}

/// Normalized importance weights of SIS particles.
inline std::vector<double> normalized_weights(const SisResult& res) {
  std::vector<double> lw;
  for (const auto& s : res.samples) lw.push_back(s.log_marginal_increment);
  const double lse = log_sum_exp(lw);
  std::vector<double> out;
  for (double l : lw) out.push_back(std::exp(l - lse));
  return out;
}

}  // namespace nrm
