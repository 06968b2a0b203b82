#pragma once

// Partition samplers at a fixed u: exact draws, weighted Chinese restaurant
// proposals with importance weights, and Polya-urn Gibbs sweeps.  Also the
// draw of (U_n, p, Y) from the marginal law and the prediction rule.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "nrm/eppf.hpp"
#include "nrm/errors.hpp"
#include "nrm/models/family.hpp"
#include "nrm/partition.hpp"
#include "nrm/random.hpp"
#include "nrm/samplers/u_samplers.hpp"

namespace nrm {

struct LatentState {
  double u = 1.0;
  Partition partition;
  std::vector<double> uniques;  // empty, or one value per cell
};

struct WeightedDraw {
  Partition partition;
  double log_weight = 0.0;
};

inline constexpr int kMaxExactSamplerSize = 10;

/// Exact draws from p(. | u).  An occupancy class is drawn with probability
/// #{partitions with those sizes} * prod kappa / m_n, then a uniformly random
/// set partition with those sizes is formed by cutting a random permutation.
class ExactPartitionSampler {
 public:
  ExactPartitionSampler(const NrmFamily& family, int n, double u) : n_(n) {
    if (n < 1) throw DomainError("exact sampler: n must be positive");
    if (n > kMaxExactSamplerSize) {
      throw SizeLimitError("exact sampler: n above " + std::to_string(kMaxExactSamplerSize) +
                           "; use gibbs_sweep or wcr_sis");
    }
    const ConditionalGibbsLaw law(family, n, u);
    for (const OccupancyVector& m : enumerate_occupancies(n)) {
      std::vector<int> sizes = m.sizes();
      log_weights_.push_back(log_count_with_sizes(sizes) + law.log_eppf(sizes));
      sizes_.push_back(std::move(sizes));
    }
  }

  Partition draw(RandomStream& rng) const {
    const auto& sizes = sizes_[rng.categorical_log(log_weights_)];
    std::vector<int> items(n_);
    std::iota(items.begin(), items.end(), 0);
    rng.shuffle(items);
    std::vector<int> labels(n_);
    int pos = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      for (int r = 0; r < sizes[c]; ++r) labels[items[pos++]] = static_cast<int>(c);
    }
    return Partition::from_assignment(std::span<const int>(labels));
  }

 private:
  int n_;
  std::vector<std::vector<int>> sizes_;
  std::vector<double> log_weights_;
};

inline Partition sample_partition_exact(const NrmFamily& family, int n, double u,
                                        RandomStream& rng) {
  return ExactPartitionSampler(family, n, u).draw(rng);
}

/// Weighted Chinese restaurant proposal.  Item r + 1 opens a cell with weight
/// kappa_1(u) or joins cell j with weight kappa_{e_j+1}(u) / kappa_{e_j}(u);
/// the importance weight is L(p | u) = prod_r l(r) / m_n(u), with l(r) the
/// sum of the seat weights at step r.
class WcrSis {
 public:
  WcrSis(const NrmFamily& family, int n, double u)
      : n_(n), kt_(family.cumulant_table(n, u)),
        log_m_n_(family.moment_table(n, u).log_moment(n)) {
    if (n < 1) throw DomainError("wcr_sis: n must be positive");
  }

  WeightedDraw draw(RandomStream& rng) const {
    std::vector<int> labels(n_), sizes;
    std::vector<double> logw;
    double log_l = 0.0;
    for (int r = 0; r < n_; ++r) {
      logw.clear();
      for (int e : sizes) logw.push_back(kt_.log_kappa(e + 1) - kt_.log_kappa(e));
      logw.push_back(kt_.log_kappa(1));
      log_l += log_sum_exp(logw);
      const std::size_t c = rng.categorical_log(logw);
      if (c == sizes.size()) sizes.push_back(0);
      ++sizes[c];
      labels[r] = static_cast<int>(c);
    }
    return {Partition::from_assignment(std::span<const int>(labels)), log_l - log_m_n_};
  }

 private:
  int n_;
  CumulantTable kt_;
  double log_m_n_;
};

inline WeightedDraw wcr_sis(const NrmFamily& family, int n, double u, RandomStream& rng) {
  return WcrSis(family, n, u).draw(rng);
}

namespace detail {

// One systematic scan over items.  labels are cell ids into sizes; emptied
// cells are recycled.  log_seat(e) is the log weight of joining a cell that
// currently holds e other items, log_seat(0) the weight of a new cell.
// extra(i, c) adds a log-likelihood term for putting item i in cell c
// (c == -1 for a new cell).
template <class Extra, class OnNewCell>
void urn_sweep(std::vector<int>& labels, std::vector<int>& sizes,
               const std::function<double(int)>& log_seat, Extra&& extra,
               OnNewCell&& on_new_cell, RandomStream& rng) {
  const int n = static_cast<int>(labels.size());
  std::vector<double> logw;
  std::vector<int> cell_ids;
  for (int i = 0; i < n; ++i) {
    --sizes[labels[i]];
    logw.clear();
    cell_ids.clear();
    for (int c = 0; c < static_cast<int>(sizes.size()); ++c) {
      if (sizes[c] == 0) continue;
      logw.push_back(log_seat(sizes[c]) + extra(i, c));
      cell_ids.push_back(c);
    }
    logw.push_back(log_seat(0) + extra(i, -1));
    cell_ids.push_back(-1);
    int chosen = cell_ids[rng.categorical_log(logw)];
    if (chosen == -1) {
      // Reuse the emptied cell when there is one.
      auto it = std::find(sizes.begin(), sizes.end(), 0);
      chosen = static_cast<int>(it - sizes.begin());
      if (it == sizes.end()) sizes.push_back(0);
      on_new_cell(chosen);
    }
    labels[i] = chosen;
    ++sizes[chosen];
  }
}

}  // namespace detail

/// Polya-urn Gibbs sweeps at a fixed u with the kappa-ratio seat weights.
class GibbsPartitionSampler {
 public:
  GibbsPartitionSampler(const NrmFamily& family, int n, double u)
      : n_(n), kt_(family.cumulant_table(n, u)) {}

  /// One systematic scan; the result is canonically relabelled.
  Partition sweep(const Partition& p, RandomStream& rng) const {
    if (p.n() != n_) throw DomainError("gibbs_sweep: partition size mismatch");
    std::vector<int> labels = p.assignment();
    std::vector<int> sizes = p.sizes();
    sweep_labels(labels, sizes, rng);
    return Partition::from_assignment(std::span<const int>(labels));
  }

  void sweep_labels(std::vector<int>& labels, std::vector<int>& sizes, RandomStream& rng) const {
    detail::urn_sweep(labels, sizes, log_seat_fn(), [](int, int) { return 0.0; },
                      [](int) {}, rng);
  }

  std::function<double(int)> log_seat_fn() const {
    return [this](int e) {
      return e == 0 ? kt_.log_kappa(1) : kt_.log_kappa(e + 1) - kt_.log_kappa(e);
    };
  }

 private:
  int n_;
  CumulantTable kt_;
};

/// One Gibbs sweep over the partition at the state's u.  When the state
/// carries unique values, cells opened during the sweep draw theirs from
/// base; the rest keep their values.  With refresh_u set, u is then updated
/// given the new partition by one slice step.
inline LatentState gibbs_sweep(const NrmFamily& family, const LatentState& state,
                               RandomStream& rng,
                               const std::function<double(RandomStream&)>& base = {},
                               bool refresh_u = false) {
  const int n = state.partition.n();
  if (n == 0) return state;
  const bool with_values = !state.uniques.empty();
  if (with_values && static_cast<int>(state.uniques.size()) != state.partition.k()) {
    throw DomainError("gibbs_sweep: uniques must match the block count");
  }
  if (with_values && !base) throw DomainError("gibbs_sweep: base sampler required for uniques");
  const GibbsPartitionSampler sampler(family, n, state.u);
  std::vector<int> labels = state.partition.assignment();
  std::vector<int> sizes = state.partition.sizes();
  std::vector<double> values = state.uniques;
  detail::urn_sweep(
      labels, sizes, sampler.log_seat_fn(), [](int, int) { return 0.0; },
      [&](int cell) {
        if (!with_values) return;
        if (cell >= static_cast<int>(values.size())) values.resize(cell + 1);
        values[cell] = base(rng);
      },
      rng);
  LatentState out;
  out.partition = Partition::from_assignment(std::span<const int>(labels));
  if (with_values) {
    // Carry each value to its cell's canonical position.
    out.uniques.assign(out.partition.k(), 0.0);
    for (int i = 0; i < n; ++i) out.uniques[out.partition.cell_of(i)] = values[labels[i]];
  }
  out.u = refresh_u ? slice_update_u(family, out.partition.sizes(), state.u, rng) : state.u;
  return out;
}

/// A Chinese restaurant draw with parameter theta.
inline Partition sample_crp(double theta, int n, RandomStream& rng) {
  if (!(theta > 0)) throw DomainError("crp: theta must be positive");
  std::vector<int> labels(n), sizes;
  for (int r = 0; r < n; ++r) {
    const double pick = rng.uniform() * (theta + r);
    double acc = 0.0;
    int chosen = static_cast<int>(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      acc += sizes[c];
      if (pick < acc) {
        chosen = static_cast<int>(c);
        break;
      }
    }
    if (chosen == static_cast<int>(sizes.size())) sizes.push_back(0);
    ++sizes[chosen];
    labels[r] = chosen;
  }
  return Partition::from_assignment(std::span<const int>(labels));
}

inline constexpr int kMarginalGibbsSweeps = 200;

/// A draw of (U_n, p, Y) from the marginal law: U_n, then p given U_n (exact
/// for n <= 10, otherwise Gibbs sweeps from the all-singletons partition),
/// then iid unique values from the base distribution.
inline LatentState sample_marginal_M(const NrmFamily& family, int n, RandomStream& rng,
                                     const std::function<double(RandomStream&)>& base) {
  if (!family.capabilities().is_homogeneous) {
    throw CapabilityError("sample_marginal_M: homogeneous families only");
  }
  LatentState s;
  s.u = sample_u_marginal(family, n, rng).u;
  if (n <= kMaxExactSamplerSize) {
    s.partition = sample_partition_exact(family, n, s.u, rng);
  } else {
    const GibbsPartitionSampler g(family, n, s.u);
    Partition p = Partition::singletons(n);
    for (int i = 0; i < kMarginalGibbsSweeps; ++i) p = g.sweep(p, rng);
    s.partition = p;
  }
  for (int j = 0; j < s.partition.k(); ++j) s.uniques.push_back(base(rng));
  return s;
}

/// Observations X_1..X_n implied by a latent state.
inline std::vector<double> observations(const LatentState& s) {
  std::vector<double> x(s.partition.n());
  for (int i = 0; i < s.partition.n(); ++i) x[i] = s.uniques.at(s.partition.cell_of(i));
  return x;
}

struct PredictiveWeights {
  double zeta0 = 1.0;          // mass on a fresh draw from H
  std::vector<double> zetas;   // mass on each existing unique value
};

/// Weights of the prediction rule given the partition:
///   zeta0 = (1/n) int u kappa_1(u) f(u | p) du,
///   zeta_j = (1/n) int u kappa_{e_j+1}(u) / kappa_{e_j}(u) f(u | p) du.
inline PredictiveWeights predictive_weights(const NrmFamily& family, std::span<const int> sizes,
                                            const QuadratureConfig& cfg = {}) {
  PredictiveWeights out;
  if (sizes.empty()) return out;
  if (!family.capabilities().is_homogeneous) {
    throw CapabilityError("predictive_weights: homogeneous families only");
  }
  const int n = detail::checked_total(sizes);
  std::vector<int> sz(sizes.begin(), sizes.end());
  const int emax = detail::max_size(sz);
  const double log_norm = integrate_u_given_partition(family, sz, cfg).log_value;
  auto expectation = [&](const std::function<double(const CumulantTable&)>& log_ratio) {
    const double log_int =
        integrate_halfline(
            [&](double u) {
              const CumulantTable kt = family.cumulant_table(emax + 1, u);
              return (n - 1.0) * std::log(u) - family.psi(u) +
                     detail::log_kappa_product(kt, sz) + std::log(u) + log_ratio(kt);
            },
            cfg)
            .log_value;
    return std::exp(log_int - log_norm) / n;
  };
  out.zeta0 = expectation([](const CumulantTable& kt) { return kt.log_kappa(1); });
  std::map<int, double> by_size;
  for (int e : sz) {
    if (!by_size.count(e)) {
      by_size[e] = expectation(
          [e](const CumulantTable& kt) { return kt.log_kappa(e + 1) - kt.log_kappa(e); });
    }
    out.zetas.push_back(by_size[e]);
  }
  return out;
}

inline PredictiveWeights predictive_weights(const NrmFamily& family, const LatentState& state,
                                            const QuadratureConfig& cfg = {}) {
  if (state.partition.n() == 0) return {};
  return predictive_weights(family, state.partition.sizes(), cfg);
}

/// A draw from the dependent Dirichlet process recipe with the gamma kernel.
struct DependentDpDraw {
  double v = 0.0;
  Partition partition;
  std::vector<double> r;  // R_j with 1 / (1 + R_j) ~ Beta(e_j, delta)
  std::vector<double> y;  // Y_j = R_j / V_n
};

inline DependentDpDraw dependent_dp_sample(double theta, double delta, int n, RandomStream& rng) {
  if (!(theta > 0)) throw DomainError("dependent dp: theta must be positive");
  if (!(delta > 0)) throw DomainError("dependent dp: delta must be positive");
  if (n < 1) throw DomainError("dependent dp: n must be positive");
  DependentDpDraw d;
  d.v = rng.beta(theta, n);
  d.partition = sample_crp(theta, n, rng);
  for (int e : d.partition.sizes()) {
    const double b = rng.beta(e, delta);
    const double r = (1.0 - b) / b;
    d.r.push_back(r);
    d.y.push_back(r / d.v);
  }
  return d;
}

}  // namespace nrm
