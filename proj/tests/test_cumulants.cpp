#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nrm/cumulants.hpp"
#include "nrm/models/families.hpp"
#include "nrm/partition.hpp"
#include "oracles.hpp"

using namespace nrm;

TEST(Binomial, ExactTable) {
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(binomial(64, 32), 1832624140942590534.0);
  EXPECT_EQ(binomial(4, 7), 0.0);
  EXPECT_NEAR(log_binomial(100, 50), std::log(1.0089134454556419e29), 1e-12);
}

TEST(Theile, Examples) {
  const auto one = moments_from_cumulants(CumulantTable::from_values(0.3, {1.7}));
  EXPECT_DOUBLE_EQ(one.moment(1), 1.7);
  EXPECT_DOUBLE_EQ(one.moment(0), 1.0);
  const auto two = moments_from_cumulants(CumulantTable::from_values(0.0, {1.0, 1.0}));
  EXPECT_NEAR(two.moment(2), 2.0, 1e-15);
  const auto back = cumulants_from_moments(MomentTable::from_values(0.0, {1.0, 2.0}));
  EXPECT_NEAR(back.kappa(2), 1.0, 1e-15);
}

TEST(Theile, GammaMomentsFromDirichletCumulants) {
  // kappa_l = Gamma(l) at u = 0 for theta = 1; moments of gamma(1) are n!.
  std::vector<double> k;
  for (int l = 1; l <= 6; ++l) k.push_back(oracle::factorial(l - 1));
  const auto m = moments_from_cumulants(CumulantTable::from_values(0.0, k));
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(m.moment(n) / oracle::factorial(n), 1.0, 1e-14);
}

TEST(Theile, MatchesBellPolynomialSum) {
  // m_n = sum_k B_{n,k}(kappa)
  const std::vector<double> k{0.4, 1.1, 0.9, 2.5, 7.0, 13.0, 40.0};
  const auto m = moments_from_cumulants(CumulantTable::from_values(1.0, k));
  BellTable b(k, 7);
  for (int n = 1; n <= 7; ++n) {
    double s = 0.0;
    for (int j = 1; j <= n; ++j) s += b(n, j);
    EXPECT_NEAR(m.moment(n) / s, 1.0, 1e-13);
  }
}

TEST(Theile, RoundTripOnRandomTables) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int N = 1 + rep % 12;
    std::vector<double> logs(N);
    for (double& v : logs) v = unif(gen);
    const CumulantTable kt(0.5, logs);
    const auto mt = moments_from_cumulants(kt);
    const auto back = cumulants_from_moments(mt);
    for (int l = 1; l <= N; ++l) {
      EXPECT_NEAR(back.kappa(l) / kt.kappa(l), 1.0, 1e-12) << "N=" << N << " l=" << l;
    }
    const auto again = moments_from_cumulants(back);
    for (int n = 1; n <= N; ++n) EXPECT_NEAR(again.moment(n) / mt.moment(n), 1.0, 1e-12);
  }
}

TEST(Theile, LogConvexMoments) {
  // kappa_l = sum_i w_i s_i^l are cumulants of a compound Poisson law with
  // jump sizes s_i, so the moments must be log-convex.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.05, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> w(4), s(4), kappa(10, 0.0);
    for (double& v : w) v = unif(gen);
    for (double& v : s) v = unif(gen);
    for (int l = 1; l <= 10; ++l) {
      for (int i = 0; i < 4; ++i) kappa[l - 1] += w[i] * std::pow(s[i], l);
    }
    const auto mt = moments_from_cumulants(CumulantTable::from_values(1.0, kappa));
    for (int n = 1; n < 10; ++n) {
      EXPECT_GE(mt.log_moment(n - 1) + mt.log_moment(n + 1), 2 * mt.log_moment(n) - 1e-12);
    }
  }
}

TEST(Theile, InconsistentMomentsRejected) {
  // m_2 < m_1^2 is impossible for a positive random variable.
  EXPECT_THROW(cumulants_from_moments(MomentTable::from_values(0.0, {2.0, 3.0})),
               NumericalError);
}

TEST(Theile, HighOrderGammaMoments) {
  // Tilted gamma(theta): m_n = Gamma(theta + n) / Gamma(theta) (1 + u)^{-n}.
  const double theta = 2.0, u = 0.7;
  const Dirichlet d(theta);
  for (int n : {65, 100, 400}) {
    const auto mt = d.moment_table(n, u);
    for (int j : {1, n / 2, n}) {
      const double ref = std::lgamma(theta + j) - std::lgamma(theta) - j * std::log1p(u);
      EXPECT_NEAR(mt.log_moment(j) - ref, 0.0, 1e-12 * std::max(1.0, std::abs(ref))) << n << " " << j;
    }
    const auto back = cumulants_from_moments(mt);
    EXPECT_NEAR(back.log_kappa(n), d.log_kappa(n, u), 1e-10 * std::abs(d.log_kappa(n, u)));
  }
  EXPECT_THROW(d.moment_table(1001, u), SizeLimitError);
}

TEST(Tables, RejectNonPositiveEntries) {
  EXPECT_THROW(CumulantTable::from_values(0.0, {1.0, 0.0}), DomainError);
  EXPECT_THROW(CumulantTable(0.0, std::vector<double>{1.0, -INFINITY}), RangeError);
  const CumulantTable big(0.0, std::vector<double>{800.0});
  EXPECT_THROW(big.kappa(1), RangeError);
  EXPECT_DOUBLE_EQ(big.log_kappa(1), 800.0);
}

TEST(MomentTable, DirichletTiltedGammaMoments) {
  const Dirichlet d(2.0);
  EXPECT_NEAR(d.moment_table(3, 1.0).moment(3), 3.0, 1e-13);
  // m_n(u) (1+u)^n does not depend on u.
  for (int n = 1; n <= 8; ++n) {
    const double ref = d.moment_table(n, 0.0).log_moment(n);
    for (double u : {0.01, 0.3, 1.0, 7.0, 100.0}) {
      const double v = d.moment_table(n, u).log_moment(n) + n * std::log1p(u);
      EXPECT_NEAR(std::exp(v - ref), 1.0, 1e-10);
    }
  }
}

TEST(MomentTable, ZerothMomentIsOne) {
  const Stable s(0.5, 1.0);
  EXPECT_EQ(s.moment_table(4, 2.0).moment(0), 1.0);
  EXPECT_EQ(moment_table(s, 4, 2.0).log_moment(0), 0.0);
}

TEST(MomentTable, GigCumulantsMatchLevyIntegral) {
  // lambda = -1/2 is the inverse Gaussian; its Levy density is
  // delta (2 pi)^{-1/2} s^{-3/2} e^{-v^2 s / 2}.
  const double delta = 1.0, v = 1.0;
  const Gig g(-0.5, delta, v);
  for (double u : {0.0, 0.2, 1.0, 5.0}) {
    const auto kt = g.cumulant_table(6, u);
    for (int l = 1; l <= 6; ++l) {
      const double ref = oracle::halfline(
          [&](double s) {
            return delta / std::sqrt(2 * std::numbers::pi) *
                   std::exp((l - 1.5) * std::log(s) - (u + 0.5 * v * v) * s);
          },
          -90.0, 6.0, 400000);
      EXPECT_NEAR(kt.kappa(l) / ref, 1.0, 1e-9) << "u=" << u << " l=" << l;
      // Closed form of the same integral.
      const double exact = delta / std::sqrt(2 * std::numbers::pi) * std::tgamma(l - 0.5) *
                           std::pow(u + 0.5 * v * v, 0.5 - l);
      EXPECT_NEAR(kt.kappa(l) / exact, 1.0, 1e-12);
    }
  }
  EXPECT_NEAR(g.moment_table(1, 0.0).moment(1), 1.0, 1e-14);
}

TEST(MomentTable, GigMomentsMatchDensityQuadrature) {
  const double lambda = 0.7, delta = 1.3, v = 0.8;
  const Gig g(lambda, delta, v);
  for (double u : {0.0, 1.5}) {
    auto integrand = [&](double t, int n) {
      return std::exp((lambda - 1 + n) * std::log(t) - 0.5 * (delta * delta / t + v * v * t) -
                      u * t);
    };
    const double z = oracle::halfline([&](double t) { return integrand(t, 0); }, -12, 8, 100000);
    const auto mt = g.moment_table(5, u);
    for (int n = 1; n <= 5; ++n) {
      const double ref =
          oracle::halfline([&](double t) { return integrand(t, n); }, -12, 8, 100000) / z;
      EXPECT_NEAR(mt.moment(n) / ref, 1.0, 1e-9);
    }
  }
}

TEST(MomentTable, GigThorinRouteMatchesBesselMoments) {
  for (const Gig& g : {Gig(-0.5, 1.0, 1.0), Gig(0.7, 1.3, 0.8), Gig(0.0, 1.0, 1.0),
                       Gig(-1.5, 1.0, 0.0), Gig(2.5, 0.4, 3.0)}) {
    for (double u : {0.05, 1.0, 10.0}) {
      std::vector<long double> logs;
      for (int n = 1; n <= 6; ++n) logs.push_back(g.log_moment(n, u));
      const auto from_bessel = cumulants_from_moments(MomentTable(u, std::move(logs)));
      const auto sweep = g.thorin_log_cumulants(6, u);
      for (int l = 1; l <= 6; ++l) {
        EXPECT_NEAR(g.log_kappa_thorin(l, u), from_bessel.log_kappa(l), 1e-9)
            << g.describe() << " u=" << u << " l=" << l;
        EXPECT_NEAR(static_cast<double>(sweep[l - 1]), g.log_kappa_thorin(l, u), 1e-11);
      }
    }
  }
}

TEST(MomentTable, GigLargeTiltStaysConsistent) {
  // The inverse-Gaussian closed form holds at every u, including where the
  // moment inversion would cancel.
  const Gig g(-0.5, 1.0, 1.0);
  for (double u : {1e3, 1e6, 1e12, 1e20}) {
    const auto kt = g.cumulant_table(6, u);
    std::vector<long double> exact(6);
    for (int l = 1; l <= 6; ++l) {
      exact[l - 1] = std::log(1.0 / std::sqrt(2 * std::numbers::pi)) + std::lgamma(l - 0.5) +
                     (0.5 - l) * std::log(u + 0.5);
      EXPECT_NEAR(kt.log_kappa(l), static_cast<double>(exact[l - 1]), 1e-10) << u << " " << l;
    }
    const auto mt = moments_from_cumulants(CumulantTable(u, std::move(exact)));
    for (int n = 1; n <= 6; ++n) {
      EXPECT_NEAR(g.moment_table(6, u).log_moment(n), mt.log_moment(n), 1e-10);
    }
  }
}
