#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "nrm/models/config.hpp"
#include "nrm/models/families.hpp"
#include "nrm/random.hpp"
#include "oracles.hpp"

using namespace nrm;

namespace {

struct Named {
  std::string label;
  FamilyPtr family;
};

std::vector<Named> all_families() {
  return {
      {"dirichlet", std::make_shared<Dirichlet>(1.5)},
      {"stable0.3", std::make_shared<Stable>(0.3, 1.0)},
      {"stable0.5", std::make_shared<Stable>(0.5, 2.0)},
      {"stable0.8", std::make_shared<Stable>(0.8, 1.0)},
      {"gengamma", std::make_shared<GenGamma>(0.5, 1.0, 1.0)},
      {"beta", std::make_shared<BetaNrm>(2.0, 1.5)},
      {"first-passage", std::make_shared<Ggc>(1.0, first_passage_thorin(0.7), "first-passage")},
      {"ggc-atoms", std::make_shared<Ggc>(2.0, ThorinMeasure::atoms({{0.5, 0.3}, {2.0, 1.1}}))},
      {"gig-0.5", std::make_shared<Gig>(-0.5, 1.0, 1.0)},
      {"gig0.7", std::make_shared<Gig>(0.7, 1.3, 0.8)},
  };
}

std::vector<double> u_grid(int points = 50) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(std::pow(10.0, -2.0 + 4.0 * i / (points - 1)));
  return g;
}

}  // namespace

TEST(Families, KappaExamples) {
  EXPECT_DOUBLE_EQ(Dirichlet(2.0).kappa(1, 0.0), 2.0);
  EXPECT_NEAR(Dirichlet(1.0).kappa(3, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(Stable(0.5, 1.0).kappa(1, 4.0), 0.25, 1e-15);
  const double quad = oracle::halfline([](double s) { return s * s * std::exp(-2.0 * s); });
  EXPECT_NEAR(Dirichlet(1.0).kappa(3, 1.0) / quad, 1.0, 1e-10);
  EXPECT_NEAR(Stable(0.5, 1.0).kappa(1, 4.0) / oracle::power_thorin_kappa(0.5, 1.0, 0.0, 1, 4.0),
              1.0, 1e-10);
}

TEST(Families, PsiExamples) {
  EXPECT_EQ(Dirichlet(3.0).psi(0.0), 0.0);
  EXPECT_NEAR(Dirichlet(2.0).psi(std::numbers::e - 1.0), 2.0, 1e-15);
  const double quad = oracle::halfline(
      [](double s) { return -std::expm1(-(std::numbers::e - 1.0) * s) * 2.0 / s * std::exp(-s); },
      -40.0, 5.0, 200000);
  EXPECT_NEAR(quad, 2.0, 1e-9);
  const Ggc unit(1.0, ThorinMeasure::atoms({{1.0, 1.0}}));
  EXPECT_NEAR(unit.psi(1.0), std::numbers::ln2, 1e-15);
}

TEST(Families, StableAtZeroIsDomainError) {
  EXPECT_THROW(Stable(0.5, 1.0).kappa(1, 0.0), DomainError);
  EXPECT_THROW(GenGamma(0.5, 0.0, 1.0).kappa(2, 0.0), DomainError);
  EXPECT_NO_THROW(GenGamma(0.5, 1.0, 1.0).kappa(2, 0.0));
  EXPECT_EQ(Stable(0.5, 1.0).psi(0.0), 0.0);
}

TEST(Families, ParameterValidation) {
  EXPECT_THROW(Dirichlet(0.0), DomainError);
  EXPECT_THROW(Stable(1.0, 1.0), DomainError);
  EXPECT_THROW(Stable(0.5, -1.0), DomainError);
  EXPECT_THROW(GenGamma(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(GenGamma(0.5, -1.0, 1.0), DomainError);
  EXPECT_THROW(BetaNrm(0.0, 1.0), DomainError);
  EXPECT_THROW(Gig(1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(Gig(0.5, 1.0, 0.0), DomainError);
  EXPECT_NO_THROW(Gig(-0.5, 1.0, 0.0));
  EXPECT_THROW(Dirichlet(1.0).kappa(0, 1.0), DomainError);
  EXPECT_THROW(Dirichlet(1.0).kappa(1, -1.0), DomainError);
}

TEST(Families, KappaOverflowIsRangeError) {
  // kappa_l(u) of the stable family grows like u^{alpha - l} as u -> 0.
  const Stable s(0.5, 1.0);
  EXPECT_TRUE(std::isfinite(s.log_kappa(60, 1e-20)));
  EXPECT_THROW(s.kappa(60, 1e-20), RangeError);
}

TEST(FamilyInvariants, KappaPositiveAndDecreasing) {
  for (const auto& [label, f] : all_families()) {
    const auto grid = u_grid();
    for (int l = 1; l <= 6; ++l) {
      double prev = INFINITY;
      for (double u : grid) {
        const double k = f->log_kappa(l, u);
        EXPECT_TRUE(std::isfinite(k)) << label;
        EXPECT_LT(k, prev) << label << " l=" << l << " u=" << u;
        prev = k;
      }
    }
  }
}

TEST(FamilyInvariants, PsiIncreasingConcaveWithDerivativeKappa1) {
  for (const auto& [label, f] : all_families()) {
    EXPECT_EQ(f->psi(0.0), 0.0) << label;
    const auto grid = u_grid();
    double prev = 0.0;
    for (double u : grid) {
      const double p = f->psi(u);
      EXPECT_GT(p, prev) << label;
      prev = p;
      const double h = 1e-3 * u;
      const double lo = f->psi(u - h), hi = f->psi(u + h);
      const double deriv = (hi - lo) / (2 * h);
      EXPECT_NEAR(deriv / f->kappa(1, u), 1.0, 1e-5) << label << " u=" << u;
      EXPECT_LE(hi + lo - 2 * p, 1e-12 * p) << label << " concavity at u=" << u;
    }
  }
}

TEST(FamilyInvariants, CompleteMonotonicitySpotCheck) {
  for (const auto& [label, f] : all_families()) {
    const auto grid = u_grid(20);
    for (double u : grid) {
      const double h = 0.05 * u;
      double k[4];
      for (int i = 0; i < 4; ++i) k[i] = f->kappa(1, u + i * h);
      const double d1 = k[1] - k[0];
      const double d2 = k[2] - 2 * k[1] + k[0];
      const double d3 = k[3] - 3 * k[2] + 3 * k[1] - k[0];
      const double tol = 1e-12 * k[0];
      EXPECT_LE(d1, tol) << label;
      EXPECT_GE(d2, -tol) << label;
      EXPECT_LE(d3, tol) << label;
    }
  }
}

TEST(FamilyInvariants, ClosedFormKappaMatchesQuadrature) {
  const auto grid = u_grid();
  for (int l = 1; l <= 6; ++l) {
    for (double u : grid) {
      // Dirichlet: int s^l theta s^{-1} e^{-s(1+u)} ds.
      const double dq = oracle::halfline(
          [&](double s) { return 1.5 * std::exp((l - 1) * std::log(s) - s * (1 + u)); }, -40.0,
          std::log(800.0 / (1 + u)), 100000);
      EXPECT_NEAR(Dirichlet(1.5).kappa(l, u) / dq, 1.0, 1e-8);
      for (double alpha : {0.3, 0.5, 0.8}) {
        EXPECT_NEAR(Stable(alpha, 1.0).kappa(l, u) /
                        oracle::power_thorin_kappa(alpha, 1.0, 0.0, l, u),
                    1.0, 1e-8);
      }
      EXPECT_NEAR(GenGamma(0.5, 1.0, 1.0).kappa(l, u) /
                      oracle::power_thorin_kappa(0.5, 1.0, 1.0, l, u),
                  1.0, 1e-8);
      // Beta: mass int_0^1 s^{l-1} c (1-s)^{c-1} e^{-us} ds.
      const double bq = oracle::tanh_sinh(
          [&](double s) { return 1.5 * 2.0 * std::pow(s, l - 1) * (1 - s) * std::exp(-u * s); },
          0.0, 1.0);
      EXPECT_NEAR(BetaNrm(2.0, 1.5).kappa(l, u) / bq, 1.0, 1e-8) << "beta l=" << l << " u=" << u;
      // First passage: theta Gamma(l) int (v+u)^{-l} arcsine(dv).
      const double b = 2.0 * std::sqrt(0.7 * 0.3);
      const double fq = oracle::factorial(l - 1) *
                        oracle::tanh_sinh_ends(
                            [&](double lo, double hi) {
                              const double v = lo < hi ? 1 - b + lo : 1 + b - hi;
                              return std::pow(v + u, -l) /
                                     (std::numbers::pi * std::sqrt(lo * hi));
                            },
                            1 - b, 1 + b);
      EXPECT_NEAR(Ggc(1.0, first_passage_thorin(0.7)).kappa(l, u) / fq, 1.0, 1e-8);
    }
  }
}

TEST(FamilyInvariants, DirichletAsGgc) {
  const Dirichlet d(2.5);
  const Ggc g(2.5, ThorinMeasure::atoms({{1.0, 1.0}}));
  for (double u : u_grid(10)) {
    EXPECT_NEAR(g.psi(u) / d.psi(u), 1.0, 1e-12);
    for (int l = 1; l <= 8; ++l) EXPECT_NEAR(g.log_kappa(l, u), d.log_kappa(l, u), 1e-12);
  }
}

TEST(FamilyInvariants, PsiMatchesLevyIntegral) {
  // beta-NRM: mass int_0^1 (1 - e^{-us}) c s^{-1} (1 - s)^{c-1} ds
  const BetaNrm beta(3.0, 0.7);
  for (double u : {0.05, 1.0, 20.0, 90.0}) {
    const double q = oracle::tanh_sinh(
        [&](double s) { return 0.7 * 3.0 * -std::expm1(-u * s) / s * (1 - s) * (1 - s); }, 0.0,
        1.0);
    EXPECT_NEAR(beta.psi(u) / q, 1.0, 1e-10);
  }
  // Inverse Gaussian: psi(u) = delta (sqrt(2u + v^2) - v).
  const Gig ig(-0.5, 1.2, 0.9);
  for (double u : {0.01, 1.0, 50.0}) {
    EXPECT_NEAR(ig.psi(u) / (1.2 * (std::sqrt(2 * u + 0.81) - 0.9)), 1.0, 1e-12);
  }
  // v = 0: the stable-1/2 law, psi(u) = delta sqrt(2u).
  const Gig st(-0.5, 1.2, 0.0);
  EXPECT_NEAR(st.psi(2.0) / (1.2 * 2.0), 1.0, 1e-12);
  EXPECT_FALSE(st.finite_at_zero());
  // Generalized gamma closed form.
  const GenGamma gg(0.4, 2.0, 1.5);
  EXPECT_NEAR(gg.psi(3.0), 1.5 * (std::pow(5.0, 0.4) - std::pow(2.0, 0.4)), 1e-14);
  EXPECT_NEAR(gg.psi(1e-9) / (1e-9 * gg.kappa(1, 0.0)), 1.0, 1e-8);
}

TEST(Gig, MomentExamples) {
  EXPECT_EQ(gig_moment(0.3, 1.0, 2.0, 0, 1.7), 1.0);
  for (double u : {0.0, 0.4, 3.0}) {
    const double w = std::sqrt(2 * u + 1.0);
    EXPECT_NEAR(gig_moment(-0.5, 2.0, 1.0, 1, u), 2.0 / w, 1e-14);
  }
  EXPECT_NEAR(gig_moment(-0.5, 1.0, 1.0, 1, 0.0), 1.0, 1e-15);
  EXPECT_THROW(gig_moment(-0.5, 0.0, 1.0, 1, 0.0), DomainError);
}

TEST(Samplers, DirichletMean) {
  RandomStream rng(1);
  const Dirichlet d(1.0);
  std::vector<double> t(100000);
  for (double& x : t) x = d.sample_total_mass(rng);
  EXPECT_NEAR(oracle::mean(t), 1.0, 0.02);
}

TEST(Samplers, UnitAtomGgcIsGamma) {
  RandomStream rng(2);
  const Ggc g(1.0, ThorinMeasure::atoms({{1.0, 1.0}}));
  std::vector<double> t(10000);
  for (double& x : t) x = g.sample_total_mass(rng);
  EXPECT_GT(oracle::ks_pvalue(t, [](double x) { return oracle::gamma_cdf(1.0, x); }), 0.01);
}

// (1/N) sum e^{-u T_i} against e^{-psi(u)}, within three standard errors.
void expect_laplace(const NrmFamily& f, std::uint64_t seed, int draws = 200000) {
  RandomStream rng(seed);
  for (double u : {0.3, 1.0, 4.0}) {
    std::vector<double> e(draws);
    RandomStream local(seed + static_cast<std::uint64_t>(u * 100));
    for (double& x : e) x = std::exp(-u * f.sample_total_mass(local));
    EXPECT_NEAR(oracle::mean(e), std::exp(-f.psi(u)), 3 * oracle::std_error(e))
        << f.describe() << " u=" << u;
  }
}

TEST(Samplers, LaplaceTransforms) {
  expect_laplace(Stable(0.5, 1.0), 3);
  expect_laplace(Stable(0.3, 0.7), 4);
  expect_laplace(GenGamma(0.5, 1.0, 1.0), 5);
  expect_laplace(GenGamma(0.7, 0.2, 2.0), 6);
  expect_laplace(Ggc(1.0, first_passage_thorin(0.7)), 7, 50000);
  expect_laplace(Ggc(0.8, ThorinMeasure::atoms({{0.5, 0.3}, {2.0, 1.1}})), 8, 50000);
  expect_laplace(Gig(-0.5, 1.0, 1.0), 9);
  expect_laplace(Gig(0.7, 1.3, 0.8), 10);
  expect_laplace(Gig(2.5, 0.4, 3.0), 11);
  expect_laplace(Gig(-1.5, 1.0, 0.0), 12);
  expect_laplace(Dirichlet(0.4), 13);
}

TEST(Samplers, GigMeanMatchesBesselRatio) {
  RandomStream rng(14);
  for (double lambda : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    const Gig g(lambda, 1.3, 0.8);
    std::vector<double> t(100000);
    for (double& x : t) x = g.sample_total_mass(rng);
    EXPECT_NEAR(oracle::mean(t), gig_moment(lambda, 1.3, 0.8, 1, 0.0), 3 * oracle::std_error(t));
  }
}

TEST(Samplers, BetaHasNoTotalMassSampler) {
  RandomStream rng(1);
  EXPECT_FALSE(BetaNrm(1.0, 1.0).capabilities().has_T_sampler);
  EXPECT_THROW(BetaNrm(1.0, 1.0).sample_total_mass(rng), CapabilityError);
  const Ggc dens(1.0, ThorinMeasure::density([](double v) { return -v; }, 0.0, INFINITY));
  EXPECT_THROW(dens.sample_total_mass(rng), CapabilityError);
}

TEST(Moments, StableMomentsMatchMonteCarlo) {
  const Stable s(0.5, 1.0);
  const auto mt = s.moment_table(3, 1.0);
  RandomStream rng(15);
  const int draws = 1000000;
  std::vector<std::vector<double>> v(3, std::vector<double>(draws));
  for (int i = 0; i < draws; ++i) {
    const double t = s.sample_total_mass(rng);
    const double w = std::exp(-t + s.psi(1.0));
    for (int n = 1; n <= 3; ++n) v[n - 1][i] = std::pow(t, n) * w;
  }
  for (int n = 1; n <= 3; ++n) {
    EXPECT_NEAR(oracle::mean(v[n - 1]), mt.moment(n), 3 * oracle::std_error(v[n - 1])) << n;
  }
}

TEST(Thorin, Tilt) {
  const auto base = stable_thorin(0.4);
  const auto t = base.tilt(1.5);
  EXPECT_EQ(t.support_lo(), 1.5);
  // density proportional to (v - b)^{alpha - 1}: compare int e^{-v} U(dv).
  const double got = std::exp(t.integrate_log([](double v) { return -v; }));
  const double a = 0.4 / (std::tgamma(0.4) * std::tgamma(0.6));
  EXPECT_NEAR(got / (a * std::tgamma(0.4) * std::exp(-1.5)), 1.0, 1e-9);
  EXPECT_THROW(base.tilt(0.0), DomainError);
  EXPECT_EQ(base.tilt(0.5).tilt(1.0).support_lo(), base.tilt(1.5).support_lo());
  const auto atoms = ThorinMeasure::atoms({{1.0, 2.0}}).tilt(0.5);
  EXPECT_EQ(atoms.atom_list()[0].first, 1.5);
  // psi_b(u) = psi(u + b) - psi(b)
  const Ggc tilted(1.0, base.tilt(0.7));
  const Stable st(0.4, 1.0);
  for (double u : {0.1, 2.0}) {
    EXPECT_NEAR(tilted.psi(u), st.psi(u + 0.7) - st.psi(0.7), 1e-10);
  }
}

TEST(Thorin, FirstPassage) {
  const auto half = first_passage_thorin(0.5);
  EXPECT_NEAR(half.support_lo(), 0.0, 1e-15);
  EXPECT_NEAR(half.support_hi(), 2.0, 1e-15);
  const auto fp = first_passage_thorin(0.8);
  const double b = 2 * std::sqrt(0.16);
  const double mass = oracle::tanh_sinh_ends(
      [&](double lo, double hi) { return 1.0 / (std::numbers::pi * std::sqrt(lo * hi)); }, 1 - b,
      1 + b);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_NEAR(std::exp(fp.integrate_log([](double) { return 0.0; })), 1.0, 1e-12);
  const auto near_one = first_passage_thorin(0.999999);
  EXPECT_LT(near_one.support_hi() - near_one.support_lo(), 0.01);
  EXPECT_THROW(first_passage_thorin(0.4), DomainError);
  EXPECT_THROW(first_passage_thorin(1.0), DomainError);
}

TEST(Thorin, DensityIntegrabilityChecked) {
  // U(dv) = dv on (0, inf) violates int_1^inf U(dv)/v < inf.
  EXPECT_THROW(ThorinMeasure::density([](double) { return 0.0; }, 0.0, INFINITY), DomainError);
  EXPECT_THROW(ThorinMeasure::atoms({}), DomainError);
}

TEST(Config, ParsesFamilies) {
  std::istringstream in("# prior\nfamily = stable\nalpha = 0.5\ntheta = 2\n");
  const auto f = make_family(parse_settings(in));
  EXPECT_EQ(f->name(), "stable");
  EXPECT_NEAR(f->psi(4.0), 4.0, 1e-15);
  std::istringstream g("family=ggc\natoms=1:1\ntheta=2\n");
  EXPECT_NEAR(make_family(parse_settings(g))->psi(1.0), 2 * std::numbers::ln2, 1e-15);
  std::istringstream fp("family=first-passage\np=0.5\n");
  EXPECT_EQ(make_family(parse_settings(fp))->name(), "first-passage");
}

TEST(Config, Errors) {
  std::istringstream unknown("family = lognormal\n");
  EXPECT_THROW(make_family(parse_settings(unknown)), ConfigError);
  std::istringstream bad("family = dirichlet\ntheta = -1\n");
  EXPECT_THROW(make_family(parse_settings(bad)), ConfigError);
  std::istringstream missing("family = stable\n");
  EXPECT_THROW(make_family(parse_settings(missing)), ConfigError);
  std::istringstream garbage("family = dirichlet\ntheta = abc\n");
  EXPECT_THROW(make_family(parse_settings(garbage)), ConfigError);
}

TEST(Describe, UsesRoundTripPrecision) {
  EXPECT_EQ(Dirichlet(0.1).describe(), "dirichlet theta=0.10000000000000001");
}
