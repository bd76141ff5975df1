#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "decoyqkd/bounds.hpp"
#include "decoyqkd/errors.hpp"

using namespace decoyqkd;

namespace {

ObservedRates table_rates() {
  const double sum = 0.50269 + 0.40726 + 0.09006;
  ObservedRates r;
  r.S = 1.548e-4;
  r.S_prime = 3.817e-4;
  r.S0 = 2.609e-5;
  r.p_prime = 0.50269 / sum;
  r.p = 0.40726 / sum;
  r.p0 = 0.09006 / sum;
  r.M = 4e6 * 1481.2;
  r.qber_signal = 0.04247;
  r.qber_decoy = 0.08379;
  return r;
}

SourceBounds windows(double delta) {
  return coherent_bounds(CoherentWindow::relative(0.2, delta), CoherentWindow::relative(0.6, delta));
}

}  // namespace

TEST(ErrorFree, TableRatesSinglePhotonRate) {
  const auto s1 = errorfree_s1_lower(table_rates(), poisson_distribution(0.2, 25),
                                     poisson_distribution(0.6, 25));
  EXPECT_NEAR(s1.value, 6.64529647133076e-4, 1e-12);
  EXPECT_FALSE(s1.vacuous);
}

TEST(ErrorFree, AllDarkCountsGiveZero) {
  auto r = table_rates();
  const auto d = poisson_distribution(0.2, 25);
  const auto s = poisson_distribution(0.6, 25);
  r.S = d[0] * r.S0;
  r.S_prime = s[0] * r.S0;
  const auto s1 = errorfree_s1_lower(r, d, s);
  EXPECT_NEAR(s1.raw, 0.0, 1e-15);
  EXPECT_EQ(s1.value, 0.0);
}

TEST(ErrorFree, LosslessThreeLevelSourcesAreTight) {
  // s_0 = 0, s_k = 1 for k >= 1 and no weight above two photons.
  const PhotonDistribution d({0.7, 0.25, 0.05});
  const PhotonDistribution s({0.4, 0.4, 0.2});
  ObservedRates r;
  r.S = 1.0 - d[0];
  r.S_prime = 1.0 - s[0];
  r.S0 = 0.0;
  r.p0 = r.p = r.p_prime = 1.0 / 3.0;
  r.M = 3e6;
  const auto s1 = errorfree_s1_lower(r, d, s);
  EXPECT_NEAR(s1.value, 1.0, 1e-14);
}

TEST(ErrorFree, TableFractions) {
  const auto b = errorfree_bounds(table_rates(), poisson_distribution(0.2, 25),
                                  poisson_distribution(0.6, 25));
  EXPECT_NEAR(b.delta1_signal.value, 0.573279962603232, 1e-12);
  EXPECT_NEAR(b.delta1_decoy.value, 0.702933925632957, 1e-12);
}

TEST(VacuumCounts, DegenerateIntervals) {
  ObservedRates r;
  r.p0 = r.p = r.p_prime = 1.0 / 3.0;
  r.M = 900;
  r.S0 = 1.0;  // S0 * p0 * M = 300 vacuum-source counts
  const double a0 = std::exp(-0.2);
  const double b0 = std::exp(-0.6);
  const auto v = vacuum_count_bounds(r, {a0, a0}, {b0, b0});
  EXPECT_NEAR(v.n0d.lower, a0 * 300, 1e-10);
  EXPECT_NEAR(v.n0d.upper, a0 * 300, 1e-10);
  EXPECT_NEAR(v.n0s.lower, b0 * 300, 1e-10);
}

TEST(VacuumCounts, TableOnePercentWindows) {
  const auto b = windows(0.01);
  const auto v = vacuum_count_bounds(table_rates(), {b.decoy.lower(0), b.decoy.upper(0)},
                                     {b.signal.lower(0), b.signal.upper(0)});
  EXPECT_NEAR(v.n0d.lower, 51438.4297452679, 1e-7);
  EXPECT_NEAR(v.n0d.upper, 51644.5955209126, 1e-7);
  EXPECT_NEAR(v.n0s.lower, 42389.7856745724, 1e-7);
  EXPECT_NEAR(v.n0s.upper, 42901.527412207, 1e-7);
}

TEST(VacuumCounts, NoVacuumCounts) {
  auto r = table_rates();
  r.S0 = 0.0;
  const auto v = vacuum_count_bounds(r, {0.8, 0.82}, {0.5, 0.55});
  EXPECT_EQ(v.n0d, (Interval{0.0, 0.0}));
  EXPECT_EQ(v.n0s, (Interval{0.0, 0.0}));
}

TEST(VacuumCounts, RequiresVacuumSource) {
  auto r = table_rates();
  r.p0 = 0.0;
  r.p = 1.0 - r.p_prime;
  EXPECT_THROW(vacuum_count_bounds(r, {0.8, 0.82}, {0.5, 0.55}), InvalidInput);
  EXPECT_NO_THROW(vacuum_count_bounds(r, {0.8, 0.82}, {0.5, 0.55}, {0.0, 3e-5}));
}

TEST(ErrorTolerant, TableFractionsAcrossWindows) {
  EXPECT_NEAR(delta1_bounds(table_rates(), windows(0.0).decoy, windows(0.0).signal)
                  .delta1_signal.value,
              0.573279962603232, 1e-10);
  const auto one = windows(0.01);
  EXPECT_NEAR(delta1_bounds(table_rates(), one.decoy, one.signal).delta1_signal.value, 0.55615,
              5e-6);
  const auto five = windows(0.05);
  EXPECT_NEAR(delta1_bounds(table_rates(), five.decoy, five.signal).delta1_signal.value, 0.48441,
              5e-6);
}

TEST(ErrorTolerant, FractionsShareOneD1) {
  const auto b = windows(0.03);
  const auto r = table_rates();
  const auto res = delta1_bounds(r, b.decoy, b.signal);
  EXPECT_NEAR(res.n1s_lower, r.p_prime * b.signal.lower(1) * res.D1_lower, 1e-9);
  EXPECT_NEAR(res.n1d_lower, r.p * b.decoy.lower(1) * res.D1_lower, 1e-9);
  EXPECT_NEAR(res.delta1_signal.value, res.n1s_lower / r.signal_counts(), 1e-14);
}

TEST(ErrorTolerant, MultiphotonDominatedSignalIsVacuous) {
  auto r = table_rates();
  r.S_prime = 0.05;
  r.S = 1e-4;
  const auto b = windows(0.01);
  const auto res = delta1_bounds(r, b.decoy, b.signal);
  EXPECT_TRUE(res.vacuous);
  EXPECT_TRUE(res.delta1_signal.vacuous);
  EXPECT_EQ(res.delta1_signal.value, 0.0);
  EXPECT_LT(res.delta1_signal.raw, 0.0);
}

TEST(ErrorTolerant, OrderingViolationIsAPrecondition) {
  const auto b = coherent_bounds(CoherentWindow::exact(0.6), CoherentWindow::exact(0.2));
  EXPECT_THROW(d1_lower(table_rates(), b.decoy, b.signal), PreconditionViolation);
}

// Zero-width windows reduce the error-tolerant pipeline to the error-free one.
TEST(ErrorTolerant, ReducesToErrorFreeOnRandomTuples) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu_d(0.05, 0.45), mu_s(0.5, 0.95), rate(1e-5, 1e-2),
      frac(0.05, 0.3);
  int checked = 0;
  for (int n = 0; n < 200; ++n) {
    const double mu = mu_d(rng), mup = mu_s(rng);
    ObservedRates r;
    r.S0 = rate(rng) * 0.1;
    r.S = rate(rng);
    r.S_prime = r.S * (1.5 + 3 * frac(rng));
    r.p0 = frac(rng);
    r.p = frac(rng) + 0.2;
    r.p_prime = 1.0 - r.p0 - r.p;
    r.M = 1e9;
    const auto b = coherent_bounds(CoherentWindow::exact(mu), CoherentWindow::exact(mup));
    const auto ef = errorfree_bounds(r, poisson_distribution(mu, b.decoy.cutoff()),
                                     poisson_distribution(mup, b.signal.cutoff()));
    const auto et = delta1_bounds(r, b.decoy, b.signal);
    if (std::abs(ef.D1_raw) < 1.0) continue;
    EXPECT_NEAR(et.D1_raw / ef.D1_raw, 1.0, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(ErrorTolerant, WiderWindowsNeverRaiseTheBound) {
  const auto r = table_rates();
  double last = 1.0;
  for (double d = 0.0; d <= 0.1; d += 0.005) {
    const auto b = windows(d);
    const double v = delta1_bounds(r, b.decoy, b.signal).delta1_signal.raw;
    EXPECT_LE(v, last);
    last = v;
  }
}

TEST(ObservedRates, ValidationAndCounts) {
  auto r = table_rates();
  EXPECT_NO_THROW(r.validate());
  EXPECT_NEAR(r.signal_counts(), 3.817e-4 * r.p_prime * r.M, 1e-6);
  const auto back = ObservedRates::from_counts(r.decoy_counts(), r.signal_counts(),
                                               r.vacuum_counts(), r.p0, r.p, r.p_prime, r.M);
  EXPECT_NEAR(back.S_prime, r.S_prime, 1e-18);
  r.p0 += 1e-6;
  EXPECT_THROW(r.validate(), InvalidInput);
}
