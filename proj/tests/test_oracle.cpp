#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/oracle.hpp"

using namespace decoyqkd;

namespace {

Scenario base_scenario() {
  Scenario s;
  s.nominal = {0.2, 0.6};
  s.window_delta = 0.05;
  s.block_length = 1000;
  s.probs = {0.1, 0.4, 0.5};
  s.pulses = 2000000;
  s.seed = 42;
  s.channel = ScenarioChannel::Linear;
  s.transmittance = 0.1;
  return s;
}

SimTally run(const Scenario& s) {
  SimulationConfig c;
  c.pulses = s.pulses;
  c.probs = s.probs;
  c.seed = s.seed;
  return simulate(c, s.pattern(), s.channel_model());
}

}  // namespace

TEST(GroundTruth, ExactPatternHasUniformWeights) {
  const Scenario s = base_scenario();
  const auto tally = run(s);
  const auto g = extract_ground_truth(tally, s.pattern(), s.probs);
  const double d1 = 1.0 / (0.4 * poisson_pmf(0.2, 1) + 0.5 * poisson_pmf(0.6, 1));
  EXPECT_GT(g.single_photon_counts, 0u);
  EXPECT_NEAR(g.true_D1, static_cast<double>(g.single_photon_counts) * d1, 1e-9 * g.true_D1);
  EXPECT_NEAR(g.n1s_posterior + g.n1d_posterior, static_cast<double>(g.single_photon_counts),
              1e-6 * g.true_D1);
}

// Each slot contributes its single-photon transmittance to E[D1]; under the
// attack that is 2 eta_e on half the slots.
TEST(GroundTruth, TwoBlockAttackExpectation) {
  Scenario s = base_scenario();
  s.strength_fraction = 0.1;
  s.window_delta = 0.1;
  s.channel = ScenarioChannel::TwoBlockAttack;
  s.transmittance = 0.05;
  s.pulses = 4000000;
  const auto g = extract_ground_truth(run(s), s.pattern(), s.probs);
  const double expected = 0.05 * static_cast<double>(s.pulses);
  const double sigma = g.true_D1 / std::sqrt(static_cast<double>(g.single_photon_counts));
  EXPECT_NEAR(g.true_D1, expected, 4 * sigma);
}

TEST(GroundTruth, EmptySinglePhotonSet) {
  Scenario s = base_scenario();
  s.transmittance = 0.0;
  const auto g = extract_ground_truth(run(s), s.pattern(), s.probs);
  EXPECT_EQ(g.single_photon_counts, 0u);
  EXPECT_EQ(g.true_D1, 0.0);
}

TEST(GroundTruth, RejectsMismatchedInputs) {
  const Scenario s = base_scenario();
  const auto tally = run(s);
  EXPECT_THROW(extract_ground_truth(tally, s.pattern(), {0.2, 0.3, 0.5}), InvalidInput);
  EXPECT_THROW(extract_ground_truth(tally, ErrorPattern::exact({0.2, 0.6}, 10), s.probs),
               InvalidInput);
  SimTally bare = tally;
  bare.truth.reset();
  EXPECT_THROW(extract_ground_truth(bare, s.pattern(), s.probs), InvalidInput);
}

TEST(Safety, HonestLinearChannelPasses) {
  const auto r = run_scenario(base_scenario(), 4.0);
  EXPECT_EQ(r.status, ScenarioStatus::Pass);
  EXPECT_GT(r.slack, 0.0);
  EXPECT_TRUE(r.vacuum_ok);
}

TEST(Safety, TwoBlockAttackWithinWindowsPasses) {
  Scenario s = base_scenario();
  s.strength_fraction = 0.1;
  s.window_delta = 0.1;
  s.channel = ScenarioChannel::TwoBlockAttack;
  s.transmittance = 0.2;
  const auto r = run_scenario(s, 4.0);
  EXPECT_EQ(r.status, ScenarioStatus::Pass) << r.slack;
  ASSERT_TRUE(r.report);
  EXPECT_LE(r.report->check("D1").bound, r.report->check("D1").truth + 4 * r.report->check("D1").sigma);
}

TEST(Safety, OrderingViolationIsRejectedNotFailed) {
  Scenario s = base_scenario();
  s.nominal = {0.35, 0.42};
  s.window_delta = 0.1;
  const auto r = run_scenario(s, 4.0);
  EXPECT_EQ(r.status, ScenarioStatus::PreconditionRejected);
  EXPECT_FALSE(r.report);
}

TEST(Safety, RunIdentityIsChecked) {
  const Scenario s = base_scenario();
  const auto tally = run(s);
  const auto b = coherent_bounds(CoherentWindow::relative(0.2, 0.05), CoherentWindow::relative(0.6, 0.05));
  auto eval = evaluate_bound(tally, b.decoy, b.signal);
  auto g = extract_ground_truth(tally, s.pattern(), s.probs);
  EXPECT_NO_THROW(check_safety(eval, g, 3.0));
  g.run.seed += 1;
  EXPECT_THROW(check_safety(eval, g, 3.0), InvalidInput);
  EXPECT_THROW(check_safety(eval, extract_ground_truth(tally, s.pattern(), s.probs), -1.0),
               InvalidInput);
}

TEST(Safety, ErrorFreeBoundOvershootsUnderCollectiveAttack) {
  Scenario s = base_scenario();
  s.strength_fraction = 0.1;
  s.window_delta = 0.1;
  s.channel = ScenarioChannel::TwoBlockAttack;
  s.transmittance = 0.5;
  s.pulses = 20000000;
  const auto cmp = compare_with_errorfree(s, 4.0);
  EXPECT_TRUE(cmp.tolerant.pass);
  EXPECT_FALSE(cmp.errorfree.pass);
  const auto& q = cmp.errorfree.check("delta1_signal");
  EXPECT_GT(q.bound - q.truth, 4 * q.sigma);
}

TEST(Scenarios, DrawsAreReproducibleAndSatisfyOrdering) {
  const auto a = draw_scenarios(30, 5, 1000);
  const auto b = draw_scenarios(30, 5, 1000);
  ASSERT_EQ(a.scenarios.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    const auto& s = a.scenarios[i];
    EXPECT_EQ(s.seed, b.scenarios[i].seed);
    EXPECT_EQ(s.nominal.decoy, b.scenarios[i].nominal.decoy);
    EXPECT_LT(s.nominal.decoy, s.nominal.signal);
    EXPECT_LE(s.strength_fraction, s.window_delta);
    EXPECT_LE(s.window_delta, 0.1);
    EXPECT_NEAR(s.probs.p0 + s.probs.p + s.probs.p_prime, 1.0, 1e-12);
  }
}

TEST(Scenarios, SmallSuitePassesAndWritesVerdicts) {
  const auto summary = run_oracle_suite(5, 3, 1000000, 4.0);
  EXPECT_EQ(summary.failed, 0u);
  EXPECT_EQ(summary.pass_rate(), 1.0);
  std::ostringstream out;
  write_verdict_lines(out, summary.results);
  std::istringstream in(out.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("scenario_id"));
    EXPECT_TRUE(j["pass"].get<bool>());
    ++n;
  }
  EXPECT_EQ(n, 5);
}
