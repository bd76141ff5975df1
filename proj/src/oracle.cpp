#include "decoyqkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

struct D1Coefficients {
  double a0_decoy_upper;
  double a0_signal_lower;
  double a2_decoy_upper;
  double a2_signal_lower;
  double a1_decoy_upper;
  double a1_signal_lower;
};

// Standard deviation of the D1 bound, linear in (N_d, N_s, N_0), under
// Poisson noise on each count.
double d1_sigma(const ObservedRates& rates, const D1Coefficients& c) {
  const double den = c.a1_decoy_upper * c.a2_signal_lower - c.a1_signal_lower * c.a2_decoy_upper;
  if (!(den > 0.0)) return 0.0;
  const double coef_d = c.a2_signal_lower / (rates.p * den);
  const double coef_s = c.a2_decoy_upper / (rates.p_prime * den);
  const double coef_0 =
      rates.p0 > 0.0
          ? (c.a2_decoy_upper * c.a0_signal_lower - c.a2_signal_lower * c.a0_decoy_upper) /
                (rates.p0 * den)
          : 0.0;
  return std::sqrt(coef_d * coef_d * rates.decoy_counts() +
                   coef_s * coef_s * rates.signal_counts() +
                   coef_0 * coef_0 * rates.vacuum_counts());
}

RunId run_of(const SimTally& tally) { return {tally.pulses, tally.seed}; }

EvaluatedBound finish(const SimTally& tally, const ObservedRates& rates, SingletBound bound,
                      const D1Coefficients& c, double a0_decoy_upper, double a0_signal_upper,
                      double a1_decoy_lower) {
  EvaluatedBound out;
  out.run = run_of(tally);
  out.bound = bound;
  out.D1_sigma = d1_sigma(rates, c);
  out.a1_decoy_lower = a1_decoy_lower;
  out.a1_signal_lower = c.a1_signal_lower;
  const double sqrt_n0 = std::sqrt(rates.vacuum_counts());
  if (rates.p0 > 0.0) {
    out.n0d_sigma = a0_decoy_upper * rates.p / rates.p0 * sqrt_n0;
    out.n0s_sigma = a0_signal_upper * rates.p_prime / rates.p0 * sqrt_n0;
  }
  return out;
}

}  // namespace

GroundTruth extract_ground_truth(const SimTally& tally, const ErrorPattern& pattern,
                                 const SourceProbabilities& probs) {
  if (!tally.truth) throw InvalidInput("tally carries no ground-truth bookkeeping");
  if (std::abs(probs.p0 - tally.probs.p0) > 1e-12 || std::abs(probs.p - tally.probs.p) > 1e-12 ||
      std::abs(probs.p_prime - tally.probs.p_prime) > 1e-12) {
    throw InvalidInput("source probabilities differ from those of the simulated run");
  }
  if (tally.pulses > pattern.pulse_count()) {
    throw InvalidInput("tally covers more pulses than the error pattern");
  }
  const GroundTruthSums& sums = *tally.truth;
  GroundTruth g;
  g.run = run_of(tally);
  g.N_d = tally.source_counts(Source::Decoy);
  g.N_s = tally.source_counts(Source::Signal);
  g.N_0 = tally.source_counts(Source::Vacuum);
  g.n1d_realized = tally.count(Source::Decoy, 1);
  g.n1s_realized = tally.count(Source::Signal, 1);
  g.single_photon_counts = g.n1d_realized + g.n1s_realized;
  g.true_D1 = sums.weight[1];
  g.n1d_posterior = sums.posterior_decoy[1];
  g.n1s_posterior = sums.posterior_signal[1];
  g.n0d_realized = tally.count(Source::Decoy, 0);
  g.n0s_realized = tally.count(Source::Signal, 0);
  g.n0d_posterior = sums.posterior_decoy[0];
  g.n0s_posterior = sums.posterior_signal[0];
  g.delta1_signal = g.N_s > 0 ? static_cast<double>(g.n1s_realized) / static_cast<double>(g.N_s) : 0.0;
  g.delta1_decoy = g.N_d > 0 ? static_cast<double>(g.n1d_realized) / static_cast<double>(g.N_d) : 0.0;
  return g;
}

EvaluatedBound evaluate_bound(const SimTally& tally, const BoundedDistribution& decoy,
                              const BoundedDistribution& signal) {
  const ObservedRates rates = tally.observed_rates();
  const SingletBound bound = delta1_bounds(rates, decoy, signal);
  const D1Coefficients c{decoy.upper(0), signal.lower(0), decoy.upper(2),
                         signal.lower(2), decoy.upper(1), signal.lower(1)};
  return finish(tally, rates, bound, c, decoy.upper(0), signal.upper(0), decoy.lower(1));
}

EvaluatedBound evaluate_errorfree_bound(const SimTally& tally, const PhotonDistribution& decoy,
                                        const PhotonDistribution& signal) {
  const ObservedRates rates = tally.observed_rates();
  const SingletBound bound = errorfree_bounds(rates, decoy, signal);
  const D1Coefficients c{decoy[0], signal[0], decoy[2], signal[2], decoy[1], signal[1]};
  return finish(tally, rates, bound, c, decoy[0], signal[0], decoy[1]);
}

const QuantityCheck& SafetyReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no safety check named " + name);
}

SafetyReport check_safety(const EvaluatedBound& eval, const GroundTruth& truth,
                          double sigma_allowance) {
  if (!(eval.run == truth.run)) {
    throw InvalidInput(fmt::format("bound from run (M={}, seed={}) checked against run (M={}, seed={})",
                                   eval.run.pulses, eval.run.seed, truth.run.pulses,
                                   truth.run.seed));
  }
  if (!(sigma_allowance >= 0.0)) throw InvalidInput("sigma allowance must be nonnegative");

  SafetyReport report;
  report.sigma_allowance = sigma_allowance;
  const auto add = [&](std::string name, double bound, double value, double sigma) {
    QuantityCheck q{std::move(name), bound, value, sigma, value - bound,
                    bound <= value + sigma_allowance * sigma};
    report.pass = report.pass && q.pass;
    report.checks.push_back(std::move(q));
  };

  const auto c1 = static_cast<double>(truth.single_photon_counts);
  const double unit = c1 > 0.0 ? truth.true_D1 / c1 : 1.0;
  const double truth_var = c1 > 0.0 ? truth.true_D1 * truth.true_D1 / c1 : 0.0;
  add("D1", eval.bound.D1_lower, truth.true_D1,
      std::sqrt(eval.D1_sigma * eval.D1_sigma + truth_var) + unit);

  const double n1s = static_cast<double>(truth.n1s_realized);
  const double n1d = static_cast<double>(truth.n1d_realized);
  // n1 = a1 * D1, so its bound inherits D1's relative noise.
  const auto projected_sigma = [&](double n1_bound, double realized) {
    const double rel = eval.bound.D1_lower > 0.0 ? n1_bound / eval.bound.D1_lower : 0.0;
    return std::sqrt(rel * rel * eval.D1_sigma * eval.D1_sigma + realized) + 1.0;
  };
  const double sigma_n1s = projected_sigma(eval.bound.n1s_lower, n1s);
  const double sigma_n1d = projected_sigma(eval.bound.n1d_lower, n1d);
  add("n1s", eval.bound.n1s_lower, n1s, sigma_n1s);
  add("n1d", eval.bound.n1d_lower, n1d, sigma_n1d);

  const double Ns = static_cast<double>(std::max<std::uint64_t>(truth.N_s, 1));
  const double Nd = static_cast<double>(std::max<std::uint64_t>(truth.N_d, 1));
  add("delta1_signal", eval.bound.delta1_signal.value, truth.delta1_signal, sigma_n1s / Ns);
  add("delta1_decoy", eval.bound.delta1_decoy.value, truth.delta1_decoy, sigma_n1d / Nd);
  return report;
}

bool vacuum_intervals_contain(const EvaluatedBound& eval, const GroundTruth& truth,
                              double sigma_allowance) {
  const auto within = [&](Interval iv, std::uint64_t realized, double endpoint_sigma) {
    const double x = static_cast<double>(realized);
    const double sigma = std::sqrt(endpoint_sigma * endpoint_sigma + x) + 1.0;
    return x >= iv.lower - sigma_allowance * sigma && x <= iv.upper + sigma_allowance * sigma;
  };
  return within(eval.bound.n0d, truth.n0d_realized, eval.n0d_sigma) &&
         within(eval.bound.n0s, truth.n0s_realized, eval.n0s_sigma);
}

ErrorPattern Scenario::pattern() const {
  if (strength_fraction > 0.0) {
    return ErrorPattern::two_block(nominal, strength_fraction, block_length, pulses);
  }
  return ErrorPattern::exact(nominal, pulses);
}

ChannelModel Scenario::channel_model() const {
  switch (channel) {
    case ScenarioChannel::Linear:
      return ChannelModel::linear(transmittance, dark_count_prob);
    case ScenarioChannel::TwoBlockAttack:
      return ChannelModel::block_attack({transmittance, nominal, strength_fraction},
                                        dark_count_prob);
    case ScenarioChannel::RandomBlockTransmittance:
      return ChannelModel::block_transmittance(block_length, block_transmittance,
                                               dark_count_prob);
  }
  throw std::logic_error("unknown scenario channel");
}

namespace {

struct PreparedScenario {
  SourceBounds bounds;
  ErrorPattern pattern;
  SimTally tally;
  GroundTruth truth;
};

SourceBounds scenario_bounds(const Scenario& s) {
  return coherent_bounds(CoherentWindow::relative(s.nominal.decoy, s.window_delta),
                         CoherentWindow::relative(s.nominal.signal, s.window_delta));
}

bool ordering_holds(const SourceBounds& b) {
  return check_bounded_ratio_condition(b.decoy, b.signal,
                                       std::min(b.decoy.cutoff(), b.signal.cutoff()))
      .holds;
}

PreparedScenario prepare(const Scenario& s) {
  SourceBounds bounds = scenario_bounds(s);
  ErrorPattern pattern = s.pattern();
  pattern.validate_against(CoherentWindow::relative(s.nominal.decoy, s.window_delta),
                           CoherentWindow::relative(s.nominal.signal, s.window_delta));
  SimulationConfig config;
  config.pulses = s.pulses;
  config.probs = s.probs;
  config.seed = s.seed;
  SimTally tally = simulate(config, pattern, s.channel_model());
  GroundTruth truth = extract_ground_truth(tally, pattern, s.probs);
  return {std::move(bounds), std::move(pattern), std::move(tally), truth};
}

double min_sigma_slack(const SafetyReport& r) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& q : r.checks) {
    if (q.sigma > 0.0) {
      worst = std::min(worst, (q.truth + r.sigma_allowance * q.sigma - q.bound) / q.sigma);
    }
  }
  return worst;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario, double sigma_allowance) {
  ScenarioResult result;
  result.scenario_id = scenario.id;
  if (!ordering_holds(scenario_bounds(scenario))) {
    result.status = ScenarioStatus::PreconditionRejected;
    result.message = "coefficient bounds violate the ratio ordering";
    return result;
  }
  PreparedScenario prep = prepare(scenario);
  EvaluatedBound eval;
  try {
    eval = evaluate_bound(prep.tally, prep.bounds.decoy, prep.bounds.signal);
  } catch (const PreconditionViolation& e) {
    result.status = ScenarioStatus::PreconditionRejected;
    result.message = e.what();
    return result;
  }
  SafetyReport report = check_safety(eval, prep.truth, sigma_allowance);
  result.status = report.pass ? ScenarioStatus::Pass : ScenarioStatus::Fail;
  result.slack = report.check("delta1_signal").slack;
  result.sigma_slack = min_sigma_slack(report);
  result.vacuum_ok = vacuum_intervals_contain(eval, prep.truth, sigma_allowance);
  result.report = std::move(report);
  return result;
}

BaselineComparison compare_with_errorfree(const Scenario& scenario, double sigma_allowance) {
  PreparedScenario prep = prepare(scenario);
  const EvaluatedBound tolerant = evaluate_bound(prep.tally, prep.bounds.decoy, prep.bounds.signal);
  const int cutoff = default_cutoff(scenario.nominal.signal);
  const EvaluatedBound errorfree =
      evaluate_errorfree_bound(prep.tally, poisson_distribution(scenario.nominal.decoy, cutoff),
                               poisson_distribution(scenario.nominal.signal, cutoff));
  return {scenario.id, prep.truth, check_safety(errorfree, prep.truth, sigma_allowance),
          check_safety(tolerant, prep.truth, sigma_allowance)};
}

ScenarioDraws draw_scenarios(std::uint64_t count, std::uint64_t seed, std::uint64_t pulses) {
  if (pulses == 0) throw InvalidInput("scenarios need at least one pulse");
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const auto pick = [&](std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
  };
  constexpr std::uint64_t kBlockLengths[] = {64, 1000, 4096};

  ScenarioDraws draws;
  while (draws.scenarios.size() < count) {
    Scenario s;
    s.id = draws.scenarios.size();
    s.pulses = pulses;
    s.seed = seed ^ (0x9E3779B97F4A7C15ull * (s.id + 1));
    s.nominal = {uniform(0.1, 0.4), uniform(0.4, 0.9)};
    if (!(s.nominal.decoy < s.nominal.signal)) continue;
    s.window_delta = uniform(0.0, 0.1);
    s.block_length = kBlockLengths[pick(3)];
    s.channel = static_cast<ScenarioChannel>(pick(3));
    s.dark_count_prob = uniform(0.0, 1e-4);
    s.probs.p0 = uniform(0.05, 0.2);
    s.probs.p = uniform(0.2, 0.5);
    s.probs.p_prime = 1.0 - s.probs.p0 - s.probs.p;
    switch (s.channel) {
      case ScenarioChannel::Linear:
        s.transmittance = std::exp(uniform(std::log(1e-3), std::log(0.5)));
        s.strength_fraction = pick(2) == 0 ? 0.0 : uniform(0.0, 1.0) * s.window_delta;
        break;
      case ScenarioChannel::TwoBlockAttack:
        s.window_delta = uniform(0.01, 0.1);
        s.strength_fraction = uniform(0.2, 1.0) * s.window_delta;
        s.transmittance = uniform(0.001, 0.5);
        break;
      case ScenarioChannel::RandomBlockTransmittance: {
        s.strength_fraction = pick(2) == 0 ? 0.0 : uniform(0.0, 1.0) * s.window_delta;
        const std::uint64_t blocks = pick(2) == 0 ? 2 : 4;
        for (std::uint64_t b = 0; b < blocks; ++b) s.block_transmittance.push_back(uniform(0.0, 0.5));
        break;
      }
    }
    if (!ordering_holds(scenario_bounds(s))) {
      ++draws.rejected;
      continue;
    }
    draws.scenarios.push_back(std::move(s));
  }
  return draws;
}

double SuiteSummary::pass_rate() const {
  const auto decided = passed + failed;
  return decided == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(decided);
}

SuiteSummary run_oracle_suite(std::uint64_t count, std::uint64_t seed, std::uint64_t pulses,
                              double sigma_allowance) {
  const ScenarioDraws draws = draw_scenarios(count, seed, pulses);
  SuiteSummary summary;
  summary.rejected_draws = draws.rejected;
  summary.worst_slack = std::numeric_limits<double>::infinity();
  summary.worst_sigma_slack = std::numeric_limits<double>::infinity();
  for (const auto& s : draws.scenarios) {
    ScenarioResult r = run_scenario(s, sigma_allowance);
    if (r.status == ScenarioStatus::Pass) ++summary.passed;
    if (r.status == ScenarioStatus::Fail) ++summary.failed;
    if (!r.vacuum_ok) ++summary.vacuum_misses;
    if (r.status != ScenarioStatus::PreconditionRejected) {
      summary.worst_slack = std::min(summary.worst_slack, r.slack);
      summary.worst_sigma_slack = std::min(summary.worst_sigma_slack, r.sigma_slack);
    }
    summary.results.push_back(std::move(r));
  }
  return summary;
}

void write_verdict_lines(std::ostream& out, const std::vector<ScenarioResult>& results) {
  for (const auto& r : results) {
    nlohmann::json line{{"scenario_id", r.scenario_id},
                        {"pass", r.status == ScenarioStatus::Pass},
                        {"slack", r.slack}};
    if (r.status == ScenarioStatus::PreconditionRejected) {
      line["precondition_rejected"] = true;
      line["message"] = r.message;
    } else {
      line["sigma_slack"] = r.sigma_slack;
      line["vacuum_ok"] = r.vacuum_ok;
    }
    out << line.dump() << '\n';
  }
}

}  // namespace decoyqkd
