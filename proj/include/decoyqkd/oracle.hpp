#pragma once

// Ground truth from simulated runs and the safety check of analytic lower
// bounds against it.
//
// Finite runs fluctuate, so every comparison carries a noise budget. Counts
// are treated as Poisson (normal approximation); the bound's standard
// deviation is propagated linearly from N_d, N_s and N_0, the truth's from
// its own count, the two are added in quadrature (ignoring their positive
// correlation, which only overstates the noise) and a one-count floor is
// added on top.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "decoyqkd/bounds.hpp"
#include "decoyqkd/channel.hpp"
#include "decoyqkd/error_pattern.hpp"
#include "decoyqkd/simulator.hpp"

namespace decoyqkd {

struct RunId {
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const RunId&, const RunId&) = default;
};

struct GroundTruth {
  RunId run;
  std::uint64_t N_d = 0;
  std::uint64_t N_s = 0;
  std::uint64_t N_0 = 0;
  std::uint64_t single_photon_counts = 0;  ///< |c_1|
  double true_D1 = 0.0;                    ///< sum over c_1 of d_{1i}
  // Single-photon counts by source: realized labels and posterior weights.
  std::uint64_t n1s_realized = 0;
  std::uint64_t n1d_realized = 0;
  double n1s_posterior = 0.0;
  double n1d_posterior = 0.0;
  // Vacuum counts from the decoy and signal sources.
  std::uint64_t n0d_realized = 0;
  std::uint64_t n0s_realized = 0;
  double n0d_posterior = 0.0;
  double n0s_posterior = 0.0;
  double delta1_signal = 0.0;  ///< n1s_realized / N_s
  double delta1_decoy = 0.0;   ///< n1d_realized / N_d
};

/// Reads the posterior sums the simulator kept for `tally`. Throws
/// InvalidInput when the tally has no ground-truth bookkeeping or was run
/// with other source probabilities or more pulses than the pattern covers.
GroundTruth extract_ground_truth(const SimTally& tally, const ErrorPattern& pattern,
                                 const SourceProbabilities& probs);

/// An analytic bound evaluated on a run's observed rates, with the standard
/// deviation of D1 induced by Poisson noise on N_d, N_s and N_0.
struct EvaluatedBound {
  RunId run;
  SingletBound bound;
  double D1_sigma = 0.0;
  double a1_decoy_lower = 0.0;   ///< coefficient projecting D1 onto decoy counts
  double a1_signal_lower = 0.0;  ///< same for signal counts
  double n0d_sigma = 0.0;  ///< of the vacuum interval endpoints
  double n0s_sigma = 0.0;
};

/// Error-tolerant bound from coefficient bounds.
EvaluatedBound evaluate_bound(const SimTally& tally, const BoundedDistribution& decoy,
                              const BoundedDistribution& signal);

/// Error-free bound for sources claimed to be exactly `decoy` / `signal`.
EvaluatedBound evaluate_errorfree_bound(const SimTally& tally, const PhotonDistribution& decoy,
                                        const PhotonDistribution& signal);

struct QuantityCheck {
  std::string name;
  double bound = 0.0;
  double truth = 0.0;
  double sigma = 0.0;
  double slack = 0.0;  ///< truth - bound; negative means the bound exceeds the truth
  bool pass = true;    ///< bound <= truth + allowance * sigma
};

struct SafetyReport {
  bool pass = true;
  double sigma_allowance = 0.0;
  std::vector<QuantityCheck> checks;  ///< D1, n1s, n1d, delta1_signal, delta1_decoy

  const QuantityCheck& check(const std::string& name) const;
};

/// Throws InvalidInput when the bound and the truth come from different runs.
SafetyReport check_safety(const EvaluatedBound& bound, const GroundTruth& truth,
                          double sigma_allowance);

/// Whether the realized vacuum counts fall inside the vacuum intervals,
/// widened by `sigma_allowance` standard deviations.
bool vacuum_intervals_contain(const EvaluatedBound& bound, const GroundTruth& truth,
                              double sigma_allowance);

// --- randomized scenarios -------------------------------------------------

enum class ScenarioChannel { Linear, TwoBlockAttack, RandomBlockTransmittance };

struct Scenario {
  std::uint64_t id = 0;
  IntensityPair nominal;
  double window_delta = 0.0;     ///< claimed relative intensity error
  double strength_fraction = 0.0;  ///< actual two-block error, <= window_delta; 0 = exact
  std::uint64_t block_length = 1000;
  ScenarioChannel channel = ScenarioChannel::Linear;
  double transmittance = 0.0;  ///< eta (linear) or eta_e (attack)
  std::vector<double> block_transmittance;
  double dark_count_prob = 0.0;
  SourceProbabilities probs;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;

  ErrorPattern pattern() const;
  ChannelModel channel_model() const;
};

enum class ScenarioStatus { Pass, Fail, PreconditionRejected };

struct ScenarioResult {
  std::uint64_t scenario_id = 0;
  ScenarioStatus status = ScenarioStatus::Pass;
  double slack = 0.0;        ///< truth - bound for delta1_signal
  double sigma_slack = 0.0;  ///< smallest (truth + allowance sigma - bound) / sigma
  bool vacuum_ok = true;
  std::optional<SafetyReport> report;
  std::string message;
};

/// Simulates one scenario and checks the error-tolerant bound.
ScenarioResult run_scenario(const Scenario& scenario, double sigma_allowance);

struct ScenarioDraws {
  std::vector<Scenario> scenarios;
  std::uint64_t rejected = 0;  ///< draws discarded for violating the ratio ordering
};

/// Draws `count` scenarios satisfying the ratio ordering from `seed`:
/// mu in [0.1, 0.4], mu' in [0.4, 0.9], mu < mu', window error <= 10%,
/// pattern within the windows, channel from all three families.
ScenarioDraws draw_scenarios(std::uint64_t count, std::uint64_t seed, std::uint64_t pulses);

/// Error-free bound (sources claimed exact at nominal intensity) and
/// error-tolerant bound checked on the same simulated run.
struct BaselineComparison {
  std::uint64_t scenario_id = 0;
  GroundTruth truth;
  SafetyReport errorfree;
  SafetyReport tolerant;
};

/// Throws PreconditionViolation when either bound's ordering check fails.
BaselineComparison compare_with_errorfree(const Scenario& scenario, double sigma_allowance);

struct SuiteSummary {
  std::vector<ScenarioResult> results;
  std::uint64_t passed = 0;
  std::uint64_t failed = 0;
  std::uint64_t rejected_draws = 0;
  std::uint64_t vacuum_misses = 0;
  double worst_slack = 0.0;
  double worst_sigma_slack = 0.0;

  double pass_rate() const;
};

SuiteSummary run_oracle_suite(std::uint64_t count, std::uint64_t seed, std::uint64_t pulses,
                              double sigma_allowance);

/// One JSON object per line: {"scenario_id":..,"pass":..,"slack":..,...}.
void write_verdict_lines(std::ostream& out, const std::vector<ScenarioResult>& results);

}  // namespace decoyqkd
