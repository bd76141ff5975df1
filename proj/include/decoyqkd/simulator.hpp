#pragma once

// Pulse-level Monte Carlo of the three-source decoy protocol. Each slot picks
// a source, draws a photon number from that source's (pattern-dependent)
// distribution and asks the channel whether Bob's detector clicks. Besides
// the observable counts the tally keeps photon-number-resolved counts and
// posterior-weighted sums that only a simulator can know.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "decoyqkd/bounds.hpp"
#include "decoyqkd/channel.hpp"
#include "decoyqkd/error_pattern.hpp"
#include "decoyqkd/pulse_kernel.hpp"

namespace decoyqkd {

struct SourceProbabilities {
  double p0 = 0.0;
  double p = 0.0;
  double p_prime = 0.0;

  /// Throws InvalidInput unless each is in [0, 1] and they sum to 1 (1e-9).
  void validate() const;
};

enum class KernelChoice {
  Auto,       ///< tabulated kernel when possible, widest ISA available
  Reference,  ///< per-pulse evaluation of pattern and channel, any model
  Scalar,     ///< tabulated, scalar
  Avx2,       ///< tabulated, AVX2 (falls back to scalar if unavailable)
};

struct SimulationConfig {
  std::uint64_t pulses = 0;
  SourceProbabilities probs;
  std::uint64_t seed = 0;
  KernelChoice kernel = KernelChoice::Auto;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Posterior-weighted sums over detected pulses, indexed by photon number.
/// weight[k] is the sum of d_{ki} = 1 / (p a_{ki} + p' a'_{ki}) for k >= 1
/// and of d_{0i} = 1 / (p0 + p a_{0i} + p' a'_{0i}) for k = 0; the posterior
/// arrays hold the sums of the per-source probabilities.
struct GroundTruthSums {
  std::array<double, kPhotonBins> weight{};
  std::array<double, kPhotonBins> posterior_vacuum{};
  std::array<double, kPhotonBins> posterior_decoy{};
  std::array<double, kPhotonBins> posterior_signal{};
};

struct SimTally {
  using Histogram = std::array<std::array<std::uint64_t, kPhotonBins>, kSourceCount>;

  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  SourceProbabilities probs;
  Histogram emitted{};   ///< [source][photons]
  Histogram detected{};  ///< [source][photons]
  std::uint64_t clicks = 0;  ///< |C|
  std::optional<GroundTruthSums> truth;

  std::uint64_t count(Source s, int k) const {
    return detected[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
  }
  std::uint64_t emissions(Source s, int k) const {
    return emitted[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
  }
  std::uint64_t source_counts(Source s) const;    ///< N_0, N_d or N_s
  std::uint64_t source_pulses(Source s) const;

  /// Observed counting rates. Source probabilities are taken as the design
  /// values and rates as counts / (probability * M), as in an experiment.
  ObservedRates observed_rates() const;

  /// Adds counts and sums; both tallies must share run parameters.
  void merge(const SimTally& other);
};

/// Runs the protocol. Results depend only on (seed, parameters): thread
/// count and kernel choice do not change the integer counts.
SimTally simulate(const SimulationConfig& config, const ErrorPattern& pattern,
                  const ChannelModel& channel);

/// Per-pulse record, for small traces.
struct PulseRecord {
  std::uint64_t index = 0;
  Source source = Source::Vacuum;
  int photons = 0;
  bool clicked = false;
};

/// Same random stream as simulate(), one record per pulse. Limited to
/// 10^7 pulses.
std::vector<PulseRecord> simulate_trace(const SimulationConfig& config,
                                        const ErrorPattern& pattern,
                                        const ChannelModel& channel);

/// Detected-pulse index sets: all counted pulses and those with k photons.
struct CountSets {
  std::vector<std::uint64_t> all;
  std::map<int, std::vector<std::uint64_t>> by_photons;
};

CountSets classify_counts(std::span<const PulseRecord> trace);

/// Counting rate of a photon-number subclass with its binomial error.
struct RateEstimate {
  double rate = 0.0;
  double sigma = 0.0;
  std::uint64_t detected = 0;
  std::uint64_t emitted = 0;
};

/// s_k for the decoy source and s'_k for the signal source; subclasses with
/// no emissions are absent.
struct SubclassRates {
  std::array<std::optional<RateEstimate>, kPhotonBins> decoy;
  std::array<std::optional<RateEstimate>, kPhotonBins> signal;
};

SubclassRates empirical_subclass_rates(const SimTally& tally);

struct RatioEstimate {
  double ratio = 0.0;
  double sigma = 0.0;  ///< first-order propagation of both binomial errors
};

/// s_k / s'_k; nullopt when either subclass is absent or s'_k = 0.
std::optional<RatioEstimate> subclass_rate_ratio(const SimTally& tally, int k);

/// Probability that a k-photon pulse at intensities `at` came from each
/// source. Throws InvalidInput when every likelihood is zero.
struct SourcePosterior {
  double vacuum = 0.0;
  double decoy = 0.0;
  double signal = 0.0;
};

SourcePosterior source_posterior(int k, IntensityPair at, const SourceProbabilities& probs);

}  // namespace decoyqkd
