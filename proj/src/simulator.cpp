#include "decoyqkd/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/philox.hpp"

namespace decoyqkd {

namespace {

constexpr std::uint64_t kChunk = std::uint64_t{1} << 16;
constexpr std::uint64_t kMaxTrace = 10'000'000;

std::size_t idx(Source s) { return static_cast<std::size_t>(s); }

// One pulse through the reference path: pattern and channel are evaluated at
// the slot itself. Thresholds are built exactly as in build_kernel_plan, so
// both paths make identical decisions.
PulseRecord draw_pulse(std::uint64_t i, philox::Key key, std::int64_t vacuum_cut,
                       std::int64_t decoy_cut, const ErrorPattern& pattern,
                       const ChannelModel& channel, IntensityPair& at) {
  const auto u = philox::pulse_draws(i, key);
  const std::int64_t u0 = u[0];
  const std::int64_t u1 = u[1];
  const std::int64_t u2 = u[2];
  PulseRecord rec;
  rec.index = i;
  rec.source = u0 < vacuum_cut ? Source::Vacuum : (u0 < decoy_cut ? Source::Decoy : Source::Signal);
  at = pattern.intensity(i);
  if (rec.source != Source::Vacuum) {
    const double mu = rec.source == Source::Decoy ? at.decoy : at.signal;
    double cdf = 0.0;
    int k = 0;
    while (k < kPhotonBins - 1) {
      cdf += poisson_pmf(mu, k);
      if (!(u1 > probability_cut(std::min(cdf, 1.0)) - 1)) break;
      ++k;
    }
    rec.photons = k;
  }
  rec.clicked = u2 < probability_cut(channel.click_probability(i, rec.photons, pattern));
  return rec;
}

// Adds `n` detected k-photon pulses emitted at intensities `at`.
void add_truth(GroundTruthSums& sums, int k, IntensityPair at, const SourceProbabilities& probs,
               double n) {
  const double a = poisson_pmf(at.decoy, k);
  const double a_prime = poisson_pmf(at.signal, k);
  const double vac = k == 0 ? probs.p0 : 0.0;
  const double norm = vac + probs.p * a + probs.p_prime * a_prime;
  if (!(norm > 0.0)) return;
  const double d = 1.0 / norm;
  const auto kk = static_cast<std::size_t>(k);
  sums.weight[kk] += n * d;
  sums.posterior_vacuum[kk] += n * vac * d;
  sums.posterior_decoy[kk] += n * probs.p * a * d;
  sums.posterior_signal[kk] += n * probs.p_prime * a_prime * d;
}

unsigned thread_count(const SimulationConfig& config, std::uint64_t chunks) {
  unsigned n = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(chunks, 1)));
}

// Runs body(chunk_index) for every chunk on a small worker pool.
template <typename Body>
void for_each_chunk(std::uint64_t chunks, unsigned threads, Body&& body) {
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned tid) {
    for (std::uint64_t c = next++; c < chunks; c = next++) body(tid, c);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
}

SimTally empty_tally(const SimulationConfig& config) {
  SimTally t;
  t.pulses = config.pulses;
  t.seed = config.seed;
  t.probs = config.probs;
  t.truth = GroundTruthSums{};
  return t;
}

SimTally simulate_tabulated(const SimulationConfig& config, const KernelPlan& plan,
                            KernelIsa isa) {
  const std::uint64_t chunks = (config.pulses + kChunk - 1) / kChunk;
  const unsigned threads = thread_count(config, chunks);
  std::vector<ClassCounts> partial(threads, ClassCounts(plan.classes.size()));
  for_each_chunk(chunks, threads, [&](unsigned tid, std::uint64_t c) {
    const std::uint64_t begin = c * kChunk;
    run_pulses(isa, plan, begin, std::min(begin + kChunk, config.pulses), partial[tid]);
  });
  ClassCounts total(plan.classes.size());
  for (const auto& p : partial) total.merge(p);

  SimTally tally = empty_tally(config);
  for (std::size_t c = 0; c < plan.classes.size(); ++c) {
    for (int k = 0; k < kPhotonBins; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      std::uint64_t clicks = 0;
      for (int s = 0; s < kSourceCount; ++s) {
        tally.emitted[s][kk] += total.emitted[c][s][kk];
        tally.detected[s][kk] += total.detected[c][s][kk];
        clicks += total.detected[c][s][kk];
      }
      tally.clicks += clicks;
      if (clicks > 0) {
        add_truth(*tally.truth, k, plan.classes[c].intensity, config.probs,
                  static_cast<double>(clicks));
      }
    }
  }
  return tally;
}

SimTally simulate_reference(const SimulationConfig& config, const ErrorPattern& pattern,
                            const ChannelModel& channel) {
  const auto key = philox::key_from_seed(config.seed);
  const auto [vacuum_cut, decoy_cut] = source_cuts(config.probs.p0, config.probs.p);
  const std::uint64_t chunks = (config.pulses + kChunk - 1) / kChunk;
  std::vector<SimTally> partial(chunks);
  for_each_chunk(chunks, thread_count(config, chunks), [&](unsigned, std::uint64_t c) {
    SimTally t = empty_tally(config);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(begin + kChunk, config.pulses);
    t.pulses = end - begin;
    IntensityPair at;
    for (std::uint64_t i = begin; i < end; ++i) {
      const PulseRecord rec = draw_pulse(i, key, vacuum_cut, decoy_cut, pattern, channel, at);
      const auto k = static_cast<std::size_t>(rec.photons);
      ++t.emitted[idx(rec.source)][k];
      if (rec.clicked) {
        ++t.detected[idx(rec.source)][k];
        ++t.clicks;
        add_truth(*t.truth, rec.photons, at, config.probs, 1.0);
      }
    }
    partial[c] = std::move(t);
  });
  SimTally tally = empty_tally(config);
  tally.pulses = 0;
  for (const auto& p : partial) tally.merge(p);
  return tally;
}

void validate_config(const SimulationConfig& config, const ErrorPattern& pattern) {
  config.probs.validate();
  if (config.pulses == 0) throw InvalidInput("simulation needs at least one pulse");
  if (config.pulses > pattern.pulse_count()) {
    throw InvalidInput(fmt::format("pattern covers {} pulses, simulation asks for {}",
                                   pattern.pulse_count(), config.pulses));
  }
}

}  // namespace

void SourceProbabilities::validate() const {
  for (double x : {p0, p, p_prime}) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidInput(fmt::format("source probability {} outside [0, 1]", x));
    }
  }
  if (std::abs(p0 + p + p_prime - 1.0) > 1e-9) {
    throw InvalidInput(fmt::format("source probabilities sum to {}", p0 + p + p_prime));
  }
}

std::uint64_t SimTally::source_counts(Source s) const {
  std::uint64_t n = 0;
  for (auto c : detected[idx(s)]) n += c;
  return n;
}

std::uint64_t SimTally::source_pulses(Source s) const {
  std::uint64_t n = 0;
  for (auto c : emitted[idx(s)]) n += c;
  return n;
}

ObservedRates SimTally::observed_rates() const {
  return ObservedRates::from_counts(static_cast<double>(source_counts(Source::Decoy)),
                                    static_cast<double>(source_counts(Source::Signal)),
                                    static_cast<double>(source_counts(Source::Vacuum)), probs.p0,
                                    probs.p, probs.p_prime, static_cast<double>(pulses));
}

void SimTally::merge(const SimTally& other) {
  pulses += other.pulses;
  for (std::size_t s = 0; s < kSourceCount; ++s) {
    for (std::size_t k = 0; k < kPhotonBins; ++k) {
      emitted[s][k] += other.emitted[s][k];
      detected[s][k] += other.detected[s][k];
    }
  }
  clicks += other.clicks;
  if (truth && other.truth) {
    for (std::size_t k = 0; k < kPhotonBins; ++k) {
      truth->weight[k] += other.truth->weight[k];
      truth->posterior_vacuum[k] += other.truth->posterior_vacuum[k];
      truth->posterior_decoy[k] += other.truth->posterior_decoy[k];
      truth->posterior_signal[k] += other.truth->posterior_signal[k];
    }
  } else {
    truth.reset();
  }
}

SimTally simulate(const SimulationConfig& config, const ErrorPattern& pattern,
                  const ChannelModel& channel) {
  validate_config(config, pattern);
  if (config.kernel != KernelChoice::Reference) {
    const KernelPlan plan = build_kernel_plan(pattern, channel, config.probs.p0, config.probs.p,
                                              config.seed, config.pulses);
    if (!plan.classes.empty()) {
      KernelIsa isa = default_kernel_isa();
      if (config.kernel == KernelChoice::Scalar) isa = KernelIsa::Scalar;
      if (config.kernel == KernelChoice::Avx2) isa = KernelIsa::Avx2;
      return simulate_tabulated(config, plan, isa);
    }
  }
  return simulate_reference(config, pattern, channel);
}

std::vector<PulseRecord> simulate_trace(const SimulationConfig& config,
                                        const ErrorPattern& pattern,
                                        const ChannelModel& channel) {
  validate_config(config, pattern);
  if (config.pulses > kMaxTrace) {
    throw InvalidInput(fmt::format("trace limited to {} pulses", kMaxTrace));
  }
  const auto key = philox::key_from_seed(config.seed);
  const auto [vacuum_cut, decoy_cut] = source_cuts(config.probs.p0, config.probs.p);
  std::vector<PulseRecord> trace;
  trace.reserve(config.pulses);
  IntensityPair at;
  for (std::uint64_t i = 0; i < config.pulses; ++i) {
    trace.push_back(draw_pulse(i, key, vacuum_cut, decoy_cut, pattern, channel, at));
  }
  return trace;
}

CountSets classify_counts(std::span<const PulseRecord> trace) {
  CountSets sets;
  for (const auto& rec : trace) {
    if (!rec.clicked) continue;
    sets.all.push_back(rec.index);
    sets.by_photons[rec.photons].push_back(rec.index);
  }
  return sets;
}

SubclassRates empirical_subclass_rates(const SimTally& tally) {
  SubclassRates out;
  const auto estimate = [&](Source s, int k) -> std::optional<RateEstimate> {
    const std::uint64_t n = tally.emissions(s, k);
    if (n == 0) return std::nullopt;
    RateEstimate e;
    e.detected = tally.count(s, k);
    e.emitted = n;
    e.rate = static_cast<double>(e.detected) / static_cast<double>(n);
    e.sigma = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(n));
    return e;
  };
  for (int k = 0; k < kPhotonBins; ++k) {
    out.decoy[static_cast<std::size_t>(k)] = estimate(Source::Decoy, k);
    out.signal[static_cast<std::size_t>(k)] = estimate(Source::Signal, k);
  }
  return out;
}

std::optional<RatioEstimate> subclass_rate_ratio(const SimTally& tally, int k) {
  const auto rates = empirical_subclass_rates(tally);
  const auto& d = rates.decoy[static_cast<std::size_t>(k)];
  const auto& s = rates.signal[static_cast<std::size_t>(k)];
  if (!d || !s || !(s->rate > 0.0) || !(d->rate > 0.0)) return std::nullopt;
  RatioEstimate r;
  r.ratio = d->rate / s->rate;
  r.sigma = r.ratio * std::hypot(d->sigma / d->rate, s->sigma / s->rate);
  return r;
}

SourcePosterior source_posterior(int k, IntensityPair at, const SourceProbabilities& probs) {
  if (k < 0) throw InvalidInput("photon number must be nonnegative");
  const double vac = k == 0 ? probs.p0 : 0.0;
  const double dec = probs.p * poisson_pmf(at.decoy, k);
  const double sig = probs.p_prime * poisson_pmf(at.signal, k);
  const double total = vac + dec + sig;
  if (!(total > 0.0)) {
    throw InvalidInput(fmt::format("no source emits {}-photon pulses at these settings", k));
  }
  return {vac / total, dec / total, sig / total};
}

}  // namespace decoyqkd
