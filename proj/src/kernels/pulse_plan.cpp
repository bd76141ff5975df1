#include <algorithm>
#include <cmath>
#include <numeric>

#include "decoyqkd/photon_source.hpp"
#include "decoyqkd/pulse_kernel.hpp"

namespace decoyqkd {

namespace {

constexpr std::int64_t kFullScale = std::int64_t{1} << 32;
constexpr std::uint32_t kMaxClasses = 4096;

}  // namespace

std::int64_t probability_cut(double prob) {
  const auto cut = std::llround(std::ldexp(prob, 32));
  return std::clamp<std::int64_t>(cut, 0, kFullScale);
}

std::array<std::int64_t, kPhotonBins - 1> poisson_photon_cuts(double mu) {
  std::array<std::int64_t, kPhotonBins - 1> cuts{};
  double cdf = 0.0;
  for (int j = 0; j < kPhotonBins - 1; ++j) {
    cdf += poisson_pmf(mu, j);
    cuts[static_cast<std::size_t>(j)] = probability_cut(std::min(cdf, 1.0)) - 1;
  }
  return cuts;
}

std::array<std::int64_t, kPhotonBins - 1> vacuum_photon_cuts() {
  std::array<std::int64_t, kPhotonBins - 1> cuts{};
  cuts.fill(kFullScale - 1);
  return cuts;
}

std::pair<std::int64_t, std::int64_t> source_cuts(double p0, double p) {
  return {probability_cut(p0), probability_cut(p0 + p)};
}

void ClassCounts::merge(const ClassCounts& other) {
  if (emitted.size() < other.emitted.size()) {
    emitted.resize(other.emitted.size());
    detected.resize(other.detected.size());
  }
  for (std::size_t c = 0; c < other.emitted.size(); ++c) {
    for (int s = 0; s < kSourceCount; ++s) {
      for (int k = 0; k < kPhotonBins; ++k) {
        emitted[c][s][k] += other.emitted[c][s][k];
        detected[c][s][k] += other.detected[c][s][k];
      }
    }
  }
}

KernelPlan build_kernel_plan(const ErrorPattern& pattern, const ChannelModel& channel,
                             double p0, double p, std::uint64_t seed, std::uint64_t pulses) {
  KernelPlan plan;
  const auto ps = pattern.block_structure();
  const auto cs = channel.block_structure(pattern);
  if (!ps || !cs) return plan;
  BlockStructure s;
  if (ps->period == 1) {
    s = *cs;
  } else if (cs->period == 1 || ps->block_length == cs->block_length) {
    s = {ps->block_length, std::lcm(ps->period, cs->period)};
  } else {
    return plan;
  }
  if (s.period > kMaxClasses) return plan;

  plan.key = philox::key_from_seed(seed);
  std::tie(plan.vacuum_cut, plan.decoy_cut) = source_cuts(p0, p);
  plan.block_length = s.block_length;
  plan.period = s.period;
  plan.classes.reserve(s.period);
  for (std::uint32_t c = 0; c < s.period; ++c) {
    const std::uint64_t slot = c * s.block_length;
    if (slot >= pulses) {
      // Class never reached in this run.
      plan.classes.push_back(plan.classes.front());
      continue;
    }
    ClassTable t;
    t.intensity = pattern.intensity(slot);
    t.photon_cut[0] = poisson_photon_cuts(t.intensity.decoy);
    t.photon_cut[1] = poisson_photon_cuts(t.intensity.signal);
    for (int k = 0; k < kPhotonBins; ++k) {
      t.click_cut[static_cast<std::size_t>(k)] =
          probability_cut(channel.click_probability(slot, k, pattern));
    }
    plan.classes.push_back(t);
  }
  return plan;
}

}  // namespace decoyqkd
