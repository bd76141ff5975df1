#include "decoyqkd/pulse_kernel.hpp"

namespace decoyqkd {

void run_pulses_scalar(const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                       ClassCounts& counts) {
  for (std::uint64_t i = begin; i < end; ++i) {
    const auto u = philox::pulse_draws(i, plan.key);
    const std::uint32_t c = plan.class_of(i);
    const ClassTable& t = plan.classes[c];
    const std::int64_t u0 = u[0];
    const std::int64_t u1 = u[1];
    const std::int64_t u2 = u[2];
    const int src = u0 < plan.vacuum_cut ? 0 : (u0 < plan.decoy_cut ? 1 : 2);
    int k = 0;
    if (src != 0) {
      const auto& cuts = t.photon_cut[static_cast<std::size_t>(src - 1)];
      while (k < kPhotonBins - 1 && u1 > cuts[static_cast<std::size_t>(k)]) ++k;
    }
    ++counts.emitted[c][src][k];
    if (u2 < t.click_cut[static_cast<std::size_t>(k)]) ++counts.detected[c][src][k];
  }
}

}  // namespace decoyqkd
