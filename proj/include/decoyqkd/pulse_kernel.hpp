#pragma once

// Tabulated per-pulse simulation kernels.
//
// A pulse needs three uniform 32-bit draws (source, photon number, click)
// which come from one Philox call keyed by the pulse index. All decisions are
// integer comparisons of a draw against a threshold in [0, 2^32], so the
// scalar and SIMD kernels agree bit for bit:
//
//   source:  u0 < vacuum_cut -> vacuum, u0 < decoy_cut -> decoy, else signal
//   photons: k = #{ j : u1 > photon_cut[j] }     (photon_cut[j] = C_j - 1)
//   click:   u2 < click_cut[k]
//
// Classes capture every slot-dependent parameter; slot i uses class
// (i / block_length) % period.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "decoyqkd/channel.hpp"
#include "decoyqkd/error_pattern.hpp"
#include "decoyqkd/philox.hpp"

namespace decoyqkd {

/// Photon-number bins tracked by the simulator; the last bin collects
/// every pulse with kPhotonBins - 1 or more photons.
inline constexpr int kPhotonBins = 24;
inline constexpr int kSourceCount = 3;

enum class Source : std::uint8_t { Vacuum = 0, Decoy = 1, Signal = 2 };

/// Threshold for an event of probability `prob`: round(prob * 2^32).
std::int64_t probability_cut(double prob);

/// photon_cut[j] for a Poisson source of intensity mu.
std::array<std::int64_t, kPhotonBins - 1> poisson_photon_cuts(double mu);

/// Cuts that always yield k = 0 (the vacuum source).
std::array<std::int64_t, kPhotonBins - 1> vacuum_photon_cuts();

struct ClassTable {
  IntensityPair intensity;
  std::array<std::array<std::int64_t, kPhotonBins - 1>, 2> photon_cut;  ///< [decoy, signal]
  std::array<std::int64_t, kPhotonBins> click_cut;
};

struct KernelPlan {
  philox::Key key{};
  std::int64_t vacuum_cut = 0;
  std::int64_t decoy_cut = 0;
  std::uint64_t block_length = 1;
  std::uint32_t period = 1;
  std::vector<ClassTable> classes;

  std::uint32_t class_of(std::uint64_t i) const {
    return static_cast<std::uint32_t>((i / block_length) % period);
  }
};

/// Emission and detection histograms per pulse class.
struct ClassCounts {
  using Histogram = std::array<std::array<std::uint64_t, kPhotonBins>, kSourceCount>;
  std::vector<Histogram> emitted;
  std::vector<Histogram> detected;

  explicit ClassCounts(std::size_t classes = 0) : emitted(classes), detected(classes) {}
  void merge(const ClassCounts& other);
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Source selection cuts shared by the reference path and the plan.
std::pair<std::int64_t, std::int64_t> source_cuts(double p0, double p);

/// Builds the class tables for a block-structured pattern and channel, or
/// returns an empty plan (no classes) when they have no common structure.
KernelPlan build_kernel_plan(const ErrorPattern& pattern, const ChannelModel& channel,
                             double p0, double p, std::uint64_t seed, std::uint64_t pulses);

/// Draws pulses [begin, end) and adds them to `counts`.
void run_pulses_scalar(const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                       ClassCounts& counts);
/// AVX2 variant; must only be called when avx2_kernel_available().
void run_pulses_avx2(const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                     ClassCounts& counts);

enum class KernelIsa { Scalar, Avx2 };

/// Compiled in and supported by the running CPU.
bool avx2_kernel_available();

/// Widest available kernel, overridable with DECOYQKD_KERNEL=scalar|avx2.
KernelIsa default_kernel_isa();
std::string_view to_string(KernelIsa isa);

void run_pulses(KernelIsa isa, const KernelPlan& plan, std::uint64_t begin, std::uint64_t end,
                ClassCounts& counts);

}  // namespace decoyqkd
