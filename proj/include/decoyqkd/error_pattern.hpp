#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "decoyqkd/photon_source.hpp"

namespace decoyqkd {

/// True intensities of the decoy and signal emission at one pulse slot.
struct IntensityPair {
  double decoy = 0.0;
  double signal = 0.0;
  friend bool operator==(const IntensityPair&, const IntensityPair&) = default;
};

/// Periodic block structure of a pattern: slot i belongs to class
/// (i / block_length) % period.
struct BlockStructure {
  std::uint64_t block_length = 1;
  std::uint32_t period = 1;
};

/// Per-pulse assignment of true source intensities. The adversary is assumed
/// to know it exactly.
class ErrorPattern {
 public:
  struct Exact {};
  /// Blocks of `block_length` slots alternate between (1 + f) and (1 - f)
  /// times nominal, even blocks strengthened, same sign for both sources.
  struct TwoBlock {
    double strength_fraction = 0.0;
    std::uint64_t block_length = 1;
  };
  struct PerPulseList {
    std::vector<IntensityPair> intensities;
  };
  struct Custom {
    std::function<IntensityPair(std::uint64_t)> intensity;
  };
  using Kind = std::variant<Exact, TwoBlock, PerPulseList, Custom>;

  static ErrorPattern exact(IntensityPair nominal, std::uint64_t pulses);
  static ErrorPattern two_block(IntensityPair nominal, double strength_fraction,
                                std::uint64_t block_length, std::uint64_t pulses);
  /// Nominal intensities are taken as the mean of the list.
  static ErrorPattern per_pulse(std::vector<IntensityPair> intensities);
  static ErrorPattern custom(IntensityPair nominal, std::uint64_t pulses,
                             std::function<IntensityPair(std::uint64_t)> intensity);

  /// Throws std::out_of_range when i >= pulse_count().
  IntensityPair intensity(std::uint64_t i) const;
  /// True for slots the pattern drives above nominal. For TwoBlock this is
  /// the even blocks; otherwise the signal intensity exceeds nominal.
  bool is_strengthened(std::uint64_t i) const;

  std::uint64_t pulse_count() const { return pulses_; }
  IntensityPair nominal() const { return nominal_; }
  const Kind& kind() const { return kind_; }

  /// Set when intensity(i) depends only on the block class of i.
  std::optional<BlockStructure> block_structure() const;
  /// Intensities of block class c; requires block_structure().
  IntensityPair class_intensity(std::uint32_t c) const;

  /// Throws InvalidInput if any slot's intensity falls outside the windows
  /// claimed for its source.
  void validate_against(const CoherentWindow& decoy, const CoherentWindow& signal) const;

 private:
  ErrorPattern(Kind kind, IntensityPair nominal, std::uint64_t pulses);

  Kind kind_;
  IntensityPair nominal_;
  std::uint64_t pulses_ = 0;
};

/// Intensity pair applied at slot i.
inline IntensityPair pattern_intensity(const ErrorPattern& pattern, std::uint64_t i) {
  return pattern.intensity(i);
}

}  // namespace decoyqkd
