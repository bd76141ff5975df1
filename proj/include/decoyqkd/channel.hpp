#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "decoyqkd/error_pattern.hpp"

namespace decoyqkd {

/// Bob-side channel plus threshold detector. Photons are transmitted
/// independently; the detector clicks when at least one arrives or a dark
/// count fires:
///
///   P(click | k) = 1 - (1 - eta_i)^k (1 - dark)
///
/// where eta_i is the transmittance the channel applies at slot i.
class ChannelModel {
 public:
  struct Linear {
    double transmittance = 0.0;
  };
  /// Eavesdropper with knowledge of the error pattern: transmittance
  /// 2 eta_e on strengthened slots, 0 (blocked) on all others.
  struct BlockAttack {
    double eta_e = 0.0;
    IntensityPair nominal;
    double strength_fraction = 0.0;
  };
  /// Transmittance transmittance[(i / block_length) % n].
  struct BlockTransmittance {
    std::uint64_t block_length = 1;
    std::vector<double> transmittance;
  };
  /// Arbitrary click probability (slot, photon number, pattern); the dark
  /// count probability is not added on top.
  struct Custom {
    std::function<double(std::uint64_t, int, const ErrorPattern&)> click_probability;
  };
  using Kind = std::variant<Linear, BlockAttack, BlockTransmittance, Custom>;

  static ChannelModel linear(double transmittance, double dark_count_prob = 0.0);
  static ChannelModel block_transmittance(std::uint64_t block_length,
                                          std::vector<double> transmittance,
                                          double dark_count_prob = 0.0);
  static ChannelModel custom(
      std::function<double(std::uint64_t, int, const ErrorPattern&)> click_probability,
      double dark_count_prob = 0.0);
  /// Prefer two_block_attack_channel, which validates its parameters.
  static ChannelModel block_attack(BlockAttack attack, double dark_count_prob = 0.0);

  double click_probability(std::uint64_t i, int k, const ErrorPattern& pattern) const;
  double dark_count_probability() const { return dark_; }
  const Kind& kind() const { return kind_; }

  /// Block structure of the click probabilities when run against `pattern`,
  /// or nullopt when they may vary from slot to slot.
  std::optional<BlockStructure> block_structure(const ErrorPattern& pattern) const;

 private:
  ChannelModel(Kind kind, double dark);

  Kind kind_;
  double dark_ = 0.0;
};

/// Two-block collective-error attack for nominal intensities (mu, mu') and
/// block strength fraction f. Requires 0 < f < 1 and 0 <= 2 eta_e <= 1.
ChannelModel two_block_attack_channel(double mu, double mu_prime, double f, double eta_e,
                                      double dark_count_prob = 0.0);

/// Expected s_1 / s'_1 under that attack with equal numbers of strengthened
/// and weakened slots and no dark counts:
/// (e^{2 f mu'} + (1+f)/(1-f)) / (e^{2 f mu} + (1+f)/(1-f)).
double two_block_single_photon_ratio(double mu, double mu_prime, double f);

}  // namespace decoyqkd
