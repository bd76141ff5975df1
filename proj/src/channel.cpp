#include "decoyqkd/channel.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidInput(fmt::format("{} = {} is not a probability", what, x));
  }
}

double threshold_click(double eta, int k, double dark) {
  return 1.0 - std::pow(1.0 - eta, k) * (1.0 - dark);
}

}  // namespace

ChannelModel::ChannelModel(Kind kind, double dark) : kind_(std::move(kind)), dark_(dark) {
  require_probability(dark_, "dark count probability");
}

ChannelModel ChannelModel::linear(double transmittance, double dark_count_prob) {
  require_probability(transmittance, "transmittance");
  return ChannelModel(Linear{transmittance}, dark_count_prob);
}

ChannelModel ChannelModel::block_transmittance(std::uint64_t block_length,
                                               std::vector<double> transmittance,
                                               double dark_count_prob) {
  if (block_length == 0 || transmittance.empty()) {
    throw InvalidInput("block transmittance needs a positive block length and values");
  }
  for (double t : transmittance) require_probability(t, "block transmittance");
  return ChannelModel(BlockTransmittance{block_length, std::move(transmittance)},
                      dark_count_prob);
}

ChannelModel ChannelModel::custom(
    std::function<double(std::uint64_t, int, const ErrorPattern&)> click_probability,
    double dark_count_prob) {
  if (!click_probability) throw InvalidInput("custom channel needs a callback");
  return ChannelModel(Custom{std::move(click_probability)}, dark_count_prob);
}

ChannelModel ChannelModel::block_attack(BlockAttack attack, double dark_count_prob) {
  if (!(attack.eta_e >= 0.0 && 2.0 * attack.eta_e <= 1.0)) {
    throw InvalidInput(
        fmt::format("attack transmittance scale {} needs 0 <= 2 eta_e <= 1", attack.eta_e));
  }
  return ChannelModel(attack, dark_count_prob);
}

double ChannelModel::click_probability(std::uint64_t i, int k, const ErrorPattern& pattern) const {
  if (const auto* c = std::get_if<Custom>(&kind_)) {
    const double p = c->click_probability(i, k, pattern);
    require_probability(p, "custom click probability");
    return p;
  }
  double eta = 0.0;
  if (const auto* l = std::get_if<Linear>(&kind_)) {
    eta = l->transmittance;
  } else if (const auto* a = std::get_if<BlockAttack>(&kind_)) {
    eta = pattern.is_strengthened(i) ? 2.0 * a->eta_e : 0.0;
  } else {
    const auto& b = std::get<BlockTransmittance>(kind_);
    eta = b.transmittance[(i / b.block_length) % b.transmittance.size()];
  }
  return threshold_click(eta, k, dark_);
}

std::optional<BlockStructure> ChannelModel::block_structure(const ErrorPattern& pattern) const {
  if (std::holds_alternative<Linear>(kind_)) return BlockStructure{1, 1};
  if (std::holds_alternative<BlockAttack>(kind_)) return pattern.block_structure();
  if (const auto* b = std::get_if<BlockTransmittance>(&kind_)) {
    return BlockStructure{b->block_length, static_cast<std::uint32_t>(b->transmittance.size())};
  }
  return std::nullopt;
}

ChannelModel two_block_attack_channel(double mu, double mu_prime, double f, double eta_e,
                                      double dark_count_prob) {
  if (!(mu > 0.0) || !(mu_prime > 0.0)) throw InvalidInput("intensities must be positive");
  if (!(f > 0.0 && f < 1.0)) {
    throw InvalidInput(fmt::format("strength fraction {} outside (0, 1)", f));
  }
  if (!(eta_e >= 0.0 && 2.0 * eta_e <= 1.0)) {
    throw InvalidInput(fmt::format("attack transmittance scale {} needs 0 <= 2 eta_e <= 1", eta_e));
  }
  return ChannelModel::block_attack({eta_e, {mu, mu_prime}, f}, dark_count_prob);
}

double two_block_single_photon_ratio(double mu, double mu_prime, double f) {
  if (!(f >= 0.0 && f < 1.0)) throw InvalidInput("strength fraction outside [0, 1)");
  const double odds = (1.0 + f) / (1.0 - f);
  return (std::exp(2.0 * f * mu_prime) + odds) / (std::exp(2.0 * f * mu) + odds);
}

}  // namespace decoyqkd
