#include "decoyqkd/error_pattern.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(IntensityPair p, const char* what) {
  if (!(p.decoy > 0.0) || !(p.signal > 0.0) || !std::isfinite(p.decoy) ||
      !std::isfinite(p.signal)) {
    throw InvalidInput(fmt::format("{} intensities must be positive ({}, {})", what, p.decoy,
                                   p.signal));
  }
}

}  // namespace

ErrorPattern::ErrorPattern(Kind kind, IntensityPair nominal, std::uint64_t pulses)
    : kind_(std::move(kind)), nominal_(nominal), pulses_(pulses) {}

ErrorPattern ErrorPattern::exact(IntensityPair nominal, std::uint64_t pulses) {
  require_positive(nominal, "nominal");
  return ErrorPattern(Exact{}, nominal, pulses);
}

ErrorPattern ErrorPattern::two_block(IntensityPair nominal, double strength_fraction,
                                     std::uint64_t block_length, std::uint64_t pulses) {
  require_positive(nominal, "nominal");
  if (!(strength_fraction >= 0.0 && strength_fraction < 1.0)) {
    throw InvalidInput(
        fmt::format("block strength fraction must be in [0, 1), got {}", strength_fraction));
  }
  if (block_length == 0) throw InvalidInput("block length must be positive");
  return ErrorPattern(TwoBlock{strength_fraction, block_length}, nominal, pulses);
}

ErrorPattern ErrorPattern::per_pulse(std::vector<IntensityPair> intensities) {
  if (intensities.empty()) throw InvalidInput("per-pulse intensity list is empty");
  IntensityPair mean{};
  for (const auto& p : intensities) {
    require_positive(p, "per-pulse");
    mean.decoy += p.decoy;
    mean.signal += p.signal;
  }
  const auto n = static_cast<double>(intensities.size());
  mean.decoy /= n;
  mean.signal /= n;
  const auto pulses = static_cast<std::uint64_t>(intensities.size());
  return ErrorPattern(PerPulseList{std::move(intensities)}, mean, pulses);
}

ErrorPattern ErrorPattern::custom(IntensityPair nominal, std::uint64_t pulses,
                                  std::function<IntensityPair(std::uint64_t)> intensity) {
  require_positive(nominal, "nominal");
  if (!intensity) throw InvalidInput("custom pattern needs an intensity callback");
  return ErrorPattern(Custom{std::move(intensity)}, nominal, pulses);
}

IntensityPair ErrorPattern::intensity(std::uint64_t i) const {
  if (i >= pulses_) {
    throw std::out_of_range(fmt::format("pulse index {} out of range (M = {})", i, pulses_));
  }
  return std::visit(
      overloaded{
          [&](const Exact&) { return nominal_; },
          [&](const TwoBlock& b) {
            const double scale = (i / b.block_length) % 2 == 0 ? 1.0 + b.strength_fraction
                                                               : 1.0 - b.strength_fraction;
            return IntensityPair{nominal_.decoy * scale, nominal_.signal * scale};
          },
          [&](const PerPulseList& l) { return l.intensities[i]; },
          [&](const Custom& c) { return c.intensity(i); },
      },
      kind_);
}

bool ErrorPattern::is_strengthened(std::uint64_t i) const {
  if (const auto* b = std::get_if<TwoBlock>(&kind_)) {
    if (i >= pulses_) throw std::out_of_range("pulse index out of range");
    return (i / b->block_length) % 2 == 0;
  }
  return intensity(i).signal > nominal_.signal;
}

std::optional<BlockStructure> ErrorPattern::block_structure() const {
  if (std::holds_alternative<Exact>(kind_)) return BlockStructure{1, 1};
  if (const auto* b = std::get_if<TwoBlock>(&kind_)) return BlockStructure{b->block_length, 2};
  return std::nullopt;
}

IntensityPair ErrorPattern::class_intensity(std::uint32_t c) const {
  if (std::holds_alternative<Exact>(kind_)) return nominal_;
  if (const auto* b = std::get_if<TwoBlock>(&kind_)) {
    const double scale = c % 2 == 0 ? 1.0 + b->strength_fraction : 1.0 - b->strength_fraction;
    return {nominal_.decoy * scale, nominal_.signal * scale};
  }
  throw std::logic_error("pattern has no block structure");
}

void ErrorPattern::validate_against(const CoherentWindow& decoy,
                                    const CoherentWindow& signal) const {
  decoy.validate();
  signal.validate();
  const auto check = [&](IntensityPair p, std::uint64_t i) {
    if (!decoy.contains(p.decoy) || !signal.contains(p.signal)) {
      throw InvalidInput(fmt::format(
          "pulse {}: intensities ({}, {}) outside claimed windows [{}, {}] / [{}, {}]", i,
          p.decoy, p.signal, decoy.mu_low, decoy.mu_high, signal.mu_low, signal.mu_high));
    }
  };
  if (auto blocks = block_structure()) {
    const std::uint64_t classes = std::min<std::uint64_t>(
        blocks->period, (pulses_ + blocks->block_length - 1) / blocks->block_length);
    for (std::uint32_t c = 0; c < classes; ++c) check(class_intensity(c), c * blocks->block_length);
    return;
  }
  for (std::uint64_t i = 0; i < pulses_; ++i) check(intensity(i), i);
}

}  // namespace decoyqkd
