#pragma once

#include <json.hpp>

#include "decoyqkd/simulator.hpp"

namespace decoyqkd {

/// {"M":.., "seed":.., "probabilities": {"p0","p","p_prime"},
///  "counts": {"vacuum":[..], "decoy":[..], "signal":[..]},
///  "emitted": {..same..}, "clicks":.., "ground_truth": {..}}
///
/// Arrays are indexed by photon number. "ground_truth" is omitted when the
/// tally carries no posterior sums.
nlohmann::json tally_to_json(const SimTally& tally);

/// Throws InvalidInput on missing fields or inconsistent counts.
SimTally tally_from_json(const nlohmann::json& doc);

}  // namespace decoyqkd
