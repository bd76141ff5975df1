#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "decoyqkd/photon_source.hpp"

namespace decoyqkd {

/// Source specification as exchanged in JSON documents. Either a pair of
/// coherent intensity windows:
///
///   {"decoy": {"mu_low": .., "mu_high": ..}, "signal": {..}, "cutoff": J}
///
/// or explicit coefficient bounds per source:
///
///   {"decoy": {"lower": [a_0^L, ..], "upper": [a_0^U, ..]}, "signal": {..}}
///
/// "cutoff" is optional for windows (0 or absent selects the default rule)
/// and ignored for explicit arrays.
struct SourceSpec {
  struct Windows {
    CoherentWindow decoy;
    CoherentWindow signal;
    int cutoff = 0;
  };
  std::variant<Windows, SourceBounds> value;

  SourceBounds resolve() const;
};

/// Throws InvalidInput with the offending field name on schema errors.
SourceSpec source_spec_from_json(const nlohmann::json& doc);
nlohmann::json source_spec_to_json(const SourceSpec& spec);

}  // namespace decoyqkd
