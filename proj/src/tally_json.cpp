#include "decoyqkd/tally_json.hpp"

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

using nlohmann::json;

namespace {

constexpr const char* kSourceNames[kSourceCount] = {"vacuum", "decoy", "signal"};

json histogram_json(const SimTally::Histogram& h) {
  json out = json::object();
  for (int s = 0; s < kSourceCount; ++s) out[kSourceNames[s]] = h[static_cast<std::size_t>(s)];
  return out;
}

const json& field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InvalidInput(fmt::format("tally{}: missing field \"{}\"", where, key));
  }
  return obj.at(key);
}

template <typename T>
std::array<T, kPhotonBins> bins(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() > kPhotonBins) {
    throw InvalidInput(fmt::format("tally {}: expected an array of at most {} numbers", where,
                                   kPhotonBins));
  }
  std::array<T, kPhotonBins> out{};
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) throw InvalidInput(fmt::format("tally {}[{}]: not a number", where, k));
    out[k] = arr[k].get<T>();
  }
  return out;
}

SimTally::Histogram histogram_from(const json& obj, const char* what) {
  SimTally::Histogram h{};
  for (int s = 0; s < kSourceCount; ++s) {
    h[static_cast<std::size_t>(s)] = bins<std::uint64_t>(
        field(obj, kSourceNames[s], what), fmt::format("{}.{}", what, kSourceNames[s]));
  }
  return h;
}

}  // namespace

json tally_to_json(const SimTally& tally) {
  json out{{"M", tally.pulses},
           {"seed", tally.seed},
           {"probabilities",
            {{"p0", tally.probs.p0}, {"p", tally.probs.p}, {"p_prime", tally.probs.p_prime}}},
           {"counts", histogram_json(tally.detected)},
           {"emitted", histogram_json(tally.emitted)},
           {"clicks", tally.clicks}};
  if (tally.truth) {
    out["ground_truth"] = {{"weight", tally.truth->weight},
                           {"posterior_vacuum", tally.truth->posterior_vacuum},
                           {"posterior_decoy", tally.truth->posterior_decoy},
                           {"posterior_signal", tally.truth->posterior_signal}};
  }
  return out;
}

SimTally tally_from_json(const json& doc) {
  SimTally t;
  t.pulses = field(doc, "M", "").get<std::uint64_t>();
  t.seed = field(doc, "seed", "").get<std::uint64_t>();
  const json& probs = field(doc, "probabilities", "");
  t.probs = {field(probs, "p0", ".probabilities").get<double>(),
             field(probs, "p", ".probabilities").get<double>(),
             field(probs, "p_prime", ".probabilities").get<double>()};
  t.probs.validate();
  t.detected = histogram_from(field(doc, "counts", ""), "counts");
  t.emitted = histogram_from(field(doc, "emitted", ""), "emitted");
  std::uint64_t total_emitted = 0;
  std::uint64_t total_detected = 0;
  for (std::size_t s = 0; s < kSourceCount; ++s) {
    for (std::size_t k = 0; k < kPhotonBins; ++k) {
      if (t.detected[s][k] > t.emitted[s][k]) {
        throw InvalidInput(fmt::format("tally: more counts than emissions for {} k = {}",
                                       kSourceNames[s], k));
      }
      total_emitted += t.emitted[s][k];
      total_detected += t.detected[s][k];
    }
  }
  if (total_emitted != t.pulses) throw InvalidInput("tally: emissions do not sum to M");
  t.clicks = doc.contains("clicks") ? doc["clicks"].get<std::uint64_t>() : total_detected;
  if (t.clicks != total_detected) throw InvalidInput("tally: clicks do not match counts");
  if (doc.contains("ground_truth")) {
    const json& g = doc["ground_truth"];
    GroundTruthSums sums;
    sums.weight = bins<double>(field(g, "weight", ".ground_truth"), "ground_truth.weight");
    sums.posterior_vacuum = bins<double>(field(g, "posterior_vacuum", ".ground_truth"),
                                         "ground_truth.posterior_vacuum");
    sums.posterior_decoy = bins<double>(field(g, "posterior_decoy", ".ground_truth"),
                                        "ground_truth.posterior_decoy");
    sums.posterior_signal = bins<double>(field(g, "posterior_signal", ".ground_truth"),
                                         "ground_truth.posterior_signal");
    t.truth = sums;
  }
  return t;
}

}  // namespace decoyqkd
