#include "decoyqkd/source_json.hpp"

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

using nlohmann::json;

namespace {

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InvalidInput(fmt::format("{}: missing field \"{}\"", where, key));
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number()) throw InvalidInput(fmt::format("{}.{}: expected a number", where, key));
  return v.get<double>();
}

std::vector<double> number_array(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_array()) throw InvalidInput(fmt::format("{}.{}: expected an array", where, key));
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw InvalidInput(fmt::format("{}.{}[{}]: expected a number", where, key, i));
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

bool is_window(const json& src) { return src.is_object() && src.contains("mu_low"); }

}  // namespace

SourceBounds SourceSpec::resolve() const {
  if (const auto* w = std::get_if<Windows>(&value)) {
    return coherent_bounds(w->decoy, w->signal, w->cutoff);
  }
  return std::get<SourceBounds>(value);
}

SourceSpec source_spec_from_json(const json& doc) {
  const json& decoy = member(doc, "decoy", "source");
  const json& signal = member(doc, "signal", "source");
  if (is_window(decoy) != is_window(signal)) {
    throw InvalidInput("source: decoy and signal must use the same form (windows or arrays)");
  }
  if (is_window(decoy)) {
    SourceSpec::Windows w;
    w.decoy = {number(decoy, "mu_low", "decoy"), number(decoy, "mu_high", "decoy")};
    w.signal = {number(signal, "mu_low", "signal"), number(signal, "mu_high", "signal")};
    if (doc.contains("cutoff")) {
      if (!doc["cutoff"].is_number_integer()) {
        throw InvalidInput("source.cutoff: expected an integer");
      }
      w.cutoff = doc["cutoff"].get<int>();
    }
    w.decoy.validate();
    w.signal.validate();
    return {w};
  }
  SourceBounds b{
      BoundedDistribution(number_array(decoy, "lower", "decoy"),
                          number_array(decoy, "upper", "decoy")),
      BoundedDistribution(number_array(signal, "lower", "signal"),
                          number_array(signal, "upper", "signal")),
  };
  return {b};
}

json source_spec_to_json(const SourceSpec& spec) {
  if (const auto* w = std::get_if<SourceSpec::Windows>(&spec.value)) {
    return json{{"decoy", {{"mu_low", w->decoy.mu_low}, {"mu_high", w->decoy.mu_high}}},
                {"signal", {{"mu_low", w->signal.mu_low}, {"mu_high", w->signal.mu_high}}},
                {"cutoff", w->cutoff}};
  }
  const auto& b = std::get<SourceBounds>(spec.value);
  const auto arrays = [](const BoundedDistribution& d) {
    return json{{"lower", std::vector<double>(d.lower_coeffs().begin(), d.lower_coeffs().end())},
                {"upper", std::vector<double>(d.upper_coeffs().begin(), d.upper_coeffs().end())}};
  };
  return json{{"decoy", arrays(b.decoy)}, {"signal", arrays(b.signal)}};
}

}  // namespace decoyqkd
