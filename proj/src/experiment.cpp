#include "decoyqkd/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/simulator.hpp"
#include "decoyqkd/tally_json.hpp"

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

double number_or(const json& obj, const char* key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::uint64_t count(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  // Large pulse counts are commonly written as 1e8.
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
  }
  throw InvalidInput(fmt::format("{}.{}: expected a nonnegative integer", where, key));
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_string()) throw InvalidInput(fmt::format("{}.{}: expected a string", where, key));
  return v.get<std::string>();
}

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidInput(fmt::format("record.{} = {} is outside [0, 1]", name, x));
  }
}

std::filesystem::path caption_path(const std::filesystem::path& csv) {
  std::filesystem::path out = csv;
  out.replace_filename(csv.stem().string() + "_caption" + csv.extension().string());
  return out;
}

void write_csv_file(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  write_sweep_csv(file, rows);
}

void report_rows(const std::vector<SweepRow>& rows, std::ostream& err) {
  for (const auto& r : rows) {
    if (r.status == RowStatus::PreconditionFailed) {
      err << fmt::format("warning: delta_m = {}: {}\n", r.delta_m, r.message);
    } else if (r.insecure()) {
      err << fmt::format("warning: delta_m = {}: no secure key\n", r.delta_m);
    }
  }
}

}  // namespace

void ExperimentRecord::validate() const {
  if (!(duration_s > 0.0)) throw InvalidInput("record.duration_s must be positive");
  if (!(repetition_hz > 0.0)) throw InvalidInput("record.repetition_hz must be positive");
  require_fraction(S, "S");
  require_fraction(S_prime, "S_prime");
  require_fraction(S0, "S0");
  require_fraction(qber_signal, "qber_signal");
  require_fraction(qber_decoy, "qber_decoy");
  require_fraction(p_prime, "fractions.p_prime");
  require_fraction(p, "fractions.p");
  require_fraction(p0, "fractions.p0");
  const double sum = p_prime + p + p0;
  if (std::abs(sum - 1.0) > kFractionSumTolerance) {
    throw InvalidInput(fmt::format("record.fractions sum to {}, not 1", sum));
  }
  if (!(mu > 0.0 && mu < mu_prime)) {
    throw InvalidInput("record needs 0 < mu < mu_prime");
  }
  if (delta_m.empty() && !zero_width) throw InvalidInput("record.delta_m is empty");
  for (double d : delta_m) {
    if (!(d >= 0.0 && d < 1.0)) {
      throw InvalidInput(fmt::format("record.delta_m entry {} is outside [0, 1)", d));
    }
  }
}

ObservedRates ExperimentRecord::rates() const {
  validate();
  const double sum = p_prime + p + p0;
  ObservedRates r;
  r.S = S;
  r.S_prime = S_prime;
  r.S0 = S0;
  r.p0 = p0 / sum;
  r.p = p / sum;
  r.p_prime = p_prime / sum;
  r.M = duration_s * repetition_hz;
  r.qber_signal = qber_signal;
  r.qber_decoy = qber_decoy;
  r.validate();
  return r;
}

ExperimentRecord experiment_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("record: expected a JSON object");
  ExperimentRecord r;
  r.name = doc.contains("name") ? string_field(doc, "name", "record") : std::string{};
  r.duration_s = number(doc, "duration_s", "record");
  r.repetition_hz = number(doc, "repetition_hz", "record");
  r.S = number(doc, "S", "record");
  r.S_prime = number(doc, "S_prime", "record");
  r.S0 = number(doc, "S0", "record");
  r.qber_signal = number(doc, "qber_signal", "record");
  r.qber_decoy = number(doc, "qber_decoy", "record");
  const json& fractions = member(doc, "fractions", "record");
  r.p_prime = number(fractions, "p_prime", "record.fractions");
  r.p = number(fractions, "p", "record.fractions");
  r.p0 = number(fractions, "p0", "record.fractions");
  r.mu = number(doc, "mu", "record");
  r.mu_prime = number(doc, "mu_prime", "record");
  if (doc.contains("zero_width")) {
    if (!doc["zero_width"].is_boolean()) throw InvalidInput("record.zero_width: expected a boolean");
    r.zero_width = doc["zero_width"].get<bool>();
  }
  if (doc.contains("delta_m")) {
    const json& list = doc["delta_m"];
    if (!list.is_array()) throw InvalidInput("record.delta_m: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_number()) {
        throw InvalidInput(fmt::format("record.delta_m[{}]: expected a number", i));
      }
      r.delta_m.push_back(list[i].get<double>());
    }
  }
  r.validate();
  return r;
}

json experiment_to_json(const ExperimentRecord& r) {
  json doc{{"name", r.name},
           {"duration_s", r.duration_s},
           {"repetition_hz", r.repetition_hz},
           {"S", r.S},
           {"S_prime", r.S_prime},
           {"S0", r.S0},
           {"qber_signal", r.qber_signal},
           {"qber_decoy", r.qber_decoy},
           {"fractions", {{"p_prime", r.p_prime}, {"p", r.p}, {"p0", r.p0}}},
           {"mu", r.mu},
           {"mu_prime", r.mu_prime},
           {"delta_m", r.delta_m}};
  if (r.zero_width) doc["zero_width"] = true;
  return doc;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InvalidInput(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InvalidInput(fmt::format("{}:{}:{}: malformed JSON", path.string(), line, column));
  }
}

ConventionChoice parse_convention_choice(const std::string& name) {
  if (name == "both") return ConventionChoice::Both;
  return parse_convention(name) == QberConvention::CaptionRatio ? ConventionChoice::Caption
                                                                : ConventionChoice::DarkCorrected;
}

std::vector<SweepRow> analyze_record(const ExperimentRecord& record, QberConvention convention) {
  const ObservedRates rates = record.rates();
  SweepSettings settings;
  settings.nominal = {record.mu, record.mu_prime};
  settings.repetition_rate = record.repetition_hz;
  settings.convention = convention;
  if (record.zero_width) return {errorfree_row(rates, settings)};
  return sweep_delta_m(rates, record.delta_m, settings);
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err) {
  const ExperimentRecord record = experiment_from_json(read_json_file(options.record));
  std::vector<QberConvention> conventions;
  if (options.convention != ConventionChoice::Caption) {
    conventions.push_back(QberConvention::DarkCountCorrected);
  }
  if (options.convention != ConventionChoice::DarkCorrected) {
    conventions.push_back(QberConvention::CaptionRatio);
  }
  if (!record.name.empty()) out << record.name << '\n';
  bool any_usable = false;
  for (const QberConvention c : conventions) {
    const std::vector<SweepRow> rows = analyze_record(record, c);
    for (const auto& r : rows) any_usable = any_usable || r.status != RowStatus::PreconditionFailed;
    out << sweep_table(rows, c);
    report_rows(rows, err);
    if (options.csv) {
      const bool secondary = options.convention == ConventionChoice::Both &&
                             c == QberConvention::CaptionRatio;
      write_csv_file(secondary ? caption_path(*options.csv) : *options.csv, rows);
    }
  }
  if (!any_usable) {
    err << "error: no row satisfies the coefficient ordering\n";
    return exit_code::kPrecondition;
  }
  return exit_code::kOk;
}

SimulationParams simulation_params_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("params: expected a JSON object");
  SimulationParams params;
  Scenario& s = params.scenario;
  s.pulses = count(doc, "pulses", "params");
  if (s.pulses == 0) throw InvalidInput("params.pulses must be positive");
  if (doc.contains("seed")) {
    s.seed = count(doc, "seed", "params");
    params.seed_given = true;
  }
  const json& probs = member(doc, "probabilities", "params");
  s.probs = {number(probs, "p0", "params.probabilities"), number(probs, "p", "params.probabilities"),
             number(probs, "p_prime", "params.probabilities")};
  s.probs.validate();
  const json& nominal = member(doc, "nominal", "params");
  s.nominal = {number(nominal, "mu", "params.nominal"), number(nominal, "mu_prime", "params.nominal")};
  s.dark_count_prob = number_or(doc, "dark_count_prob", "params", 0.0);

  const json& pattern = member(doc, "pattern", "params");
  const std::string pattern_kind = string_field(pattern, "kind", "params.pattern");
  if (pattern_kind == "two_block") {
    s.strength_fraction = number(pattern, "strength_fraction", "params.pattern");
    s.block_length = count(pattern, "block_length", "params.pattern");
    if (!(s.strength_fraction > 0.0 && s.strength_fraction < 1.0)) {
      throw InvalidInput("params.pattern.strength_fraction must be in (0, 1)");
    }
  } else if (pattern_kind != "exact") {
    throw InvalidInput(fmt::format("params.pattern.kind: unknown kind \"{}\"", pattern_kind));
  }

  const json& channel = member(doc, "channel", "params");
  const std::string channel_kind = string_field(channel, "kind", "params.channel");
  if (channel_kind == "linear") {
    s.channel = ScenarioChannel::Linear;
    s.transmittance = number(channel, "transmittance", "params.channel");
  } else if (channel_kind == "two_block_attack") {
    s.channel = ScenarioChannel::TwoBlockAttack;
    s.transmittance = number(channel, "eta_e", "params.channel");
  } else if (channel_kind == "block_transmittance") {
    s.channel = ScenarioChannel::RandomBlockTransmittance;
    const std::uint64_t L = count(channel, "block_length", "params.channel");
    if (pattern_kind == "two_block" && L != s.block_length) {
      throw InvalidInput("params.channel.block_length must match the pattern's");
    }
    s.block_length = L;
    const json& etas = member(channel, "transmittance", "params.channel");
    if (!etas.is_array() || etas.empty()) {
      throw InvalidInput("params.channel.transmittance: expected a nonempty array");
    }
    for (const auto& e : etas) {
      if (!e.is_number()) throw InvalidInput("params.channel.transmittance: expected numbers");
      s.block_transmittance.push_back(e.get<double>());
    }
  } else {
    throw InvalidInput(fmt::format("params.channel.kind: unknown kind \"{}\"", channel_kind));
  }
  s.channel_model();  // validates the channel parameters
  return params;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  SimulationParams params = simulation_params_from_json(read_json_file(options.params));
  Scenario& s = params.scenario;
  if (options.seed) s.seed = *options.seed;
  if (!options.seed && !params.seed_given) err << "warning: no seed given, using 0\n";

  SimulationConfig config;
  config.pulses = s.pulses;
  config.probs = s.probs;
  config.seed = s.seed;
  const SimTally tally = simulate(config, s.pattern(), s.channel_model());

  const json doc = tally_to_json(tally);
  if (options.tally_out) {
    std::ofstream file(*options.tally_out, std::ios::binary);
    if (!file) throw std::runtime_error(fmt::format("cannot write {}", options.tally_out->string()));
    file << doc.dump(2) << '\n';
  }

  const ObservedRates rates = tally.observed_rates();
  std::ostream& summary = options.tally_out ? out : err;
  if (!options.tally_out) out << doc.dump(2) << '\n';
  summary << fmt::format("M = {}  seed = {}  clicks = {}\n", tally.pulses, tally.seed, tally.clicks);
  summary << fmt::format("S  = {:.6g}\nS' = {:.6g}\nS0 = {:.6g}\n", rates.S, rates.S_prime, rates.S0);
  if (const auto ratio = subclass_rate_ratio(tally, 1)) {
    summary << fmt::format("s1/s'1 measured = {:.6f} +- {:.6f}\n", ratio->ratio, ratio->sigma);
  } else {
    summary << "s1/s'1 measured = n/a (no single-photon counts)\n";
  }
  if (s.channel == ScenarioChannel::TwoBlockAttack && s.strength_fraction > 0.0) {
    summary << fmt::format("s1/s'1 analytic = {:.6f}\n",
                           two_block_single_photon_ratio(s.nominal.decoy, s.nominal.signal,
                                                         s.strength_fraction));
  }
  return exit_code::kOk;
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  if (options.scenarios == 0) throw InvalidInput("--scenarios must be at least 1");
  const SuiteSummary summary =
      run_oracle_suite(options.scenarios, options.seed, options.pulses, options.sigma_allowance);
  if (options.verdicts) {
    std::ofstream file(*options.verdicts, std::ios::binary);
    if (!file) throw std::runtime_error(fmt::format("cannot write {}", options.verdicts->string()));
    write_verdict_lines(file, summary.results);
  } else {
    write_verdict_lines(out, summary.results);
  }
  std::uint64_t rejected = 0;
  for (const auto& r : summary.results) {
    if (r.status == ScenarioStatus::PreconditionRejected) {
      ++rejected;
      err << fmt::format("scenario {}: precondition rejected ({})\n", r.scenario_id, r.message);
    } else if (r.status == ScenarioStatus::Fail) {
      err << fmt::format("scenario {}: FAIL, slack {:.3g}\n", r.scenario_id, r.slack);
    }
  }
  err << fmt::format(
      "scenarios {}  passed {}  failed {}  precondition rejected {}  discarded draws {}\n",
      summary.results.size(), summary.passed, summary.failed, rejected, summary.rejected_draws);
  err << fmt::format("pass rate {:.1f}%  worst slack {:.4g}  worst sigma slack {:.3g}\n",
                     100.0 * summary.pass_rate(), summary.worst_slack, summary.worst_sigma_slack);
  if (summary.vacuum_misses > 0) {
    err << fmt::format("warning: {} runs outside the vacuum intervals\n", summary.vacuum_misses);
  }
  return summary.failed > 0 ? exit_code::kOracleFailure : exit_code::kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PreconditionViolation*>(&e)) return exit_code::kPrecondition;
  if (dynamic_cast<const InvalidInput*>(&e)) return exit_code::kParse;
  return 1;
}

}  // namespace decoyqkd
