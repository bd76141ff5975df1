#pragma once

// Experiment records and the three batch commands behind the CLI. Commands
// write to the given streams and return the process exit code; parse and
// validation problems surface as InvalidInput, failed orderings as
// PreconditionViolation (see exit_code_for).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoyqkd/bounds.hpp"
#include "decoyqkd/key_rate.hpp"
#include "decoyqkd/oracle.hpp"

namespace decoyqkd {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kParse = 2;
inline constexpr int kPrecondition = 3;
inline constexpr int kOracleFailure = 4;
}  // namespace exit_code

/// Rounded published fractions may miss 1 by a few 1e-6.
inline constexpr double kFractionSumTolerance = 5e-5;

struct ExperimentRecord {
  std::string name;
  double duration_s = 0.0;
  double repetition_hz = 0.0;
  double S = 0.0;
  double S_prime = 0.0;
  double S0 = 0.0;
  double qber_signal = 0.0;
  double qber_decoy = 0.0;
  double p_prime = 0.0;
  double p = 0.0;
  double p0 = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
  std::vector<double> delta_m;
  bool zero_width = false;  ///< sources claimed exact: single error-free row

  void validate() const;
  /// Fractions renormalized to sum to 1, M = duration * repetition rate.
  ObservedRates rates() const;
};

ExperimentRecord experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const ExperimentRecord& record);

/// Reads and parses a JSON file; syntax errors name the line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);

enum class ConventionChoice { Caption, DarkCorrected, Both };
ConventionChoice parse_convention_choice(const std::string& name);

/// Rows for one record under one convention.
std::vector<SweepRow> analyze_record(const ExperimentRecord& record, QberConvention convention);

struct AnalyzeOptions {
  std::filesystem::path record;
  ConventionChoice convention = ConventionChoice::DarkCorrected;
  std::optional<std::filesystem::path> csv;
};

/// With Both, the dark-corrected CSV goes to the given path and the caption
/// one next to it as <stem>_caption<ext>.
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);

/// Simulation parameters:
/// {"pulses", "seed"?, "probabilities": {"p0","p","p_prime"},
///  "nominal": {"mu","mu_prime"},
///  "pattern": {"kind": "exact"} | {"kind": "two_block", "strength_fraction", "block_length"},
///  "channel": {"kind": "linear", "transmittance"}
///           | {"kind": "two_block_attack", "eta_e"}
///           | {"kind": "block_transmittance", "block_length", "transmittance": [...]},
///  "dark_count_prob"?}
struct SimulationParams {
  Scenario scenario;  ///< id unused; window_delta unused
  bool seed_given = false;
};

SimulationParams simulation_params_from_json(const nlohmann::json& doc);

struct SimulateOptions {
  std::filesystem::path params;
  std::optional<std::uint64_t> seed;  ///< overrides the params file
  std::optional<std::filesystem::path> tally_out;  ///< tally JSON; stdout when absent
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::uint64_t scenarios = 100;
  std::uint64_t seed = 1;
  std::uint64_t pulses = 10'000'000;
  double sigma_allowance = 4.0;
  std::optional<std::filesystem::path> verdicts;  ///< JSON lines, one per scenario
};

/// Exit 4 when any error-tolerant bound check fails.
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

/// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

}  // namespace decoyqkd
