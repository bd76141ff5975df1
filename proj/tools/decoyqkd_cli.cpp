// decoyqkd analyze|simulate|verify. Exit codes: 0 ok, 2 parse or invalid
// input, 3 precondition violation, 4 oracle failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "decoyqkd/errors.hpp"
#include "decoyqkd/experiment.hpp"

int main(int argc, char** argv) {
  using namespace decoyqkd;

  CLI::App app{"Decoy-state QKD bounds with intensity errors"};
  app.require_subcommand(1);

  AnalyzeOptions analyze;
  std::string convention = "darkcorrected";
  std::string analyze_csv;
  auto* analyze_cmd = app.add_subcommand("analyze", "Key rate sweep for an experiment record");
  analyze_cmd->add_option("record", analyze.record, "Record JSON")->required();
  analyze_cmd->add_option("--convention", convention, "Single-photon QBER estimate")
      ->check(CLI::IsMember({"caption", "darkcorrected", "both"}));
  analyze_cmd->add_option("--csv", analyze_csv, "Also write the sweep as CSV");

  SimulateOptions simulate;
  std::uint64_t sim_seed = 0;
  std::string tally_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run from a parameter file");
  simulate_cmd->add_option("--params", simulate.params, "Parameter JSON")->required();
  auto* seed_opt = simulate_cmd->add_option("--seed", sim_seed, "Overrides the file's seed");
  simulate_cmd->add_option("--tally", tally_out, "Write the tally JSON here instead of stdout");

  VerifyOptions verify;
  std::string verdicts;
  auto* verify_cmd = app.add_subcommand("verify", "Randomized safety check against ground truth");
  verify_cmd->add_option("--scenarios", verify.scenarios, "Scenario count")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify.seed, "Scenario draw seed");
  verify_cmd->add_option("--pulses", verify.pulses, "Pulses per scenario")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--sigma", verify.sigma_allowance, "Noise allowance in sigma");
  verify_cmd->add_option("--verdicts", verdicts, "Write JSON verdict lines here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kOk : exit_code::kParse;
  }

  try {
    if (*analyze_cmd) {
      analyze.convention = parse_convention_choice(convention);
      if (!analyze_csv.empty()) analyze.csv = analyze_csv;
      return cmd_analyze(analyze, std::cout, std::cerr);
    }
    if (*simulate_cmd) {
      if (*seed_opt) simulate.seed = sim_seed;
      if (!tally_out.empty()) simulate.tally_out = tally_out;
      return cmd_simulate(simulate, std::cout, std::cerr);
    }
    if (!verdicts.empty()) verify.verdicts = verdicts;
    return cmd_verify(verify, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
