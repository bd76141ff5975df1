#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "decoyqkd/bounds.hpp"
#include "decoyqkd/error_pattern.hpp"

namespace decoyqkd {

/// Shannon binary entropy in bits; H(0) = H(1) = 0. Throws InvalidInput
/// outside [0, 1].
double binary_entropy(double x);

/// Inputs of the asymptotic key-rate formula for the signal source.
struct KeyRateInput {
  double delta1_signal = 0.0;
  double qber_total = 0.0;
  double qber_single = 0.0;
  double repetition_rate = 0.0;  ///< pulses per second
  double p_prime = 0.0;
  double S_prime = 0.0;

  void validate() const;
};

/// R_s = delta1 [1 - H(t1)] - f H(t) in bits per signal count. `ec_efficiency`
/// multiplies H(t) and defaults to the ideal 1. The result may be negative.
double key_rate_per_count(double delta1, double t1, double t, double ec_efficiency = 1.0);

/// max(R_s, 0); the value to quote when a negative rate means "no key".
inline double clamp_key_rate(double rate) { return rate > 0.0 ? rate : 0.0; }

enum class QberConvention {
  /// t1 = t / delta1.
  CaptionRatio,
  /// t1 = (t S' - a'_0^L S0 / 2) / (delta1 S'), clamped to [0, 0.5]: vacuum
  /// detections are random and carry half the error budget.
  DarkCountCorrected,
};

std::string_view to_string(QberConvention c);
/// Accepts "caption" and "darkcorrected".
QberConvention parse_convention(std::string_view name);

/// Single-photon QBER estimate. Throws InvalidInput when delta1 <= 0.
double single_photon_qber(double t, double delta1, double S_prime, double a0_prime_lower,
                          double S0, QberConvention convention);

/// Bits per second: repetition_rate * p' * S' * R_s.
double key_rate_hz(double per_count, const ObservedRates& rates, double repetition_rate);

/// Rates plus everything needed to turn them into a key rate sweep.
struct SweepSettings {
  IntensityPair nominal{0.2, 0.6};
  double repetition_rate = 0.0;
  QberConvention convention = QberConvention::DarkCountCorrected;
  double ec_efficiency = 1.0;
};

enum class RowStatus {
  Ok,
  /// No single-photon credit; key rate reported as computed (negative).
  Vacuous,
  /// Coefficient ordering precondition failed; numeric columns are NaN.
  PreconditionFailed,
};

struct SweepRow {
  double delta_m = 0.0;
  double delta1_signal = 0.0;
  double delta1_decoy = 0.0;
  double t1 = 0.0;
  double R_per_count = 0.0;
  double R_hz = 0.0;
  RowStatus status = RowStatus::Ok;
  std::string message;

  bool insecure() const { return status != RowStatus::Ok || !(R_per_count > 0.0); }
};

/// One row per relative intensity error delta: windows
/// [mu (1 - delta), mu (1 + delta)] for both sources, error-tolerant bound,
/// key rate. Rows come back in input order.
std::vector<SweepRow> sweep_delta_m(const ObservedRates& rates, const std::vector<double>& deltas,
                                    const SweepSettings& settings);

/// Single row for exactly known sources at the nominal intensities, using
/// the error-free bound.
SweepRow errorfree_row(const ObservedRates& rates, const SweepSettings& settings);

/// CSV with header delta_m,delta1_signal,delta1_decoy,t1,R_per_count,R_hz;
/// numbers in %.6g form, '\n' line ends, no locale dependence.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Parses the CSV written by write_sweep_csv; throws InvalidInput with the
/// line number on malformed input.
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

/// Fixed-width table for terminals, with an "insecure" marker column.
std::string sweep_table(const std::vector<SweepRow>& rows, QberConvention convention);

}  // namespace decoyqkd
