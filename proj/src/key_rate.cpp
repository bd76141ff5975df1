#include "decoyqkd/key_rate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidInput(fmt::format("{} = {} is outside [0, 1]", name, x));
  }
}

SweepRow finish_row(double delta_m, const SingletBound& bound, double a0_prime_lower,
                    const ObservedRates& rates, const SweepSettings& settings) {
  SweepRow row;
  row.delta_m = delta_m;
  row.delta1_signal = bound.delta1_signal.value;
  row.delta1_decoy = bound.delta1_decoy.value;
  if (bound.delta1_signal.vacuous) {
    row.status = RowStatus::Vacuous;
    row.message = "no single-photon credit";
    row.t1 = kNaN;
    row.R_per_count = key_rate_per_count(0.0, 0.5, rates.qber_signal, settings.ec_efficiency);
  } else {
    row.t1 = single_photon_qber(rates.qber_signal, row.delta1_signal, rates.S_prime,
                                a0_prime_lower, rates.S0, settings.convention);
    row.R_per_count =
        key_rate_per_count(row.delta1_signal, row.t1, rates.qber_signal, settings.ec_efficiency);
  }
  row.R_hz = key_rate_hz(row.R_per_count, rates, settings.repetition_rate);
  return row;
}

SweepRow failed_row(double delta_m, std::string message) {
  SweepRow row;
  row.delta_m = delta_m;
  row.delta1_signal = row.delta1_decoy = row.t1 = row.R_per_count = row.R_hz = kNaN;
  row.status = RowStatus::PreconditionFailed;
  row.message = std::move(message);
  return row;
}

std::string csv_number(double x) { return fmt::format("{:.6g}", x); }

double parse_number(std::string_view field, std::size_t line) {
  const std::string s(field);
  if (s == "nan" || s == "-nan") return kNaN;
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput(fmt::format("line {}: cannot parse number \"{}\"", line, s));
  }
  return value;
}

}  // namespace

double binary_entropy(double x) {
  require_fraction(x, "entropy argument");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

void KeyRateInput::validate() const {
  require_fraction(delta1_signal, "delta1");
  require_fraction(qber_total, "t");
  require_fraction(qber_single, "t1");
  require_fraction(p_prime, "p'");
  require_fraction(S_prime, "S'");
  if (!(repetition_rate > 0.0)) throw InvalidInput("repetition rate must be positive");
}

double key_rate_per_count(double delta1, double t1, double t, double ec_efficiency) {
  require_fraction(delta1, "delta1");
  if (!(ec_efficiency >= 1.0)) {
    throw InvalidInput(fmt::format("error-correction efficiency {} below 1", ec_efficiency));
  }
  return delta1 * (1.0 - binary_entropy(t1)) - ec_efficiency * binary_entropy(t);
}

std::string_view to_string(QberConvention c) {
  return c == QberConvention::CaptionRatio ? "caption" : "darkcorrected";
}

QberConvention parse_convention(std::string_view name) {
  if (name == "caption") return QberConvention::CaptionRatio;
  if (name == "darkcorrected") return QberConvention::DarkCountCorrected;
  throw InvalidInput(fmt::format("unknown QBER convention \"{}\"", name));
}

double single_photon_qber(double t, double delta1, double S_prime, double a0_prime_lower,
                          double S0, QberConvention convention) {
  require_fraction(t, "t");
  if (!(delta1 > 0.0)) {
    throw InvalidInput("single-photon QBER is undefined without single-photon credit");
  }
  double t1 = 0.0;
  if (convention == QberConvention::CaptionRatio) {
    t1 = t / delta1;
  } else {
    if (!(S_prime > 0.0)) throw InvalidInput("S' must be positive");
    t1 = (t * S_prime - 0.5 * a0_prime_lower * S0) / (delta1 * S_prime);
  }
  // Beyond 0.5 the entropy term would start to shrink again.
  return std::clamp(t1, 0.0, 0.5);
}

double key_rate_hz(double per_count, const ObservedRates& rates, double repetition_rate) {
  if (!(repetition_rate > 0.0)) throw InvalidInput("repetition rate must be positive");
  return repetition_rate * rates.p_prime * rates.S_prime * per_count;
}

std::vector<SweepRow> sweep_delta_m(const ObservedRates& rates, const std::vector<double>& deltas,
                                    const SweepSettings& settings) {
  rates.validate();
  std::vector<SweepRow> rows;
  rows.reserve(deltas.size());
  for (const double delta : deltas) {
    if (!(delta >= 0.0 && delta < 1.0)) {
      throw InvalidInput(fmt::format("intensity error {} outside [0, 1)", delta));
    }
    const auto decoy = CoherentWindow::relative(settings.nominal.decoy, delta);
    const auto signal = CoherentWindow::relative(settings.nominal.signal, delta);
    const auto bounds = coherent_bounds(decoy, signal);
    try {
      const auto bound = delta1_bounds(rates, bounds.decoy, bounds.signal);
      rows.push_back(finish_row(delta, bound, bounds.signal.lower(0), rates, settings));
    } catch (const PreconditionViolation& e) {
      rows.push_back(failed_row(delta, e.what()));
    }
  }
  return rows;
}

SweepRow errorfree_row(const ObservedRates& rates, const SweepSettings& settings) {
  const auto& n = settings.nominal;
  const int cutoff = default_cutoff(std::max(n.decoy, n.signal));
  const auto decoy = poisson_distribution(n.decoy, cutoff);
  const auto signal = poisson_distribution(n.signal, cutoff);
  try {
    return finish_row(0.0, errorfree_bounds(rates, decoy, signal), signal[0], rates, settings);
  } catch (const PreconditionViolation& e) {
    return failed_row(0.0, e.what());
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "delta_m,delta1_signal,delta1_decoy,t1,R_per_count,R_hz\n";
  for (const auto& r : rows) {
    out << csv_number(r.delta_m) << ',' << csv_number(r.delta1_signal) << ','
        << csv_number(r.delta1_decoy) << ',' << csv_number(r.t1) << ','
        << csv_number(r.R_per_count) << ',' << csv_number(r.R_hz) << '\n';
  }
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  write_sweep_csv(out, rows);
  return out.str();
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line_no == 1) {
      if (line != "delta_m,delta1_signal,delta1_decoy,t1,R_per_count,R_hz") {
        throw InvalidInput("line 1: unexpected CSV header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(parse_number(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 6) {
      throw InvalidInput(fmt::format("line {}: expected 6 fields, got {}", line_no, fields.size()));
    }
    SweepRow r;
    r.delta_m = fields[0];
    r.delta1_signal = fields[1];
    r.delta1_decoy = fields[2];
    r.t1 = fields[3];
    r.R_per_count = fields[4];
    r.R_hz = fields[5];
    if (std::isnan(r.R_per_count)) r.status = RowStatus::PreconditionFailed;
    rows.push_back(r);
  }
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows, QberConvention convention) {
  std::string out = fmt::format("t1 convention: {}\n", to_string(convention));
  out += fmt::format("{:>8} {:>12} {:>12} {:>10} {:>13} {:>11}  {}\n", "delta_M", "delta1'",
                     "delta1", "t1", "R/count", "R (Hz)", "note");
  for (const auto& r : rows) {
    std::string note;
    if (r.status == RowStatus::PreconditionFailed) {
      note = "precondition failed: " + r.message;
    } else if (r.insecure()) {
      note = "insecure";
    }
    const double shown_hz = r.status == RowStatus::PreconditionFailed ? r.R_hz : clamp_key_rate(r.R_hz);
    out += fmt::format("{:>7.2f}% {:>12.6f} {:>12.6f} {:>10.6f} {:>13.6g} {:>11.2f}  {}\n",
                       100.0 * r.delta_m, r.delta1_signal, r.delta1_decoy, r.t1, r.R_per_count,
                       shown_hz, note);
  }
  return out;
}

}  // namespace decoyqkd
