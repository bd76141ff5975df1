#include "decoyqkd/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

constexpr double kDenominatorFloor = 1e-12;

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidInput(fmt::format("{} = {} is outside [0, 1]", name, x));
  }
}

void require_decoy_and_signal(const ObservedRates& r) {
  if (!(r.p > 0.0) || !(r.p_prime > 0.0)) {
    throw InvalidInput("decoy and signal sources must both have positive probability");
  }
}

void require_denominator(double den, double scale, const char* what) {
  if (!(den > kDenominatorFloor * scale)) {
    throw PreconditionViolation(
        fmt::format("{} = {} is not positive; the coefficient ordering fails", what, den));
  }
}

// Fraction = numerator / counts; no counts means no credit.
ClampedBound fraction_of(double numerator, double counts) {
  if (counts <= 0.0) return {0.0, 0.0, true, false};
  return clamp_fraction(numerator / counts);
}

SingletBound project(const ObservedRates& rates, double D1_raw, double a1_decoy,
                     double a1_signal, VacuumCounts vac) {
  SingletBound out;
  out.D1_raw = D1_raw;
  out.D1_lower = std::max(D1_raw, 0.0);
  out.vacuous = D1_raw <= 0.0;
  out.n1s_lower = rates.p_prime * a1_signal * out.D1_lower;
  out.n1d_lower = rates.p * a1_decoy * out.D1_lower;
  out.delta1_signal = fraction_of(rates.p_prime * a1_signal * D1_raw, rates.signal_counts());
  out.delta1_decoy = fraction_of(rates.p * a1_decoy * D1_raw, rates.decoy_counts());
  out.n0d = vac.n0d;
  out.n0s = vac.n0s;
  return out;
}

}  // namespace

void ObservedRates::validate() const {
  require_fraction(S, "S");
  require_fraction(S_prime, "S'");
  require_fraction(S0, "S0");
  require_fraction(p0, "p0");
  require_fraction(p, "p");
  require_fraction(p_prime, "p'");
  require_fraction(qber_signal, "signal QBER");
  require_fraction(qber_decoy, "decoy QBER");
  if (std::abs(p0 + p + p_prime - 1.0) > 1e-9) {
    throw InvalidInput(
        fmt::format("source probabilities sum to {}, expected 1", p0 + p + p_prime));
  }
  if (!(M > 0.0)) throw InvalidInput("pulse count M must be positive");
}

ObservedRates ObservedRates::from_counts(double N_d, double N_s, double N_0, double p0,
                                         double p, double p_prime, double M) {
  ObservedRates r;
  r.p0 = p0;
  r.p = p;
  r.p_prime = p_prime;
  r.M = M;
  r.S = p > 0.0 ? N_d / (p * M) : 0.0;
  r.S_prime = p_prime > 0.0 ? N_s / (p_prime * M) : 0.0;
  r.S0 = p0 > 0.0 ? N_0 / (p0 * M) : 0.0;
  return r;
}

ClampedBound clamp_fraction(double raw) {
  ClampedBound b;
  b.raw = raw;
  b.vacuous = !(raw > 0.0);
  b.above_one = raw > 1.0;
  b.value = std::clamp(std::isnan(raw) ? 0.0 : raw, 0.0, 1.0);
  return b;
}

ClampedBound errorfree_s1_lower(const ObservedRates& rates, const PhotonDistribution& decoy,
                                const PhotonDistribution& signal) {
  rates.validate();
  const int k_max = std::min(decoy.cutoff(), signal.cutoff());
  if (auto report = check_exact_ratio_condition(decoy, signal, k_max); !report.holds) {
    throw PreconditionViolation(fmt::format(
        "exact sources violate a'_k/a_k >= a'_2/a_2 >= a'_1/a_1 at k = {}",
        *report.first_violation));
  }
  const double den = signal[2] * decoy[1] - signal[1] * decoy[2];
  require_denominator(den, signal[2] * decoy[1], "a'_2 a_1 - a'_1 a_2");
  // s_0 = S_0: vacuum pulses from every source share one counting rate.
  const double s0 = rates.S0;
  const double raw =
      (signal[2] * (rates.S - decoy[0] * s0) - decoy[2] * (rates.S_prime - signal[0] * s0)) / den;
  ClampedBound b;
  b.raw = raw;
  b.vacuous = !(raw > 0.0);
  b.value = std::max(raw, 0.0);
  return b;
}

SingletBound errorfree_bounds(const ObservedRates& rates, const PhotonDistribution& decoy,
                              const PhotonDistribution& signal) {
  const ClampedBound s1 = errorfree_s1_lower(rates, decoy, signal);
  const double n0d = decoy[0] * rates.p * rates.S0 * rates.M;
  const double n0s = signal[0] * rates.p_prime * rates.S0 * rates.M;
  SingletBound out =
      project(rates, s1.raw * rates.M, decoy[1], signal[1], {{n0d, n0d}, {n0s, n0s}});
  // Report the fractions straight from s_1, without the round trip via D1.
  out.delta1_signal =
      rates.S_prime > 0.0 ? clamp_fraction(signal[1] * s1.raw / rates.S_prime)
                          : ClampedBound{0.0, 0.0, true, false};
  out.delta1_decoy = rates.S > 0.0 ? clamp_fraction(decoy[1] * s1.raw / rates.S)
                                   : ClampedBound{0.0, 0.0, true, false};
  return out;
}

VacuumCounts vacuum_count_bounds(const ObservedRates& rates, Interval a0, Interval a0_prime) {
  if (!(rates.p0 > 0.0)) {
    throw InvalidInput(
        "no vacuum source (p0 = 0): supply an external vacuum counting-rate interval");
  }
  return vacuum_count_bounds(rates, a0, a0_prime, {rates.S0, rates.S0});
}

VacuumCounts vacuum_count_bounds(const ObservedRates& rates, Interval a0, Interval a0_prime,
                                 Interval s0) {
  if (!(a0.lower <= a0.upper) || !(a0_prime.lower <= a0_prime.upper) || !(s0.lower <= s0.upper) ||
      s0.lower < 0.0) {
    throw InvalidInput("vacuum bounds need ordered, nonnegative intervals");
  }
  const double pm = rates.p * rates.M;
  const double ppm = rates.p_prime * rates.M;
  return {{a0.lower * pm * s0.lower, a0.upper * pm * s0.upper},
          {a0_prime.lower * ppm * s0.lower, a0_prime.upper * ppm * s0.upper}};
}

namespace {

double d1_from_vacuum(const ObservedRates& rates, const BoundedDistribution& decoy,
                      const BoundedDistribution& signal, const VacuumCounts& vac) {
  require_decoy_and_signal(rates);
  const int k_max = std::min(decoy.cutoff(), signal.cutoff());
  if (k_max < 2) throw InvalidInput("coefficient bounds must reach k = 2");
  if (auto report = check_bounded_ratio_condition(decoy, signal, k_max); !report.holds) {
    throw PreconditionViolation(fmt::format(
        "bounded sources violate a'_k^L/a_k^U >= a'_2^L/a_2^U >= a'_1^L/a_1^U at k = {}",
        *report.first_violation));
  }
  const double a1U = decoy.upper(1);
  const double a2U = decoy.upper(2);
  const double b1L = signal.lower(1);
  const double b2L = signal.lower(2);
  const double den = a1U * b2L - b1L * a2U;
  require_denominator(den, a1U * b2L, "a_1^U a'_2^L - a'_1^L a_2^U");
  // Worst case: decoy vacuum counts at their upper bound, signal vacuum
  // counts at their lower bound.
  const double decoy_side = (rates.decoy_counts() - vac.n0d.upper) / rates.p;
  const double signal_side = (rates.signal_counts() - vac.n0s.lower) / rates.p_prime;
  return (b2L * decoy_side - a2U * signal_side) / den;
}

}  // namespace

double d1_lower(const ObservedRates& rates, const BoundedDistribution& decoy,
                const BoundedDistribution& signal) {
  rates.validate();
  const auto vac = vacuum_count_bounds(rates, {decoy.lower(0), decoy.upper(0)},
                                       {signal.lower(0), signal.upper(0)});
  return d1_from_vacuum(rates, decoy, signal, vac);
}

SingletBound delta1_bounds(const ObservedRates& rates, const BoundedDistribution& decoy,
                           const BoundedDistribution& signal) {
  rates.validate();
  const auto vac = vacuum_count_bounds(rates, {decoy.lower(0), decoy.upper(0)},
                                       {signal.lower(0), signal.upper(0)});
  const double D1 = d1_from_vacuum(rates, decoy, signal, vac);
  return project(rates, D1, decoy.lower(1), signal.lower(1), vac);
}

SingletBound delta1_bounds(const ObservedRates& rates, const BoundedDistribution& decoy,
                           const BoundedDistribution& signal, Interval s0) {
  rates.validate();
  const auto vac = vacuum_count_bounds(rates, {decoy.lower(0), decoy.upper(0)},
                                       {signal.lower(0), signal.upper(0)}, s0);
  const double D1 = d1_from_vacuum(rates, decoy, signal, vac);
  return project(rates, D1, decoy.lower(1), signal.lower(1), vac);
}

}  // namespace decoyqkd
