#pragma once

// Lower bounds on the single-photon contribution of decoy-state QKD, both for
// exactly controlled sources and for sources whose photon-number
// coefficients are only known to lie in intervals.
//
// All arithmetic is plain IEEE double. Inputs are O(1) rates and
// coefficients, and every denominator is checked against a relative floor
// before dividing, so rounding moves a bound by a few ulps at most. That is
// far below any physically meaningful resolution; no directed rounding is
// attempted.

#include <cstdint>

#include "decoyqkd/photon_source.hpp"

namespace decoyqkd {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Directly measured quantities of one run. Counting rates are counts per
/// emitted pulse of the respective source.
struct ObservedRates {
  double S = 0.0;        ///< decoy source
  double S_prime = 0.0;  ///< signal source
  double S0 = 0.0;       ///< vacuum source
  double p0 = 0.0;
  double p = 0.0;
  double p_prime = 0.0;
  double M = 0.0;  ///< total pulses sent
  double qber_signal = 0.0;
  double qber_decoy = 0.0;

  /// Throws InvalidInput when a rate or QBER leaves [0, 1], the source
  /// probabilities do not sum to 1 within 1e-9, or M <= 0.
  void validate() const;

  double decoy_counts() const { return S * p * M; }            ///< N_d
  double signal_counts() const { return S_prime * p_prime * M; }  ///< N_s
  double vacuum_counts() const { return S0 * p0 * M; }         ///< N_0

  /// Rates from raw counts, the inverse of the three accessors above.
  static ObservedRates from_counts(double N_d, double N_s, double N_0, double p0, double p,
                                   double p_prime, double M);
};

/// A bound together with its raw (unclamped) value.
struct ClampedBound {
  double value = 0.0;
  double raw = 0.0;
  bool vacuous = false;  ///< raw <= 0: no single-photon credit
  bool above_one = false;
};

/// Clamps a fraction to [0, 1], keeping the raw value and flags.
ClampedBound clamp_fraction(double raw);

/// Verified lower bounds for one run.
struct SingletBound {
  double D1_lower = 0.0;      ///< sum over single-photon counts of the posterior normaliser
  double D1_raw = 0.0;
  double n1s_lower = 0.0;     ///< p' a'_1^L D1
  double n1d_lower = 0.0;     ///< p a_1^L D1
  ClampedBound delta1_signal;
  ClampedBound delta1_decoy;
  Interval n0d;  ///< vacuum counts from the decoy source
  Interval n0s;  ///< vacuum counts from the signal source
  bool vacuous = false;
};

/// Minimum single-photon counting rate s_1 for exactly known sources.
/// Throws PreconditionViolation when the exact ratio ordering fails or the
/// denominator a'_2 a_1 - a'_1 a_2 vanishes.
ClampedBound errorfree_s1_lower(const ObservedRates& rates, const PhotonDistribution& decoy,
                                const PhotonDistribution& signal);

/// Error-free single-photon fractions a'_1 s_1 / S' and a_1 s_1 / S,
/// packaged like the error-tolerant result. Vacuum intervals are points.
SingletBound errorfree_bounds(const ObservedRates& rates, const PhotonDistribution& decoy,
                              const PhotonDistribution& signal);

struct VacuumCounts {
  Interval n0d;
  Interval n0s;
};

/// Vacuum-count intervals from the vacuum source's rate:
/// n0d in a_0^{L,U} p S0 M, n0s in a'_0^{L,U} p' S0 M.
/// Throws InvalidInput when p0 = 0 (no vacuum source was run).
VacuumCounts vacuum_count_bounds(const ObservedRates& rates, Interval a0, Interval a0_prime);

/// Same with an externally supplied vacuum counting-rate interval, for runs
/// without a vacuum source.
VacuumCounts vacuum_count_bounds(const ObservedRates& rates, Interval a0, Interval a0_prime,
                                 Interval s0);

/// Raw lower bound on D1 (may be negative). The decoy vacuum count enters at
/// its upper bound and the signal vacuum count at its lower bound; that
/// substitution is fixed. Throws PreconditionViolation when the bounded ratio
/// ordering fails or the denominator a_1^U a'_2^L - a'_1^L a_2^U is not
/// positive.
double d1_lower(const ObservedRates& rates, const BoundedDistribution& decoy,
                const BoundedDistribution& signal);

/// Full error-tolerant result. Both fractions are projections of one D1.
SingletBound delta1_bounds(const ObservedRates& rates, const BoundedDistribution& decoy,
                           const BoundedDistribution& signal);

/// Variant taking the vacuum counting rate as an interval, for p0 = 0.
SingletBound delta1_bounds(const ObservedRates& rates, const BoundedDistribution& decoy,
                           const BoundedDistribution& signal, Interval s0);

}  // namespace decoyqkd
