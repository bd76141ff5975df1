#pragma once

// Diagonal photon-number sources: exact distributions, interval-bounded
// distributions and the coherent-state (Poisson) instantiation of both.

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace decoyqkd {

/// Mass allowed to be missing from a truncated distribution beyond what is
/// declared as tail mass.
inline constexpr double kTailTolerance = 1e-12;

/// e^{-mu} mu^k / k!, evaluated by forward recurrence so that every caller
/// (exact distributions, window bounds, simulator tables) sees bit-identical
/// coefficients.
double poisson_pmf(double mu, int k);

/// Truncation rule for infinite sources: max(25, ceil(10 * mu_high)).
int default_cutoff(double mu_high);

/// Probability a_k of emitting a k-photon Fock state, k = 0..cutoff, plus the
/// mass of photon numbers above the cutoff.
class PhotonDistribution {
 public:
  PhotonDistribution() = default;
  /// Throws InvalidInput on negative coefficients or when the retained mass
  /// plus `tail_mass` is not within [1 - kTailTolerance, 1].
  explicit PhotonDistribution(std::vector<double> coeffs, double tail_mass = 0.0);

  std::span<const double> coeffs() const { return coeffs_; }
  /// a_k; zero for k above the cutoff.
  double operator[](int k) const;
  int cutoff() const { return static_cast<int>(coeffs_.size()) - 1; }
  double tail_mass() const { return tail_mass_; }

 private:
  std::vector<double> coeffs_;
  double tail_mass_ = 0.0;
};

/// Poisson distribution truncated at `cutoff`; requires mu > 0, cutoff >= 2.
PhotonDistribution poisson_distribution(double mu, int cutoff);

/// Known range [mu_low, mu_high] of a coherent source's intensity.
struct CoherentWindow {
  double mu_low = 0.0;
  double mu_high = 0.0;

  /// Degenerate window at a single intensity.
  static CoherentWindow exact(double mu) { return {mu, mu}; }
  /// [mu (1 - delta), mu (1 + delta)].
  static CoherentWindow relative(double mu, double delta);

  /// Throws InvalidInput unless 0 < mu_low <= mu_high.
  void validate() const;
  bool contains(double mu) const;
};

/// Per-photon-number coefficient ranges a_k^L <= a_{ki} <= a_k^U over every
/// pulse i of one source.
class BoundedDistribution {
 public:
  BoundedDistribution() = default;
  /// Throws InvalidInput unless sizes agree and 0 <= lower <= upper <= 1.
  BoundedDistribution(std::vector<double> lower, std::vector<double> upper);

  /// Zero-width bounds around an exactly known distribution.
  static BoundedDistribution exact(const PhotonDistribution& dist);

  double lower(int k) const;
  double upper(int k) const;
  std::span<const double> lower_coeffs() const { return lower_; }
  std::span<const double> upper_coeffs() const { return upper_; }
  int cutoff() const { return static_cast<int>(lower_.size()) - 1; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct SourceBounds {
  BoundedDistribution decoy;
  BoundedDistribution signal;
};

enum class WindowBoundMethod {
  /// Endpoint substitution for k = 1, 2 only, valid while x^k e^{-x} is
  /// monotone on the window (mu_high <= 1).
  PlugIn,
  /// Exact extremum of x^k e^{-x}/k! over the window: endpoints plus the
  /// interior critical point x = k. Agrees with PlugIn wherever that applies.
  IntervalExtremum,
};

/// Range of the k-photon Poisson coefficient over an intensity window.
std::pair<double, double> poisson_coefficient_range(const CoherentWindow& w, int k);

/// Coefficient bounds for a coherent decoy/signal pair. `cutoff` 0 selects
/// default_cutoff(signal.mu_high). With PlugIn, throws PreconditionViolation
/// when a window crosses the monotone region of k = 1 or 2.
SourceBounds coherent_bounds(const CoherentWindow& decoy, const CoherentWindow& signal,
                             int cutoff = 0,
                             WindowBoundMethod method = WindowBoundMethod::IntervalExtremum);

/// Outcome of a coefficient-ratio ordering check. `first_violation` holds
/// the smallest photon number at which the ordering fails.
struct ConditionReport {
  bool holds = true;
  std::optional<int> first_violation;
};

/// Checks a'_k^L / a_k^U >= a'_2^L / a_2^U >= a'_1^L / a_1^U for
/// 2 <= k <= k_max, the ordering required by the error-tolerant bound.
///
/// Ratios use primed lower bounds over unprimed upper bounds; this is the
/// only reading consistent with the bound's denominator
/// a_1^U a'_2^L - a'_1^L a_2^U. A ratio with a_k^U = 0 and a'_k^L > 0 counts
/// as +inf; k >= 3 with both zero is skipped. k = 1 or 2 with both zero is a
/// violation because the bound's denominator vanishes.
ConditionReport check_bounded_ratio_condition(const BoundedDistribution& decoy,
                                              const BoundedDistribution& signal, int k_max);

/// Exact-source analogue: a'_k / a_k >= a'_2 / a_2 >= a'_1 / a_1.
ConditionReport check_exact_ratio_condition(const PhotonDistribution& decoy,
                                            const PhotonDistribution& signal, int k_max);

}  // namespace decoyqkd
