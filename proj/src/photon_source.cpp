#include "decoyqkd/photon_source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "decoyqkd/errors.hpp"

namespace decoyqkd {

namespace {

// Slack for ratio comparisons; an ordering broken by less than this cannot
// move the bound by a representable amount.
constexpr double kRatioSlack = 1e-12;

double ratio_or_inf(double numerator, double denominator) {
  if (denominator == 0.0) return std::numeric_limits<double>::infinity();
  return numerator / denominator;
}

bool at_least(double lhs, double rhs) {
  if (std::isinf(rhs)) return std::isinf(lhs);
  return lhs >= rhs - kRatioSlack * std::abs(rhs);
}

// Shared ratio-ordering check. `num(k)` is the signal-side coefficient and
// `den(k)` the decoy-side one.
template <typename Num, typename Den>
ConditionReport check_ratio_ordering(Num num, Den den, int k_max) {
  const auto vacuous = [&](int k) { return num(k) == 0.0 && den(k) == 0.0; };
  for (int k : {1, 2}) {
    if (vacuous(k)) return {false, k};
  }
  const double r1 = ratio_or_inf(num(1), den(1));
  const double r2 = ratio_or_inf(num(2), den(2));
  if (!at_least(r2, r1)) return {false, 2};
  for (int k = 3; k <= k_max; ++k) {
    if (vacuous(k)) continue;
    if (!at_least(ratio_or_inf(num(k), den(k)), r2)) return {false, k};
  }
  return {true, std::nullopt};
}

}  // namespace

double poisson_pmf(double mu, int k) {
  double term = std::exp(-mu);
  for (int j = 1; j <= k; ++j) term *= mu / j;
  return term;
}

int default_cutoff(double mu_high) {
  return std::max(25, static_cast<int>(std::ceil(10.0 * mu_high)));
}

PhotonDistribution::PhotonDistribution(std::vector<double> coeffs, double tail_mass)
    : coeffs_(std::move(coeffs)), tail_mass_(tail_mass) {
  if (coeffs_.empty()) throw InvalidInput("photon distribution needs at least a_0");
  if (!(tail_mass_ >= 0.0)) throw InvalidInput("tail mass must be nonnegative");
  double total = tail_mass_;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (!(coeffs_[k] >= 0.0)) {
      throw InvalidInput(fmt::format("coefficient a_{} = {} is negative", k, coeffs_[k]));
    }
    total += coeffs_[k];
  }
  // Rounding in the summation may overshoot 1 by a few ulps.
  if (total < 1.0 - kTailTolerance || total > 1.0 + kTailTolerance) {
    throw InvalidInput(fmt::format("coefficients plus tail sum to {}, expected 1", total));
  }
}

double PhotonDistribution::operator[](int k) const {
  if (k < 0 || k > cutoff()) return 0.0;
  return coeffs_[static_cast<std::size_t>(k)];
}

PhotonDistribution poisson_distribution(double mu, int cutoff) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw InvalidInput(fmt::format("intensity must be positive, got {}", mu));
  }
  if (cutoff < 2) throw InvalidInput(fmt::format("cutoff must be >= 2, got {}", cutoff));

  std::vector<double> coeffs(static_cast<std::size_t>(cutoff) + 1);
  for (int k = 0; k <= cutoff; ++k) coeffs[static_cast<std::size_t>(k)] = poisson_pmf(mu, k);

  // Sum the tail term by term; the terms fall off geometrically once k > mu.
  double tail = 0.0;
  double term = coeffs.back();
  for (int k = cutoff + 1; k < cutoff + 100000; ++k) {
    term *= mu / k;
    tail += term;
    if (term == 0.0 || (k > mu && term < 1e-18 * tail)) break;
  }
  return PhotonDistribution(std::move(coeffs), tail);
}

CoherentWindow CoherentWindow::relative(double mu, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw InvalidInput(fmt::format("relative intensity error must be in [0, 1), got {}", delta));
  }
  return {mu * (1.0 - delta), mu * (1.0 + delta)};
}

void CoherentWindow::validate() const {
  if (!(mu_low > 0.0) || !std::isfinite(mu_high) || !(mu_low <= mu_high)) {
    throw InvalidInput(fmt::format("invalid intensity window [{}, {}]", mu_low, mu_high));
  }
}

bool CoherentWindow::contains(double mu) const {
  const double slack = 1e-12 * mu_high;
  return mu >= mu_low - slack && mu <= mu_high + slack;
}

BoundedDistribution::BoundedDistribution(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty()) {
    throw InvalidInput("bounded distribution needs equal-length, nonempty lower/upper arrays");
  }
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] >= 0.0 && lower_[k] <= upper_[k] && upper_[k] <= 1.0)) {
      throw InvalidInput(fmt::format("bounds for k = {} violate 0 <= {} <= {} <= 1", k,
                                     lower_[k], upper_[k]));
    }
  }
}

BoundedDistribution BoundedDistribution::exact(const PhotonDistribution& dist) {
  std::vector<double> c(dist.coeffs().begin(), dist.coeffs().end());
  return BoundedDistribution(c, c);
}

double BoundedDistribution::lower(int k) const {
  if (k < 0 || k > cutoff()) return 0.0;
  return lower_[static_cast<std::size_t>(k)];
}

double BoundedDistribution::upper(int k) const {
  if (k < 0 || k > cutoff()) return 0.0;
  return upper_[static_cast<std::size_t>(k)];
}

std::pair<double, double> poisson_coefficient_range(const CoherentWindow& w, int k) {
  w.validate();
  if (k == 0) return {poisson_pmf(w.mu_high, 0), poisson_pmf(w.mu_low, 0)};
  const double at_low = poisson_pmf(w.mu_low, k);
  const double at_high = poisson_pmf(w.mu_high, k);
  double lo = std::min(at_low, at_high);
  double hi = std::max(at_low, at_high);
  // x^k e^{-x} peaks at x = k.
  if (w.mu_low < k && k < w.mu_high) hi = std::max(hi, poisson_pmf(static_cast<double>(k), k));
  return {lo, hi};
}

namespace {

BoundedDistribution window_bounds(const CoherentWindow& w, int cutoff, WindowBoundMethod method) {
  std::vector<double> lower(static_cast<std::size_t>(cutoff) + 1);
  std::vector<double> upper(lower.size());
  for (int k = 0; k <= cutoff; ++k) {
    auto [lo, hi] = poisson_coefficient_range(w, k);
    if (method == WindowBoundMethod::PlugIn && (k == 1 || k == 2)) {
      lo = poisson_pmf(w.mu_low, k);
      hi = poisson_pmf(w.mu_high, k);
    }
    lower[static_cast<std::size_t>(k)] = lo;
    upper[static_cast<std::size_t>(k)] = hi;
  }
  return BoundedDistribution(std::move(lower), std::move(upper));
}

}  // namespace

SourceBounds coherent_bounds(const CoherentWindow& decoy, const CoherentWindow& signal,
                             int cutoff, WindowBoundMethod method) {
  decoy.validate();
  signal.validate();
  if (cutoff == 0) cutoff = default_cutoff(std::max(decoy.mu_high, signal.mu_high));
  if (cutoff < 2) throw InvalidInput(fmt::format("cutoff must be >= 2, got {}", cutoff));
  if (method == WindowBoundMethod::PlugIn) {
    for (const auto* w : {&decoy, &signal}) {
      if (w->mu_high > 1.0) {
        throw PreconditionViolation(fmt::format(
            "plug-in coefficient bounds need mu_high <= 1 (window [{}, {}]); "
            "use the interval-extremum method",
            w->mu_low, w->mu_high));
      }
    }
  }
  return {window_bounds(decoy, cutoff, method), window_bounds(signal, cutoff, method)};
}

ConditionReport check_bounded_ratio_condition(const BoundedDistribution& decoy,
                                              const BoundedDistribution& signal, int k_max) {
  if (k_max < 2) throw InvalidInput("k_max must be >= 2");
  if (k_max > decoy.cutoff() || k_max > signal.cutoff()) {
    throw InvalidInput(fmt::format("k_max {} exceeds a distribution cutoff", k_max));
  }
  return check_ratio_ordering([&](int k) { return signal.lower(k); },
                              [&](int k) { return decoy.upper(k); }, k_max);
}

ConditionReport check_exact_ratio_condition(const PhotonDistribution& decoy,
                                            const PhotonDistribution& signal, int k_max) {
  if (k_max < 2) throw InvalidInput("k_max must be >= 2");
  if (k_max > decoy.cutoff() || k_max > signal.cutoff()) {
    throw InvalidInput(fmt::format("k_max {} exceeds a distribution cutoff", k_max));
  }
  return check_ratio_ordering([&](int k) { return signal[k]; }, [&](int k) { return decoy[k]; },
                              k_max);
}

}  // namespace decoyqkd
