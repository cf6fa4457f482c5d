#pragma once

// Exact and numerical evaluation of the first-passage quantities:
//   nu(t)       mean exit count, as a Borel-weighted series
//   P(M(t)>=n)  entrance distribution function, three overlapping routes
//   law of M(t) by uniformization of the pure-birth chain with rates 1/(n+1)
// plus the moment formulas and bounds that go with them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pfp::analytic {

/// Value of a truncated series together with an absolute error bound.
struct SeriesEval {
  double value = 0.0;
  std::size_t terms_used = 1;
  double tail_bound = 0.0;
};

/// Law of M(t) on {0..n_max}. `deficit` collects every unit of mass that is
/// not in `probs` (chain beyond n_max, Poisson-clock truncation, underflow),
/// so it bounds P(M(t) > n_max) from above.
struct DistributionTable {
  double horizon = 0.0;
  std::vector<double> probs;
  double deficit = 0.0;

  std::size_t n_max() const { return probs.empty() ? 0 : probs.size() - 1; }
  double mean() const;
  double second_moment() const;
  /// E[f(M)] over the tabulated states.
  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) acc += probs[n] * f(n);
    return acc;
  }
  /// P(M(t) >= n) with the deficit counted as upper-tail mass.
  double upper_tail(std::size_t n) const;
};

struct MomentPair {
  double mean = 0.0;
  double variance = 0.0;
};

struct MeanBounds {
  double lower = 0.0;
  double upper = 0.0;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested accuracy not reached; carries the best available estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SeriesEval best)
      : std::runtime_error(what), best_(best) {}
  const SeriesEval& best() const { return best_; }

 private:
  SeriesEval best_;
};

/// Mass beyond n_max exceeds the caller's cap.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, DistributionTable table)
      : std::runtime_error(what), table_(std::move(table)) {}
  const DistributionTable& table() const { return table_; }

 private:
  DistributionTable table_;
};

/// Result not representable as a double; carries its natural logarithm.
class RangeError : public std::range_error {
 public:
  RangeError(const std::string& what, double log_value)
      : std::range_error(what), log_value_(log_value) {}
  double log_value() const { return log_value_; }

 private:
  double log_value_;
};

// --- special functions ------------------------------------------------------

/// log(j!) - (j log j - j + 0.5 log(2 pi j)) for real j > 0 (Stirling remainder).
double stirling_remainder(double j);

/// log of e^{-j} j^j / j!, the j-th weight of the mean series.
double log_series_weight(std::int64_t j);

/// log of the Borel(1) probability e^{-j} j^{j-1} / j!.
double log_borel_pmf(std::int64_t j);

/// Borel(1) probability mass at j >= 1.
double borel_pmf(std::int64_t j);

// --- mean exit count ----------------------------------------------------------

/// Terms summed directly before the tail integral takes over.
inline constexpr std::int64_t kDirectTerms = 100000;

/// nu(t) = sum_j e^{-j} j^j/j! (1 - e^{-t/j}) with absolute error <= tol.
SeriesEval mean_exit_count(double t, double tol = 1e-10);

/// sqrt(2t) - nu(t).
SeriesEval mean_gap(double t, double tol = 1e-10);

/// sigma^2(t) = 2t - nu^2 - nu.
double exit_variance(double t, double tol = 1e-10);

/// (sqrt(2t+1) - 1, sqrt(2t)); t must be positive.
MeanBounds mean_bounds(double t);

// --- entrance distribution -----------------------------------------------------

enum class CdfRoute { Automatic, Double, Extended, Uniformized };

/// Largest n evaluated by the plain double alternating sum.
inline constexpr int kDoubleCdfLimit = 12;
/// Largest n evaluated by the extended-precision alternating sum.
inline constexpr int kExtendedCdfLimit = 60;

/// P(M(t) >= n) = P(zeta_n <= t).
double entrance_cdf(int n, double t, CdfRoute route = CdfRoute::Automatic);

/// Law of the pure-birth chain with rates 1/(n+1), M(0) = 0, at time t.
DistributionTable birth_distribution(double t, std::size_t n_max,
                                     double deficit_cap = 1.0);

/// Same for a general pure-birth chain; rates[n] is the rate out of state n
/// and must be given for n = 0..n_max.
DistributionTable birth_distribution(double t, std::size_t n_max,
                                     std::span<const double> rates,
                                     double deficit_cap = 1.0);

/// State limit past which the law of M(t) carries negligible mass
/// (sqrt(2t) plus 14 asymptotic standard deviations plus 30).
std::size_t suggested_state_limit(double t);

// --- moments ---------------------------------------------------------------------

/// Mean and variance of zeta_n = sum_{j<=n} j eta_j.
MomentPair zeta_moments(int n);

/// E exp(z T(x)) = exp((e^{zx} - zx - 1)/z).
double waiting_time_mgf(double x, double z);
double log_waiting_time_mgf(double x, double z);

/// E(eta - 1)^m for unit exponential eta: the derangement number D_m.
double centered_exponential_moment(int m);

}  // namespace pfp::analytic
