#include "pfp/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace pfp::analytic {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// Neumaier's variant of compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Asymptotic Stirling series, valid to ~1e-17 for y >= 20.
double stirling_series(double y) {
  const double inv = 1.0 / y;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 -
                        inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

// log Gamma(y + 1), y >= 0, by upward shift into the asymptotic range.
double log_factorial(double y) {
  constexpr int kShift = 20;
  if (y >= kShift) {
    return y * std::log(y) - y + 0.5 * (kLogTwoPi + std::log(y)) + stirling_series(y);
  }
  const double z = y + kShift;
  double shift = 0.0;
  for (int k = 1; k <= kShift; ++k) shift += std::log(y + k);
  return z * std::log(z) - z + 0.5 * (kLogTwoPi + std::log(z)) + stirling_series(z) -
         shift;
}

// Smooth continuation of the series weight e^{-y} y^y / Gamma(y+1).
double series_weight(double y) {
  return std::exp(-0.5 * (kLogTwoPi + std::log(y)) - stirling_remainder(y));
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

double DistributionTable::mean() const {
  return expect([](std::size_t n) { return static_cast<double>(n); });
}

double DistributionTable::second_moment() const {
  return expect([](std::size_t n) {
    const auto x = static_cast<double>(n);
    return x * x;
  });
}

double DistributionTable::upper_tail(std::size_t n) const {
  double acc = deficit;
  for (std::size_t k = probs.size(); k-- > n;) acc += probs[k];
  return std::min(acc, 1.0);
}

double stirling_remainder(double j) {
  require(j > 0.0, "stirling_remainder: argument must be positive");
  if (j >= 20.0) return stirling_series(j);
  return log_factorial(j) - (j * std::log(j) - j + 0.5 * (kLogTwoPi + std::log(j)));
}

double log_series_weight(std::int64_t j) {
  require(j >= 1, "log_series_weight: j must be positive");
  const auto y = static_cast<double>(j);
  return -0.5 * (kLogTwoPi + std::log(y)) - stirling_remainder(y);
}

double log_borel_pmf(std::int64_t j) {
  require(j >= 1, "borel_pmf: j must be positive");
  return log_series_weight(j) - std::log(static_cast<double>(j));
}

double borel_pmf(std::int64_t j) { return std::exp(log_borel_pmf(j)); }

SeriesEval mean_exit_count(double t, double tol) {
  require(t >= 0.0 && std::isfinite(t), "mean_exit_count: t must be finite and >= 0");
  require(tol > 0.0, "mean_exit_count: tol must be positive");
  if (t == 0.0) return {0.0, 1, 0.0};

  CompensatedSum direct;
  for (std::int64_t j = 1; j <= kDirectTerms; ++j) {
    const double w = std::exp(log_series_weight(j));
    direct.add(w * -std::expm1(-t / static_cast<double>(j)));
  }

  const auto big_j = static_cast<double>(kDirectTerms);
  auto f = [t](double y) { return series_weight(y) * -std::expm1(-t / y); };

  // Tail sum over j > J: Euler-Maclaurin around the integral from J to
  // infinity, with y = J / v^2 to map the integral onto (0, 1].
  auto g = [&](double v) {
    const double y = big_j / (v * v);
    return f(y) * 2.0 * big_j / (v * v * v);
  };
  double quad_error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      g, 0.0, 1.0, 20, 1e-14, &quad_error);
  const double f_j = f(big_j);
  const double df_j = 0.5 * (f(big_j + 1.0) - f(big_j - 1.0));
  const double tail = integral - 0.5 * f_j - df_j / 12.0;

  const double scale = (1.0 + t / big_j) / big_j;
  const double em_bound = 10.0 * f_j * scale * scale * scale / 720.0;
  const double stirling_bound = integral / (1680.0 * std::pow(big_j, 7.0));

  SeriesEval out;
  out.value = direct.value() + tail;
  out.terms_used = static_cast<std::size_t>(kDirectTerms);
  out.tail_bound = std::abs(quad_error) + em_bound + stirling_bound + 16.0 * kEps * out.value;
  if (!(out.tail_bound <= tol)) {
    throw ConvergenceError("mean_exit_count: tolerance not reached", out);
  }
  return out;
}

SeriesEval mean_gap(double t, double tol) {
  SeriesEval nu = mean_exit_count(t, tol);
  nu.value = std::sqrt(2.0 * t) - nu.value;
  return nu;
}

double exit_variance(double t, double tol) {
  const double nu = mean_exit_count(t, tol).value;
  return 2.0 * t - nu * nu - nu;
}

MeanBounds mean_bounds(double t) {
  require(t > 0.0 && std::isfinite(t), "mean_bounds: t must be positive");
  const double root = std::sqrt(2.0 * t + 1.0);
  return {2.0 * t / (root + 1.0), std::sqrt(2.0 * t)};
}

namespace {

using Extended = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

double entrance_cdf_double(int n, double t) {
  if (n > kDoubleCdfLimit) throw DomainError("entrance_cdf: double route needs n <= 12");
  // C(n,j) j^n is an exact integer below 2^53 for n <= 12.
  std::uint64_t nfact = 1;
  for (int k = 2; k <= n; ++k) nfact *= static_cast<std::uint64_t>(k);
  std::uint64_t binom = 1;
  double acc = 0.0;
  for (int j = 1; j <= n; ++j) {
    binom = binom * static_cast<std::uint64_t>(n - j + 1) / static_cast<std::uint64_t>(j);
    std::uint64_t power = 1;
    for (int k = 0; k < n; ++k) power *= static_cast<std::uint64_t>(j);
    const double coeff = static_cast<double>(binom * power) / static_cast<double>(nfact);
    const double term = coeff * -std::expm1(-t / j);
    acc += ((n - j) % 2 == 0) ? term : -term;
  }
  return acc;
}

double entrance_cdf_extended(int n, double t) {
  using boost::multiprecision::cpp_int;
  cpp_int nfact = 1;
  for (int k = 2; k <= n; ++k) nfact *= k;
  cpp_int binom = 1;  // C(n, j), updated incrementally
  Extended acc = 0;
  const Extended tt = t;
  for (int j = 1; j <= n; ++j) {
    binom = binom * (n - j + 1) / j;
    cpp_int power = boost::multiprecision::pow(cpp_int(j), static_cast<unsigned>(n));
    Extended coeff = Extended(binom * power) / Extended(nfact);
    Extended term = coeff * (1 - exp(-tt / j));
    if ((n - j) % 2 == 0)
      acc += term;
    else
      acc -= term;
  }
  return static_cast<double>(acc);
}

double entrance_cdf_uniformized(int n, double t) {
  const auto n_max = static_cast<std::size_t>(std::max(n - 1, 1));
  return birth_distribution(t, n_max).upper_tail(static_cast<std::size_t>(n));
}

}  // namespace

double entrance_cdf(int n, double t, CdfRoute route) {
  require(n >= 1, "entrance_cdf: n must be positive");
  require(t >= 0.0 && std::isfinite(t), "entrance_cdf: t must be finite and >= 0");
  if (t == 0.0) return 0.0;
  if (route == CdfRoute::Automatic) {
    route = n <= kDoubleCdfLimit     ? CdfRoute::Double
            : n <= kExtendedCdfLimit ? CdfRoute::Extended
                                     : CdfRoute::Uniformized;
  }
  double p = 0.0;
  switch (route) {
    case CdfRoute::Double:
      p = entrance_cdf_double(n, t);
      break;
    case CdfRoute::Extended:
      p = entrance_cdf_extended(n, t);
      break;
    case CdfRoute::Uniformized:
    case CdfRoute::Automatic:
      p = entrance_cdf_uniformized(n, t);
      break;
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace {

// Poisson(mu) probabilities on [lo, hi], built outward from the mode by the
// ratio recurrence and normalized to unit total.
std::vector<double> poisson_window(double mu, std::size_t lo, std::size_t hi) {
  std::vector<double> w(hi - lo + 1, 0.0);
  const auto mode = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(mu)), lo, hi);
  w[mode - lo] = 1.0;
  for (std::size_t m = mode; m < hi; ++m)
    w[m + 1 - lo] = w[m - lo] * mu / static_cast<double>(m + 1);
  for (std::size_t m = mode; m > lo; --m) w[m - 1 - lo] = w[m - lo] * static_cast<double>(m) / mu;
  CompensatedSum total;
  for (double x : w) total.add(x);
  const double norm = total.value();
  for (double& x : w) x /= norm;
  return w;
}

}  // namespace

DistributionTable birth_distribution(double t, std::size_t n_max, double deficit_cap) {
  std::vector<double> rates(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) rates[n] = 1.0 / static_cast<double>(n + 1);
  return birth_distribution(t, n_max, rates, deficit_cap);
}

DistributionTable birth_distribution(double t, std::size_t n_max,
                                     std::span<const double> rates, double deficit_cap) {
  require(t >= 0.0 && std::isfinite(t), "birth_distribution: t must be finite and >= 0");
  require(n_max >= 1, "birth_distribution: n_max must be at least 1");
  require(rates.size() >= n_max + 1, "birth_distribution: a rate is needed for every state");
  const double lambda = *std::max_element(rates.begin(), rates.begin() + n_max + 1);
  require(lambda > 0.0 && std::isfinite(lambda), "birth_distribution: rates must be positive");
  for (std::size_t n = 0; n <= n_max; ++n)
    require(rates[n] > 0.0, "birth_distribution: rates must be positive");

  DistributionTable table;
  table.horizon = t;
  table.probs.assign(n_max + 1, 0.0);
  if (t == 0.0) {
    table.probs[0] = 1.0;
    return table;
  }

  // Uniformized chain: Poisson(lambda t) clock steps, jump with rate/lambda.
  const double mu = lambda * t;
  const double spread = 12.0 * std::sqrt(mu) + 20.0;
  const auto m_hi = static_cast<std::size_t>(std::ceil(mu + spread));
  const auto m_lo = static_cast<std::size_t>(std::max(0.0, std::floor(mu - spread)));
  const std::vector<double> weights = poisson_window(mu, m_lo, m_hi);

  std::vector<double> jump(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) jump[n] = rates[n] / lambda;

  constexpr double kNegligible = 1e-40;
  std::vector<double> state(n_max + 2, 0.0);  // last slot: beyond n_max
  std::vector<double> acc(n_max + 2, 0.0);
  double dropped = 0.0;
  state[0] = 1.0;
  std::size_t lo = 0;
  std::size_t hi = 0;  // highest occupied index <= n_max
  for (std::size_t m = 0; m <= m_hi; ++m) {
    if (m >= m_lo) {
      const double w = weights[m - m_lo];
      for (std::size_t n = lo; n <= hi; ++n) acc[n] += w * state[n];
      acc[n_max + 1] += w * state[n_max + 1];
    }
    if (m == m_hi) break;
    for (std::size_t n = hi + 1; n-- > lo;) {
      const double move = state[n] * jump[n];
      state[n + 1] += move;
      state[n] -= move;
    }
    if (hi < n_max) ++hi;
    while (lo < hi && state[lo] < kNegligible) {
      dropped += state[lo];
      state[lo] = 0.0;
      ++lo;
    }
  }

  std::copy(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(n_max + 1),
            table.probs.begin());
  // Mass dropped from low states is charged to the deficit as well, which
  // keeps the deficit an upper bound on the tail beyond n_max.
  table.deficit = acc[n_max + 1] + dropped;
  if (table.deficit > deficit_cap) {
    throw TruncationError("birth_distribution: deficit exceeds cap", std::move(table));
  }
  return table;
}

std::size_t suggested_state_limit(double t) {
  const double root = std::sqrt(2.0 * std::max(t, 0.0));
  return static_cast<std::size_t>(std::ceil(root + 14.0 * std::sqrt(root / 3.0 + 1.0) + 30.0));
}

MomentPair zeta_moments(int n) {
  require(n >= 1, "zeta_moments: n must be positive");
  const auto x = static_cast<double>(n);
  return {x * (x + 1.0) / 2.0, x * (x + 1.0) * (2.0 * x + 1.0) / 6.0};
}

double log_waiting_time_mgf(double x, double z) {
  require(x >= 0.0 && std::isfinite(x), "waiting_time_mgf: x must be finite and >= 0");
  require(std::isfinite(z), "waiting_time_mgf: z must be finite");
  const double u = z * x;
  if (std::abs(u) < 1e-6) {
    // (e^u - u - 1)/z expanded to third order in z
    return z * x * x / 2.0 + z * z * x * x * x / 6.0 + z * z * z * x * x * x * x / 24.0;
  }
  return (std::expm1(u) - u) / z;
}

double waiting_time_mgf(double x, double z) {
  const double log_value = log_waiting_time_mgf(x, z);
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw RangeError("waiting_time_mgf: result overflows", log_value);
  }
  return std::exp(log_value);
}

double centered_exponential_moment(int m) {
  require(m >= 0, "centered_exponential_moment: m must be >= 0");
  double d = 1.0;  // D_0
  for (int k = 1; k <= m; ++k) d = k * d + ((k % 2 == 0) ? 1.0 : -1.0);
  return d;
}

}  // namespace pfp::analytic
