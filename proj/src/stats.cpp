#include "pfp/stats.hpp"

#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "pfp/analytic.hpp"
#include "pfp/processes.hpp"

namespace pfp::stats {

double SummaryStats::variance_se() const {
  if (n < 2) return 0.0;
  return variance * std::sqrt(std::max(excess_kurtosis + 2.0, 0.0) / static_cast<double>(n));
}

void MomentAccumulator::add(double x) {
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
  m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double delta = o.mean_ - mean_;
  const double d2 = delta * delta;
  const double d3 = d2 * delta;
  const double d4 = d2 * d2;

  const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
  const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                    3.0 * delta * (na * o.m2_ - nb * m2_) / n;
  const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                    4.0 * delta * (na * o.m3_ - nb * m3_) / n;
  mean_ += delta * nb / n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  n_ += o.n_;
}

SummaryStats MomentAccumulator::summary() const {
  SummaryStats s;
  s.n = n_;
  s.mean = mean_;
  if (n_ >= 2) {
    const double n = static_cast<double>(n_);
    s.variance = std::max(m2_, 0.0) / (n - 1.0);
    s.se = std::sqrt(s.variance / n);
    if (m2_ > 0.0) {
      s.skewness = std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
      s.excess_kurtosis = n * m4_ / (m2_ * m2_) - 3.0;
    }
  }
  return s;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.n = values.size();
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : values) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  if (values.size() >= 2) {
    s.variance = m2 / (n - 1.0);
    s.se = std::sqrt(s.variance / n);
    if (m2 > 0.0) {
      s.skewness = std::sqrt(n) * m3 / std::pow(m2, 1.5);
      s.excess_kurtosis = n * m4 / (m2 * m2) - 3.0;
    }
  }
  return s;
}

std::size_t default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // Q(0.2) = 1 - 1e-11
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
    throw std::invalid_argument("ks_two_sample: samples must be sorted");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  KsResult out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    std::size_t i0 = i;
    std::size_t j0 = j;
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    if (i - i0 > 1 || j - j0 > 1 || (i > i0 && j > j0)) out.discrete = true;
    out.statistic = std::max(out.statistic, std::abs(static_cast<double>(i) / na -
                                                     static_cast<double>(j) / nb));
  }
  // Past the end of one sample the distance only shrinks.
  for (std::size_t k = i + 1; k < a.size() && !out.discrete; ++k)
    if (a[k] == a[k - 1]) out.discrete = true;
  for (std::size_t k = j + 1; k < b.size() && !out.discrete; ++k)
    if (b[k] == b[k - 1]) out.discrete = true;
  const double ne = std::sqrt(na * nb / (na + nb));
  out.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * out.statistic);
  return out;
}

KsResult ks_uniform(std::span<const double> sorted) {
  if (sorted.empty()) throw std::invalid_argument("ks_uniform: empty sample");
  if (!std::is_sorted(sorted.begin(), sorted.end()))
    throw std::invalid_argument("ks_uniform: sample must be sorted");
  const double n = static_cast<double>(sorted.size());
  KsResult out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = std::clamp(sorted[i], 0.0, 1.0);
    const double di = static_cast<double>(i);
    out.statistic = std::max({out.statistic, (di + 1.0) / n - x, x - di / n});
    if (i > 0 && sorted[i] == sorted[i - 1]) out.discrete = true;
  }
  const double rn = std::sqrt(n);
  out.p_value = kolmogorov_survival((rn + 0.12 + 0.11 / rn) * out.statistic);
  return out;
}

ChiSquareResult chi_square_gof(std::span<const std::size_t> observed,
                               std::span<const double> expected_probs, double min_expected) {
  if (observed.size() != expected_probs.size())
    throw std::invalid_argument("chi_square_gof: observed and expected differ in length");
  const double total_p = std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);
  if (std::abs(total_p - 1.0) > 1e-6)
    throw std::invalid_argument("chi_square_gof: expected probabilities must sum to 1");
  const double total = static_cast<double>(
      std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  if (total <= 0.0) throw std::invalid_argument("chi_square_gof: no observations");

  struct Bin {
    double observed = 0.0;
    double expected = 0.0;
  };
  std::vector<Bin> bins;
  Bin current;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    current.observed += static_cast<double>(observed[i]);
    current.expected += total * expected_probs[i];
    if (current.expected >= min_expected) {
      bins.push_back(current);
      current = {};
    }
  }
  if (current.expected > 0.0 || current.observed > 0.0) {
    if (bins.empty()) {
      bins.push_back(current);
    } else {
      bins.back().observed += current.observed;
      bins.back().expected += current.expected;
    }
  }
  if (bins.size() < 2) throw std::invalid_argument("chi_square_gof: degenerate binning");

  ChiSquareResult out;
  for (const auto& b : bins) {
    if (b.expected <= 0.0) throw std::invalid_argument("chi_square_gof: empty expected bin");
    const double d = b.observed - b.expected;
    out.statistic += d * d / b.expected;
  }
  out.dof = bins.size() - 1;
  const boost::math::chi_squared dist(static_cast<double>(out.dof));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

TailBoundReport tail_bound_check(int n, std::size_t reps, std::span<const double> z_grid,
                                 const RngStream& rng, std::size_t workers) {
  if (n < 1) throw std::invalid_argument("tail_bound_check: n must be positive");
  for (double z : z_grid)
    if (!(z >= 0.0)) throw std::invalid_argument("tail_bound_check: z must be >= 0");
  const auto moments = analytic::zeta_moments(n);
  const double sd = std::sqrt(moments.variance);
  auto deviations = mc_collect(
      [&](RngStream& r) { return std::abs(processes::sample_zeta(n, r) - moments.mean); }, reps,
      rng, workers);
  std::sort(deviations.begin(), deviations.end());

  TailBoundReport out;
  out.n = n;
  out.reps = reps;
  double prev = 2.0;
  std::vector<double> zs(z_grid.begin(), z_grid.end());
  std::sort(zs.begin(), zs.end());
  for (double z : zs) {
    const auto above = deviations.end() -
                       std::upper_bound(deviations.begin(), deviations.end(), z * sd);
    TailBoundRow row;
    row.z = z;
    row.empirical = static_cast<double>(above) / static_cast<double>(reps);
    row.bound = 3.0 * std::exp(-z / 4.0);
    row.margin = row.bound - row.empirical;
    out.all_within = out.all_within && row.empirical <= row.bound;
    out.monotone = out.monotone && row.empirical <= prev;
    prev = row.empirical;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace pfp::stats
