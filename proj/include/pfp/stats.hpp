#pragma once

// Seeded parallel Monte Carlo harness and the hypothesis tests used to check
// distributional identities.
//
// Determinism contract: replica r always draws from rng.substream(r);
// replicas are grouped into fixed chunks of kChunkSize and chunk results are
// merged in chunk order, so results depend on (seed, stream, reps) only and
// never on the worker count or scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "pfp/rng.hpp"

namespace pfp::stats {

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double se = 0.0;        // sqrt(variance / n)
  double skewness = 0.0;
  double excess_kurtosis = 0.0;

  /// Large-sample standard error of the sample variance.
  double variance_se() const;
};

/// One-pass central moments up to order four with an exact pairwise merge.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);
  SummaryStats summary() const;

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

/// Summary of a stored sample by a plain two-pass computation.
SummaryStats summarize(std::span<const double> values);

/// A kernel threw; carries where it happened.
class KernelError : public std::runtime_error {
 public:
  KernelError(const std::string& what, std::uint64_t replica, std::uint64_t seed,
              std::uint64_t stream)
      : std::runtime_error(what), replica_(replica), seed_(seed), stream_(stream) {}
  std::uint64_t replica() const { return replica_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t replica_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

inline constexpr std::size_t kChunkSize = 4096;

std::size_t default_workers();

/// Runs chunk(c, begin, end) for every chunk of [0, reps) on up to `workers`
/// threads. Exceptions are rethrown after all threads finish, lowest chunk first.
template <class ChunkFn>
void for_each_chunk(std::size_t reps, std::size_t workers, ChunkFn&& chunk) {
  const std::size_t chunks = (reps + kChunkSize - 1) / kChunkSize;
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t begin = c * kChunkSize;
      const std::size_t end = std::min(reps, begin + kChunkSize);
      try {
        chunk(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(chunks, 1));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

template <class Kernel>
auto run_replica(Kernel& kernel, const RngStream& rng, std::size_t replica) {
  RngStream local = rng.substream(replica);
  try {
    return kernel(local);
  } catch (const std::exception& e) {
    throw KernelError("kernel failed at replica " + std::to_string(replica) + " (seed " +
                          std::to_string(rng.seed()) + ", stream " +
                          std::to_string(rng.stream_id()) + "): " + e.what(),
                      replica, rng.seed(), rng.stream_id());
  }
}

}  // namespace detail

/// Moments of kernel(replica stream) over `reps` replicas.
template <class Kernel>
SummaryStats mc_estimate(Kernel&& kernel, std::size_t reps, const RngStream& rng,
                         std::size_t workers) {
  if (reps < 2) throw std::invalid_argument("mc_estimate: reps must be at least 2");
  std::vector<MomentAccumulator> partial((reps + kChunkSize - 1) / kChunkSize);
  for_each_chunk(reps, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    MomentAccumulator acc;
    for (std::size_t r = begin; r < end; ++r)
      acc.add(static_cast<double>(detail::run_replica(kernel, rng, r)));
    partial[c] = acc;
  });
  MomentAccumulator total;
  for (const auto& p : partial) total.merge(p);
  return total.summary();
}

/// Per-replica kernel results, in replica order.
template <class Kernel>
auto mc_collect(Kernel&& kernel, std::size_t reps, const RngStream& rng, std::size_t workers) {
  using Result = std::decay_t<decltype(kernel(std::declval<RngStream&>()))>;
  std::vector<Result> out(reps);
  for_each_chunk(reps, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) out[r] = detail::run_replica(kernel, rng, r);
  });
  return out;
}

// --- tests ----------------------------------------------------------------------

/// Kolmogorov limit survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// Ties were present: the continuous null is conservative, p_value is an
  /// upper bound.
  bool discrete = false;
};

/// Two-sample Kolmogorov-Smirnov on sorted samples.
KsResult ks_two_sample(std::span<const double> a_sorted, std::span<const double> b_sorted);

/// One-sample Kolmogorov-Smirnov against U(0,1) on a sorted sample.
KsResult ks_uniform(std::span<const double> sorted);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Adjacent bins are merged until every bin expects
/// at least `min_expected` counts; fewer than two merged bins is an error.
ChiSquareResult chi_square_gof(std::span<const std::size_t> observed,
                               std::span<const double> expected_probs,
                               double min_expected = 5.0);

/// Two-sided normal p-value for a standardized statistic.
double normal_two_sided_p(double z);

struct TailBoundRow {
  double z = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - empirical
};

struct TailBoundReport {
  int n = 0;
  std::size_t reps = 0;
  std::vector<TailBoundRow> rows;
  bool all_within = true;
  bool monotone = true;
};

/// Empirical P(|zeta_n - a_n| > z sd(zeta_n)) against 3 exp(-z/4).
TailBoundReport tail_bound_check(int n, std::size_t reps, std::span<const double> z_grid,
                                 const RngStream& rng, std::size_t workers);

}  // namespace pfp::stats
