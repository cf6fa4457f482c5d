#include "pfp/processes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfp::processes {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace

void validate(const ArrivalSequence& arrivals) {
  double prev = 0.0;
  for (double x : arrivals.times) {
    if (!(x > prev)) {
      throw InvariantError(x == prev ? "arrival times contain a tie"
                                     : "arrival times are not increasing");
    }
    prev = x;
  }
  if (prev > arrivals.horizon) throw InvariantError("arrival time beyond horizon");
}

ArrivalSequence sample_arrivals(double horizon, RngStream& rng) {
  require(horizon >= 0.0 && std::isfinite(horizon), "sample_arrivals: bad horizon");
  ArrivalSequence out;
  out.horizon = horizon;
  double x = rng.exponential();
  while (x <= horizon) {
    out.times.push_back(x);
    const double next = x + rng.exponential();
    if (next == x) throw InvariantError("tie in sampled arrival times");
    x = next;
  }
  return out;
}

std::size_t exit_count(const ArrivalSequence& arrivals, double t) {
  require(t >= 0.0, "exit_count: t must be >= 0");
  double total = 0.0;
  for (std::size_t n = 0; n < arrivals.times.size(); ++n) {
    total += arrivals.times[n];
    if (total > t) return n;
  }
  // Unseen arrivals exceed the horizon, so the count is settled only if one
  // more of them would already overshoot.
  if (total + arrivals.horizon > t) return arrivals.times.size();
  throw HorizonError("exit_count: horizon " + std::to_string(arrivals.horizon) +
                     " too short for t = " + std::to_string(t));
}

std::size_t sample_exit_count(double t, RngStream& rng) {
  require(t >= 0.0, "exit_count: t must be >= 0");
  double arrival = 0.0;
  double total = 0.0;
  std::size_t n = 0;
  for (;;) {
    arrival += rng.exponential();
    total += arrival;
    if (total > t) return n;
    ++n;
  }
}

std::size_t entrance_count(double t, RngStream& rng) {
  require(t >= 0.0, "entrance_count: t must be >= 0");
  double zeta = 0.0;
  std::size_t n = 0;
  for (;;) {
    zeta += static_cast<double>(n + 1) * rng.exponential();
    if (zeta > t) return n;
    ++n;
  }
}

std::size_t entrance_count(const ArrivalSequence& arrivals, double t) {
  require(t >= 0.0, "entrance_count: t must be >= 0");
  double zeta = 0.0;
  double prev = 0.0;
  for (std::size_t n = 0; n < arrivals.times.size(); ++n) {
    zeta += static_cast<double>(n + 1) * (arrivals.times[n] - prev);
    prev = arrivals.times[n];
    if (zeta > t) return n;
  }
  // The next gap exceeds horizon - last arrival.
  const double k = static_cast<double>(arrivals.times.size() + 1);
  if (zeta + k * (arrivals.horizon - prev) > t) return arrivals.times.size();
  throw HorizonError("entrance_count: horizon too short for t = " + std::to_string(t));
}

PathFunctionals waiting_integrals(const ArrivalSequence& arrivals, double x) {
  if (x > arrivals.horizon) throw std::domain_error("waiting_integrals: x beyond horizon");
  require(x >= 0.0, "waiting_integrals: x must be >= 0");
  PathFunctionals out;
  out.x = x;
  for (double a : arrivals.times) {
    if (a > x) break;
    out.T += a;
    out.S += x - a;
    ++out.count;
  }
  return out;
}

bool inverse_identities_check(const ArrivalSequence& arrivals, double t) {
  validate(arrivals);
  const auto& pi = arrivals.times;

  // (a) X(t) = min{x : T(x) > t} is the arrival at which the running total
  // first passes t; Pi(X(t)) is its index.
  std::size_t pi_at_x = 0;
  double total = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    total += pi[k];
    if (total > t) {
      pi_at_x = k + 1;
      break;
    }
  }
  if (pi_at_x == 0) throw HorizonError("inverse_identities_check: T never passes t");
  const bool exit_ok = pi_at_x - 1 == exit_count(arrivals, t);

  // (b) S(x) + x is piecewise linear with slope Pi(x) + 1 and equals
  // k pi_k - (pi_1 + ... + pi_{k-1}) at x = pi_k. Solve on the segment.
  double level = 0.0;  // S + x at the left end of the segment
  double left = 0.0;
  std::size_t segment = 0;  // Pi on the segment
  double tau = -1.0;
  for (std::size_t k = 0; k <= pi.size(); ++k) {
    const double right = k < pi.size() ? pi[k] : arrivals.horizon;
    const double slope = static_cast<double>(segment + 1);
    const double next_level = level + slope * (right - left);
    if (next_level > t || (k == pi.size() && next_level >= t)) {
      tau = left + (t - level) / slope;
      break;
    }
    level = next_level;
    left = right;
    ++segment;
  }
  if (tau < 0.0) throw HorizonError("inverse_identities_check: S + x never passes t");
  const auto pi_at_tau = static_cast<std::size_t>(
      std::upper_bound(pi.begin(), pi.end(), tau) - pi.begin());
  const bool entrance_ok = pi_at_tau == entrance_count(arrivals, t);
  return exit_ok && entrance_ok;
}

std::size_t urn_count(double t, RngStream& rng) {
  require(t >= 0.0, "urn_count: t must be >= 0");
  std::size_t white = 0;
  double clock = rng.exponential();
  while (clock <= t) {
    const auto balls = static_cast<double>(white + 1);
    if (rng.uniform01() * balls < 1.0) ++white;  // the red ball was drawn
    clock += rng.exponential();
  }
  return white;
}

double urn_first_addition_time(RngStream& rng) {
  // With no white balls yet the urn holds only the red ball.
  return rng.exponential();
}

double sample_zeta(int n, RngStream& rng) {
  require(n >= 1, "sample_zeta: n must be positive");
  double zeta = 0.0;
  for (int j = 1; j <= n; ++j) zeta += j * rng.exponential();
  return zeta;
}

ArrivalFunctionals sample_at_arrival(int n, RngStream& rng) {
  require(n >= 1, "sample_at_arrival: n must be positive");
  std::vector<double> pi(static_cast<std::size_t>(n));
  double x = 0.0;
  for (auto& p : pi) p = x += rng.exponential();
  ArrivalFunctionals out;
  out.arrival = pi.back();
  for (double p : pi) {
    out.T += p;
    out.S += out.arrival - p;
  }
  return out;
}

}  // namespace pfp::processes
