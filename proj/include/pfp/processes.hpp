#pragma once

// Samplers and path functionals of the unit-rate Poisson process: the exit
// and entrance counts, the integrals T(x) and S(x), and the urn model.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pfp/rng.hpp"

namespace pfp::processes {

/// Arrival times of a unit-rate Poisson process observed on [0, horizon].
/// Times are strictly increasing and lie in (0, horizon].
struct ArrivalSequence {
  double horizon = 0.0;
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
};

/// T(x), S(x) and Pi(x) of one path, with T = x * count - S.
struct PathFunctionals {
  double x = 0.0;
  double T = 0.0;
  double S = 0.0;
  std::size_t count = 0;
};

/// The observed horizon does not determine the requested functional.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken ArrivalSequence invariant (ties, disorder, times outside the horizon).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

void validate(const ArrivalSequence& arrivals);

ArrivalSequence sample_arrivals(double horizon, RngStream& rng);

/// N(t) = max{n : pi_1 + ... + pi_n <= t} on a fixed realization.
/// Throws HorizonError when arrivals beyond the horizon could still count.
std::size_t exit_count(const ArrivalSequence& arrivals, double t);

/// N(t) on a fresh path, generating arrivals until the partial sum passes t.
std::size_t sample_exit_count(double t, RngStream& rng);

/// M(t) = max{n : zeta_n <= t}, zeta_n = sum_{j<=n} j eta_j, on a fresh path.
std::size_t entrance_count(double t, RngStream& rng);

/// M(t) computed from the gaps of a fixed realization.
std::size_t entrance_count(const ArrivalSequence& arrivals, double t);

PathFunctionals waiting_integrals(const ArrivalSequence& arrivals, double x);

/// Checks N(t) = Pi(X(t)) - 1 and M(t) = Pi(tau(t)) on one realization,
/// where X is the right-continuous inverse of T and tau solves S(tau)+tau = t.
bool inverse_identities_check(const ArrivalSequence& arrivals, double t);

/// White balls at time t in the urn that starts with one red ball and gains a
/// white ball whenever the red one is drawn; draws at unit Poisson rate.
std::size_t urn_count(double t, RngStream& rng);

/// Time of the first white-ball addition in the urn.
double urn_first_addition_time(RngStream& rng);

/// One draw of zeta_n.
double sample_zeta(int n, RngStream& rng);

/// T(pi_n) and S(pi_n) on a fresh path (pi_n is the n-th arrival time).
struct ArrivalFunctionals {
  double arrival = 0.0;  // pi_n
  double T = 0.0;        // pi_1 + ... + pi_n
  double S = 0.0;        // sum_{j<n} (pi_n - pi_j)
};
ArrivalFunctionals sample_at_arrival(int n, RngStream& rng);

}  // namespace pfp::processes
