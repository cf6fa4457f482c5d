#pragma once

// Online selection from a planar Poisson sample on [0, t] x [0, 1] under a
// monotonicity constraint (i-policies) or a unit sum constraint (b-policies),
// plus the offline benchmarks: smallest-first packing and patience sorting.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfp/rng.hpp"

namespace pfp::policies {

/// Mark `mark` arriving at time `time`.
struct MarkedPoint {
  double time = 0.0;
  double mark = 0.0;

  friend bool operator==(const MarkedPoint&, const MarkedPoint&) = default;
};

/// Planar Poisson sample on [0, horizon] x [0, 1], sorted by time.
struct PlanarSample {
  double horizon = 0.0;
  std::vector<MarkedPoint> points;
};

void validate(const PlanarSample& sample);

/// Unit-rate planar sample; marks lie on the 2^-53 grid.
PlanarSample sample_planar(double horizon, RngStream& rng);

/// Acceptance-window control psi. Values are always in [0, 1].
class ControlFunction {
 public:
  enum class Kind { Optimal, Greedy, Stationary, Threshold, Custom };

  /// Asymptotically optimal psi*(z) = sqrt(2/z) - 1/(3z), equal to 1 for
  /// z <= optimal_crossover() where the formula first reaches 1.
  static ControlFunction optimal();
  static ControlFunction greedy();
  /// Constant min(sqrt(2/t), 1) for global horizon t.
  static ControlFunction stationary(double horizon);
  /// Fixed mark threshold; evaluated by threshold_count, not by value().
  static ControlFunction threshold(double theta);
  /// Linear interpolation through (z, psi) knots with strictly increasing z;
  /// psi is clamped to [0, 1] and held constant outside the table.
  static ControlFunction custom(std::vector<std::pair<double, double>> table);
  /// Reads whitespace-separated "z psi" lines; '#' starts a comment.
  static ControlFunction custom_from_file(const std::string& path);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

  double value(double z) const;
  /// Psi(z) = integral of psi over [0, z].
  double integral(double z) const;
  /// Largest z with Psi(z) <= level, for 0 <= level <= Psi(upper).
  double integral_inverse(double level, double upper) const;

  std::string name() const;

  static double optimal_crossover();

 private:
  ControlFunction(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_ = 0.0;
  std::vector<std::pair<double, double>> table_;
  std::vector<double> cumulative_;  // Psi at each knot (Custom only)
};

/// psi(z) for the given control; the horizon only matters for Stationary,
/// which already carries it.
double control_value(const ControlFunction& control, double z);

enum class SelectionKind { Increasing, Bounded };

/// Accepted points and the running value (maximum for Increasing, sum for
/// Bounded) after each acceptance.
struct SelectionTrace {
  SelectionKind kind = SelectionKind::Increasing;
  std::vector<MarkedPoint> accepted;
  std::vector<double> path;
  std::vector<std::size_t> indices;  // positions of accepted points in the sample

  std::size_t count() const { return accepted.size(); }
};

SelectionTrace run_i_policy(const PlanarSample& sample, const ControlFunction& control);
SelectionTrace run_b_policy(const PlanarSample& sample, const ControlFunction& control);

/// Number of marks <= theta.
std::size_t threshold_count(const PlanarSample& sample, double theta);

/// Longest prefix of the ascending items whose sum stays <= capacity.
std::size_t smallest_first_count(std::span<const double> items, double capacity);

/// Longest strictly increasing subsequence of marks in time order.
std::size_t lis_length(const PlanarSample& sample);

/// Count of an online policy with horizon t, sampled without materializing
/// the point scatter: the next acceptance is found by inverting the
/// integrated acceptance rate Psi. Same law as run_i_policy/run_b_policy.
std::size_t sample_online_count(double horizon, const ControlFunction& control,
                                RngStream& rng);

/// Smallest-first count for n iid uniform items; ascending order statistics
/// are generated one at a time.
std::size_t sample_smallest_first_uniform(std::size_t n, double capacity, RngStream& rng);

/// Smallest-first count for a rate-`rate` Poisson scatter of item sizes on
/// [0, 1] and bin capacity `capacity`.
std::size_t sample_poisson_packing(double rate, double capacity, RngStream& rng);

}  // namespace pfp::policies
