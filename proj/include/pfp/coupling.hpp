#pragma once

// Cut-and-stack transform of the planar sample that turns an i-selection run
// into a b-selection run with the same path.
//
// For the k-th selection (tau_k, xi_k), every point later than tau_k has its
// mark coordinate y remapped with h = xi_k - xi_{k-1}:
//   y in [0, h]              ->  y + (1 - xi_k)
//   y in (h, 1 - xi_{k-1}]   ->  y - h
//   y > 1 - xi_{k-1}         ->  unchanged
// Inductively the image of the still-acceptable band (xi_{k-1}, 1] is
// [0, 1 - xi_{k-1}], so the k-th selected atom lands at xi_k - xi_{k-1}.
//
// With marks on the 2^-53 grid every remap is exact in double precision, which
// makes the inverse transform restore the original sample bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfp/policies.hpp"
#include "pfp/rng.hpp"

namespace pfp::coupling {

using policies::ControlFunction;
using policies::PlanarSample;
using policies::SelectionTrace;

/// Raised when the inductive band invariant breaks.
class CouplingInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One remap applied to one point.
struct SurgeryRecord {
  std::size_t step = 0;  // 1-based selection index k
  double before = 0.0;
  double after = 0.0;
};

struct CouplingResult {
  PlanarSample original;
  PlanarSample transformed;
  SelectionTrace i_trace;
  SelectionTrace b_trace;
  /// displacement_log[i] lists the surgeries applied to point i, in order.
  std::vector<std::vector<SurgeryRecord>> displacement_log;
};

/// Maps one mark coordinate through the step with previous and current
/// selected marks `prev` < `cur`.
double surgery_map(double y, double prev, double cur);
/// Inverse of surgery_map.
double surgery_unmap(double y, double prev, double cur);

/// Applies one step to the coordinates of the points later than tau_k.
void surgery_step(std::span<double> marks, double prev, double cur);

CouplingResult transform(const PlanarSample& sample, const ControlFunction& control);

/// Replays the logged surgeries backwards.
PlanarSample inverse_transform(const CouplingResult& result);

/// Deterministic per-realization checks.
struct CouplingReport {
  bool times_preserved = true;
  bool acceptances_match = true;   // b-trace accepts the images of i-trace acceptances
  bool telescoping = true;         // partial sums of b increments equal i marks
  bool counts_equal = true;
  bool marks_in_range = true;
  bool inverse_exact = true;       // bit-for-bit recovery
  bool greedy_records = true;      // only checked for the greedy control
  std::size_t selections = 0;
  std::string failure;

  bool ok() const {
    return times_preserved && acceptances_match && telescoping && counts_equal &&
           marks_in_range && inverse_exact && greedy_records;
  }
};

CouplingReport verify_coupling(const PlanarSample& sample, const ControlFunction& control);
/// Same checks on an existing transform result.
CouplingReport verify_coupling(const CouplingResult& result, const ControlFunction& control);

/// Pooled statistical verification over many seeded realizations.
struct PooledCouplingReport {
  std::size_t realizations = 0;
  std::size_t deterministic_failures = 0;
  std::vector<std::uint64_t> failing_replicas;  // replica indices of failures
  std::string first_failure;
  std::size_t pooled_marks = 0;
  double uniformity_ks = 0.0;
  double uniformity_p = 1.0;
  double serial_z = 0.0;  // standardized lag-1 correlation of transformed marks
  double serial_p = 1.0;
  double mean_selections = 0.0;
};

PooledCouplingReport verify_coupling_pooled(double horizon, const ControlFunction& control,
                                            std::size_t realizations, const RngStream& rng,
                                            std::size_t workers);

}  // namespace pfp::coupling
