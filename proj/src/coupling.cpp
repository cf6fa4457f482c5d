#include "pfp/coupling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "pfp/stats.hpp"

namespace pfp::coupling {

double surgery_map(double y, double prev, double cur) {
  const double h = cur - prev;
  if (y <= h) return y + (1.0 - cur);  // boundary points go with the lower slab
  if (y <= 1.0 - prev) return y - h;
  return y;
}

double surgery_unmap(double y, double prev, double cur) {
  const double h = cur - prev;
  if (y > 1.0 - prev) return y;
  if (y >= 1.0 - cur) return y - (1.0 - cur);
  return y + h;
}

void surgery_step(std::span<double> marks, double prev, double cur) {
  if (!(prev >= 0.0 && prev < cur && cur <= 1.0))
    throw CouplingInvariantError("surgery_step: need 0 <= prev < cur <= 1");
  for (double& y : marks) {
    if (!(y >= 0.0 && y <= 1.0)) throw CouplingInvariantError("surgery_step: mark outside [0, 1]");
    y = surgery_map(y, prev, cur);
  }
}

CouplingResult transform(const PlanarSample& sample, const ControlFunction& control) {
  policies::validate(sample);
  CouplingResult out;
  out.original = sample;
  out.i_trace = policies::run_i_policy(sample, control);
  out.displacement_log.resize(sample.points.size());

  std::vector<double> coords(sample.points.size());
  std::transform(sample.points.begin(), sample.points.end(), coords.begin(),
                 [](const auto& p) { return p.mark; });

  double prev = 0.0;
  for (std::size_t k = 0; k < out.i_trace.count(); ++k) {
    const std::size_t at = out.i_trace.indices[k];
    const double cur = out.i_trace.accepted[k].mark;
    // The selected atom was carried by the earlier steps onto cur - prev,
    // inside the band [0, 1 - prev] that this step cuts.
    const double expected = cur - prev;
    if (std::abs(coords[at] - expected) > 1e-12 || coords[at] > 1.0 - prev) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "transform: selection " << k + 1 << " sits at " << coords[at] << ", expected "
          << expected;
      throw CouplingInvariantError(msg.str());
    }
    auto later = std::span<double>(coords).subspan(at + 1);
    std::vector<double> before(later.begin(), later.end());
    surgery_step(later, prev, cur);
    for (std::size_t i = 0; i < later.size(); ++i)
      out.displacement_log[at + 1 + i].push_back({k + 1, before[i], later[i]});
    prev = cur;
  }

  out.transformed.horizon = sample.horizon;
  out.transformed.points.resize(sample.points.size());
  for (std::size_t i = 0; i < coords.size(); ++i)
    out.transformed.points[i] = {sample.points[i].time, coords[i]};
  out.b_trace = policies::run_b_policy(out.transformed, control);
  return out;
}

PlanarSample inverse_transform(const CouplingResult& result) {
  PlanarSample out = result.transformed;
  const auto& trace = result.i_trace;
  for (std::size_t k = trace.count(); k-- > 0;) {
    const double cur = trace.accepted[k].mark;
    const double prev = k == 0 ? 0.0 : trace.accepted[k - 1].mark;
    for (std::size_t i = trace.indices[k] + 1; i < out.points.size(); ++i)
      out.points[i].mark = surgery_unmap(out.points[i].mark, prev, cur);
  }
  return out;
}

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

CouplingReport verify_coupling(const PlanarSample& sample, const ControlFunction& control) {
  return verify_coupling(transform(sample, control), control);
}

CouplingReport verify_coupling(const CouplingResult& result, const ControlFunction& control) {
  CouplingReport report;
  const auto& orig = result.original.points;
  const auto& moved = result.transformed.points;
  const auto& it = result.i_trace;
  const auto& bt = result.b_trace;
  report.selections = it.count();

  auto fail = [&report](bool& flag, const std::string& why) {
    flag = false;
    if (report.failure.empty()) report.failure = why;
  };

  for (std::size_t i = 0; i < orig.size(); ++i) {
    if (!same_bits(orig[i].time, moved[i].time)) fail(report.times_preserved, "time changed");
    if (!(moved[i].mark >= 0.0 && moved[i].mark <= 1.0))
      fail(report.marks_in_range, "transformed mark outside [0, 1]");
  }
  if (it.count() != bt.count()) fail(report.counts_equal, "selection counts differ");
  if (it.indices != bt.indices)
    fail(report.acceptances_match, "b-policy accepts a different set of atoms");

  const std::size_t common = std::min(it.count(), bt.count());
  double prev = 0.0;
  for (std::size_t k = 0; k < common; ++k) {
    const double increment = bt.accepted[k].mark;
    if (std::abs(increment - (it.accepted[k].mark - prev)) > 1e-12 ||
        std::abs(bt.path[k] - it.path[k]) > 1e-12) {
      fail(report.telescoping, "b increments do not telescope to the i path");
      break;
    }
    prev = it.accepted[k].mark;
  }

  const PlanarSample restored = inverse_transform(result);
  for (std::size_t i = 0; i < orig.size(); ++i) {
    if (!same_bits(restored.points[i].mark, orig[i].mark) ||
        !same_bits(restored.points[i].time, orig[i].time)) {
      fail(report.inverse_exact, "inverse transform does not restore the sample");
      break;
    }
  }

  if (control.kind() == ControlFunction::Kind::Greedy) {
    std::vector<std::size_t> records;
    double best = 0.0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
      if (orig[i].mark > best) {
        best = orig[i].mark;
        records.push_back(i);
      }
    }
    if (records != it.indices) fail(report.greedy_records, "greedy run is not the record sequence");
  }
  return report;
}

PooledCouplingReport verify_coupling_pooled(double horizon, const ControlFunction& control,
                                            std::size_t realizations, const RngStream& rng,
                                            std::size_t workers) {
  struct Outcome {
    bool ok = true;
    std::string failure;
    std::size_t selections = 0;
    std::vector<double> marks;  // transformed, in time order
  };
  const auto outcomes = stats::mc_collect(
      [&](RngStream& r) {
        Outcome o;
        const CouplingResult res = transform(policies::sample_planar(horizon, r), control);
        const CouplingReport rep = verify_coupling(res, control);
        o.ok = rep.ok();
        o.failure = rep.failure;
        o.selections = rep.selections;
        o.marks.reserve(res.transformed.points.size());
        for (const auto& p : res.transformed.points) o.marks.push_back(p.mark);
        return o;
      },
      realizations, rng, workers);

  PooledCouplingReport out;
  out.realizations = realizations;
  std::vector<double> pooled;
  double serial_sum = 0.0;
  std::size_t pairs = 0;
  double selections = 0.0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    if (!o.ok) {
      ++out.deterministic_failures;
      out.failing_replicas.push_back(r);
      if (out.first_failure.empty())
        out.first_failure = "replica " + std::to_string(r) + " (seed " +
                            std::to_string(rng.seed()) + "): " + o.failure;
    }
    selections += static_cast<double>(o.selections);
    pooled.insert(pooled.end(), o.marks.begin(), o.marks.end());
    for (std::size_t i = 1; i < o.marks.size(); ++i) {
      serial_sum += (o.marks[i - 1] - 0.5) * (o.marks[i] - 0.5);
      ++pairs;
    }
  }
  out.mean_selections = realizations ? selections / static_cast<double>(realizations) : 0.0;
  out.pooled_marks = pooled.size();
  if (!pooled.empty()) {
    std::sort(pooled.begin(), pooled.end());
    const auto ks = stats::ks_uniform(pooled);
    out.uniformity_ks = ks.statistic;
    out.uniformity_p = ks.p_value;
  }
  if (pairs > 0) {
    // Under independence each product has mean 0 and variance 1/144.
    out.serial_z = serial_sum * 12.0 / std::sqrt(static_cast<double>(pairs));
    out.serial_p = stats::normal_two_sided_p(out.serial_z);
  }
  return out;
}

}  // namespace pfp::coupling
