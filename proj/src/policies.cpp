#include "pfp/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace pfp::policies {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// (2 + sqrt 3) / 3: the smaller root of sqrt(2/z) - 1/(3z) = 1.
const double kOptimalCrossover = (2.0 + std::numbers::sqrt3) / 3.0;

double optimal_formula(double z) { return std::sqrt(2.0 / z) - 1.0 / (3.0 * z); }

// Antiderivative of the formula part, up to a constant.
double optimal_primitive(double z) {
  return 2.0 * std::numbers::sqrt2 * std::sqrt(z) - std::log(z) / 3.0;
}

}  // namespace

void validate(const PlanarSample& sample) {
  double prev = -1.0;
  for (const auto& p : sample.points) {
    if (!(p.time > prev)) throw std::invalid_argument("planar sample times must increase");
    if (p.time < 0.0 || p.time > sample.horizon)
      throw std::invalid_argument("planar sample time outside [0, horizon]");
    if (!(p.mark >= 0.0 && p.mark <= 1.0))
      throw std::invalid_argument("planar sample mark outside [0, 1]");
    prev = p.time;
  }
}

PlanarSample sample_planar(double horizon, RngStream& rng) {
  require(horizon >= 0.0 && std::isfinite(horizon), "sample_planar: bad horizon");
  PlanarSample out;
  out.horizon = horizon;
  for (double x = rng.exponential(); x <= horizon; x += rng.exponential()) {
    out.points.push_back({x, rng.uniform01()});
  }
  return out;
}

// --- ControlFunction ------------------------------------------------------------

ControlFunction ControlFunction::optimal() { return {Kind::Optimal, 0.0}; }
ControlFunction ControlFunction::greedy() { return {Kind::Greedy, 1.0}; }

ControlFunction ControlFunction::stationary(double horizon) {
  require(horizon > 0.0, "stationary control needs a positive horizon");
  return {Kind::Stationary, std::min(std::sqrt(2.0 / horizon), 1.0)};
}

ControlFunction ControlFunction::threshold(double theta) {
  require(theta >= 0.0 && theta <= 1.0, "threshold must lie in [0, 1]");
  return {Kind::Threshold, theta};
}

ControlFunction ControlFunction::custom(std::vector<std::pair<double, double>> table) {
  require(!table.empty(), "custom control needs at least one knot");
  for (std::size_t i = 0; i < table.size(); ++i) {
    require(std::isfinite(table[i].first) && std::isfinite(table[i].second),
            "custom control knots must be finite");
    require(table[i].first >= 0.0, "custom control knots must have z >= 0");
    if (i > 0) require(table[i].first > table[i - 1].first, "custom control z must increase");
    table[i].second = std::clamp(table[i].second, 0.0, 1.0);
  }
  ControlFunction out(Kind::Custom, 0.0);
  out.table_ = std::move(table);
  // Psi at each knot; psi is held at the first value on [0, z_0].
  out.cumulative_.resize(out.table_.size());
  out.cumulative_[0] = out.table_[0].second * out.table_[0].first;
  for (std::size_t i = 1; i < out.table_.size(); ++i) {
    const auto [z0, p0] = out.table_[i - 1];
    const auto [z1, p1] = out.table_[i];
    out.cumulative_[i] = out.cumulative_[i - 1] + 0.5 * (p0 + p1) * (z1 - z0);
  }
  return out;
}

ControlFunction ControlFunction::custom_from_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open control table " + path);
  std::vector<std::pair<double, double>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double z = 0.0;
    double psi = 0.0;
    if (!(fields >> z)) continue;
    require(static_cast<bool>(fields >> psi), "malformed control table line: " + line);
    table.emplace_back(z, psi);
  }
  return custom(std::move(table));
}

double ControlFunction::optimal_crossover() { return kOptimalCrossover; }

double ControlFunction::value(double z) const {
  require(z >= 0.0, "control evaluated at negative z");
  switch (kind_) {
    case Kind::Optimal:
      return z <= kOptimalCrossover ? 1.0 : std::clamp(optimal_formula(z), 0.0, 1.0);
    case Kind::Greedy:
    case Kind::Stationary:
      return parameter_;
    case Kind::Threshold:
      throw std::logic_error("threshold control is evaluated by threshold_count");
    case Kind::Custom: {
      if (z <= table_.front().first) return table_.front().second;
      if (z >= table_.back().first) return table_.back().second;
      const auto it = std::upper_bound(table_.begin(), table_.end(), z,
                                       [](double v, const auto& knot) { return v < knot.first; });
      const auto& [z1, p1] = *it;
      const auto& [z0, p0] = *(it - 1);
      return std::clamp(p0 + (p1 - p0) * (z - z0) / (z1 - z0), 0.0, 1.0);
    }
  }
  return 0.0;
}

double ControlFunction::integral(double z) const {
  require(z >= 0.0, "control integral at negative z");
  switch (kind_) {
    case Kind::Optimal:
      if (z <= kOptimalCrossover) return z;
      return kOptimalCrossover + optimal_primitive(z) - optimal_primitive(kOptimalCrossover);
    case Kind::Greedy:
    case Kind::Stationary:
      return parameter_ * z;
    case Kind::Threshold:
      throw std::logic_error("threshold control is evaluated by threshold_count");
    case Kind::Custom: {
      if (z <= table_.front().first) return table_.front().second * z;
      if (z >= table_.back().first)
        return cumulative_.back() + table_.back().second * (z - table_.back().first);
      const auto i = static_cast<std::size_t>(
          std::upper_bound(table_.begin(), table_.end(), z,
                           [](double v, const auto& knot) { return v < knot.first; }) -
          table_.begin());
      const auto [z0, p0] = table_[i - 1];
      return cumulative_[i - 1] + 0.5 * (p0 + value(z)) * (z - z0);
    }
  }
  return 0.0;
}

double ControlFunction::integral_inverse(double level, double upper) const {
  require(level >= 0.0, "control integral inverse at negative level");
  switch (kind_) {
    case Kind::Optimal: {
      if (level <= kOptimalCrossover) return level;
      // Solve 2 sqrt2 s - (2/3) log s = c for s = sqrt z > sqrt(crossover);
      // the left side is convex and increasing there.
      const double c = level - kOptimalCrossover + optimal_primitive(kOptimalCrossover);
      double s = std::max(c / (2.0 * std::numbers::sqrt2), std::sqrt(kOptimalCrossover));
      for (int iter = 0; iter < 50; ++iter) {
        const double h = 2.0 * std::numbers::sqrt2 * s - 2.0 * std::log(s) / 3.0 - c;
        const double step = h / (2.0 * std::numbers::sqrt2 - 2.0 / (3.0 * s));
        s -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * s) break;
      }
      return std::min(s * s, upper);
    }
    case Kind::Greedy:
    case Kind::Stationary:
      return parameter_ > 0.0 ? std::min(level / parameter_, upper) : upper;
    case Kind::Threshold:
      throw std::logic_error("threshold control is evaluated by threshold_count");
    case Kind::Custom: {
      // Bisection on the nondecreasing primitive; exact enough for sampling.
      double lo = 0.0;
      double hi = upper;
      for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (integral(mid) <= level)
          lo = mid;
        else
          hi = mid;
      }
      return lo;
    }
  }
  return upper;
}

std::string ControlFunction::name() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Optimal:
      return "optimal";
    case Kind::Greedy:
      return "greedy";
    case Kind::Stationary:
      os << "stationary(" << parameter_ << ")";
      return os.str();
    case Kind::Threshold:
      os << "threshold=" << parameter_;
      return os.str();
    case Kind::Custom:
      os << "custom(" << table_.size() << " knots)";
      return os.str();
  }
  return "unknown";
}

double control_value(const ControlFunction& control, double z) { return control.value(z); }

// --- policies -----------------------------------------------------------------------

SelectionTrace run_i_policy(const PlanarSample& sample, const ControlFunction& control) {
  SelectionTrace trace;
  trace.kind = SelectionKind::Increasing;
  const double t = sample.horizon;
  double x = 0.0;  // last selected mark
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const auto& p = sample.points[i];
    const double room = 1.0 - x;
    if (!(room > 0.0)) break;
    const double relative = (p.mark - x) / room;
    if (relative > 0.0 && relative <= control.value((t - p.time) * room)) {
      x = p.mark;
      trace.accepted.push_back(p);
      trace.path.push_back(x);
      trace.indices.push_back(i);
    }
  }
  return trace;
}

SelectionTrace run_b_policy(const PlanarSample& sample, const ControlFunction& control) {
  SelectionTrace trace;
  trace.kind = SelectionKind::Bounded;
  const double t = sample.horizon;
  double x = 0.0;  // running sum
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const auto& p = sample.points[i];
    const double room = 1.0 - x;
    if (!(room > 0.0)) break;
    const double relative = p.mark / room;
    if (relative > 0.0 && relative <= control.value((t - p.time) * room)) {
      x += p.mark;
      trace.accepted.push_back(p);
      trace.path.push_back(x);
      trace.indices.push_back(i);
    }
  }
  return trace;
}

std::size_t threshold_count(const PlanarSample& sample, double theta) {
  require(theta >= 0.0 && theta <= 1.0, "threshold must lie in [0, 1]");
  return static_cast<std::size_t>(std::count_if(
      sample.points.begin(), sample.points.end(),
      [theta](const MarkedPoint& p) { return p.mark <= theta; }));
}

std::size_t smallest_first_count(std::span<const double> items, double capacity) {
  require(capacity > 0.0, "smallest_first_count: capacity must be positive");
  std::vector<double> sorted(items.begin(), items.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    total += sorted[k];
    if (total > capacity) return k;
  }
  return sorted.size();
}

std::size_t lis_length(const PlanarSample& sample) {
  // tops[k] is the smallest possible last mark of an increasing run of length k+1.
  std::vector<double> tops;
  for (const auto& p : sample.points) {
    const auto it = std::lower_bound(tops.begin(), tops.end(), p.mark);
    if (it == tops.end())
      tops.push_back(p.mark);
    else
      *it = p.mark;
  }
  return tops.size();
}

std::size_t sample_online_count(double horizon, const ControlFunction& control,
                                RngStream& rng) {
  require(horizon >= 0.0, "sample_online_count: horizon must be >= 0");
  // State z = (t - s)(1 - x): remaining time times remaining room. Acceptable
  // arrivals come at rate psi(z) per unit of z, so the next acceptance sits
  // where Psi has dropped by a unit exponential; the accepted relative
  // increment is uniform on (0, psi].
  double z = horizon;
  std::size_t count = 0;
  for (;;) {
    const double level = control.integral(z) - rng.exponential();
    if (!(level > 0.0)) return count;
    const double z_hit = control.integral_inverse(level, z);
    const double window = control.value(z_hit);
    if (!(window > 0.0)) return count;
    z = z_hit * (1.0 - rng.open_uniform() * window);
    ++count;
  }
}

std::size_t sample_smallest_first_uniform(std::size_t n, double capacity, RngStream& rng) {
  require(capacity > 0.0, "capacity must be positive");
  // log(1 - u_(k)) decreases by an exponential over (n - k) at each step.
  double log_survival = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    log_survival -= rng.exponential() / static_cast<double>(n - k);
    total += -std::expm1(log_survival);
    if (total > capacity) return k;
  }
  return n;
}

std::size_t sample_poisson_packing(double rate, double capacity, RngStream& rng) {
  require(rate >= 0.0 && capacity > 0.0, "sample_poisson_packing: bad arguments");
  double position = 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (;;) {
    position += rng.exponential() / rate;
    if (position > 1.0) return count;
    total += position;
    if (total > capacity) return count;
    ++count;
  }
}

}  // namespace pfp::policies
