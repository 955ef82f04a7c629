#include "wedgecap/fan_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

constexpr double kGridSlack = 1e-12;
constexpr double kKnotTol = 1e-12;

double grid_point(double eps_hi, int k, int ppd) {
  return eps_hi * std::pow(10.0, -static_cast<double>(k) / ppd);
}

bool grid_keeps(double eps_hi, int k, int ppd, double eps_lo) {
  return grid_point(eps_hi, k, ppd) >= eps_lo * (1.0 - kGridSlack);
}

// Largest k with eps_hi * 10^{-k/ppd} >= eps_lo.
int last_grid_index(double eps_hi, double eps_lo, int ppd) {
  int k = static_cast<int>(std::floor(ppd * std::log10(eps_hi / eps_lo)));
  k = std::max(k, 0);
  while (grid_keeps(eps_hi, k + 1, ppd, eps_lo)) ++k;
  while (k > 0 && !grid_keeps(eps_hi, k, ppd, eps_lo)) --k;
  return k;
}

double clamp_to_b(double value, double b) { return std::clamp(value, -b, b); }

bool same_point(double a, double b) { return std::abs(a - b) <= kKnotTol * std::max(std::abs(a), std::abs(b)); }

struct MergedProfile {
  std::vector<double> ends;    // change points followed by s_max
  std::vector<double> values;  // gamma on (ends[i-1], ends[i]]
};

MergedProfile merge_equal_neighbours(const ContactProfile& profile) {
  MergedProfile merged;
  const auto ends = profile.segment_ends();
  const auto values = profile.segment_values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!merged.values.empty() && merged.values.back() == values[i]) {
      merged.ends.back() = ends[i];
    } else {
      merged.ends.push_back(ends[i]);
      merged.values.push_back(values[i]);
    }
  }
  return merged;
}

bool is_change_point(const std::vector<double>& change_points, double x) {
  auto it = std::lower_bound(change_points.begin(), change_points.end(), x * (1.0 - kKnotTol));
  return it != change_points.end() && same_point(*it, x);
}

// Checks gamma(s / ratio) == gamma(s) on the part of (0, s0] lying above the
// truncation tail, and that at least two periods are available to compare.
bool self_similar_below(const ContactProfile& profile, const MergedProfile& merged, double s0,
                        double ratio) {
  std::vector<double> change_points(merged.ends.begin(), merged.ends.end() - 1);
  std::erase_if(change_points, [&](double c) { return c > s0 * (1.0 + kKnotTol); });
  if (change_points.empty()) return true;  // constant on (0, s0]

  // Below the first change point lies the truncation tail; it is not evidence.
  const double reliable = change_points.front();
  if (s0 / (ratio * ratio) < reliable * (1.0 - kKnotTol)) return false;

  for (double c : change_points) {
    const double down = c / ratio;
    if (down >= reliable * (1.0 - kKnotTol) && !is_change_point(change_points, down)) return false;
    const double up = c * ratio;
    if (up < s0 * (1.0 - kKnotTol) && !is_change_point(change_points, up)) return false;
  }
  // Values: compare each merged piece above the tail with its image one period down.
  for (std::size_t i = 1; i < merged.ends.size(); ++i) {
    const double lo = merged.ends[i - 1];
    const double hi = std::min(merged.ends[i], s0);
    if (hi <= lo) break;
    const double mid = 0.5 * (lo + hi);
    if (mid / ratio <= reliable) continue;
    if (profile.gamma_at(mid / ratio) != profile.gamma_at(mid)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(AdhesionKind kind) { return kind == AdhesionKind::I ? "I" : "S"; }

std::string_view to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::Sweep: return "sweep";
    case EstimateMethod::LogPeriodicExact: return "log_periodic_exact";
    case EstimateMethod::SequenceExact: return "sequence_exact";
  }
  return "sweep";
}

SweepConfig SweepConfig::defaults_for(const ContactProfile& profile, double b, double eps_lo,
                                      int points_per_decade) {
  require(b > 0.0, "sweep: b must be positive");
  return SweepConfig{profile.s_max() / b, eps_lo, points_per_decade};
}

void SweepConfig::validate(const ContactProfile& profile, double b) const {
  require(b > 0.0 && std::isfinite(b), "sweep: b must be positive");
  require(points_per_decade >= 8, "sweep: points_per_decade must be >= 8");
  require(eps_lo > 0.0 && eps_lo < eps_hi, "sweep: need 0 < eps_lo < eps_hi");
  require(b * eps_hi <= profile.s_max() * (1.0 + 1e-12), "sweep: b * eps_hi exceeds s_max");
}

std::vector<double> SweepConfig::grid() const {
  const int last = last_grid_index(eps_hi, eps_lo, points_per_decade);
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(last) + 1);
  for (int k = 0; k <= last; ++k) points.push_back(grid_point(eps_hi, k, points_per_decade));
  return points;
}

double SweepConfig::relative_spacing() const { return std::pow(10.0, 1.0 / points_per_decade) - 1.0; }

namespace {

AdhesionEstimate sweep_extremum(const ContactProfile& profile, double b, const SweepConfig& sweep,
                                AdhesionKind kind) {
  sweep.validate(profile, b);
  const auto grid = sweep.grid();
  require(!grid.empty(), "sweep: empty scale grid");
  double extremum = profile.averaged_cos(grid.front(), b);
  for (double eps : grid) {
    const double v = profile.averaged_cos(eps, b);
    extremum = kind == AdhesionKind::I ? std::min(extremum, v) : std::max(extremum, v);
  }
  return {b, kind, clamp_to_b(extremum, b), EstimateMethod::Sweep, b * sweep.relative_spacing()};
}

}  // namespace

AdhesionEstimate estimate_AI(const ContactProfile& profile, double b, const SweepConfig& sweep) {
  return sweep_extremum(profile, b, sweep, AdhesionKind::I);
}

AdhesionEstimate estimate_AS(const ContactProfile& profile, double b, const SweepConfig& sweep) {
  return sweep_extremum(profile, b, sweep, AdhesionKind::S);
}

LogPeriodicStructure::LogPeriodicStructure(const ContactProfile& profile, double ratio) : ratio_(ratio) {
  require(ratio > 1.0 && std::isfinite(ratio), "log-periodic ratio must exceed 1");
  const MergedProfile merged = merge_equal_neighbours(profile);

  std::vector<double> candidates{profile.s_max()};
  for (auto it = merged.ends.rbegin() + 1; it != merged.ends.rend(); ++it) candidates.push_back(*it);
  bool found = false;
  for (double s0 : candidates) {
    if (self_similar_below(profile, merged, s0, ratio)) {
      s0_ = s0;
      found = true;
      break;
    }
  }
  if (!found) fail(ErrorCode::NotSelfSimilar, "profile is not self-similar at the claimed ratio");

  const double bottom = s0_ / ratio_;
  knots_.push_back(bottom);
  for (std::size_t i = 0; i + 1 < merged.ends.size(); ++i) {
    const double c = merged.ends[i];
    if (c > bottom && c < s0_ && !same_point(c, bottom) && !same_point(c, s0_)) knots_.push_back(c);
  }
  knots_.push_back(s0_);

  double window_integral = 0.0;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double c = std::cos(profile.gamma_at(0.5 * (knots_[i] + knots_[i + 1])));
    values_.push_back(c);
    window_integral += (knots_[i + 1] - knots_[i]) * c;
  }
  // I(s0) = I(s0/ratio) + J and I(s0/ratio) = I(s0)/ratio.
  i_bottom_ = window_integral / (ratio_ - 1.0);

  min_mean_ = max_mean_ = mean_cos(knots_.front());
  for (double x : knots_) {
    const double m = mean_cos(x);
    min_mean_ = std::min(min_mean_, m);
    max_mean_ = std::max(max_mean_, m);
  }
}

double LogPeriodicStructure::mean_cos(double x) const {
  require(x >= knots_.front() * (1.0 - kKnotTol) && x <= knots_.back() * (1.0 + kKnotTol),
          "mean_cos: x outside the period window");
  double integral = i_bottom_;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double lo = knots_[i];
    const double hi = knots_[i + 1];
    if (x <= lo) break;
    integral += (std::min(x, hi) - lo) * values_[i];
  }
  return integral / x;
}

std::pair<AdhesionEstimate, AdhesionEstimate> exact_A_log_periodic(const ContactProfile& profile, double b,
                                                                   double ratio) {
  require(b > 0.0 && std::isfinite(b), "exact_A_log_periodic: b must be positive");
  const LogPeriodicStructure structure(profile, ratio);
  return {{b, AdhesionKind::I, clamp_to_b(b * structure.min_mean(), b), EstimateMethod::LogPeriodicExact, 0.0},
          {b, AdhesionKind::S, clamp_to_b(b * structure.max_mean(), b), EstimateMethod::LogPeriodicExact, 0.0}};
}

std::pair<AdhesionEstimate, AdhesionEstimate> exact_A_example1(double g1, double g2, double b) {
  require(g1 >= 0.0 && g1 <= std::numbers::pi && g2 >= 0.0 && g2 <= std::numbers::pi,
          "exact_A_example1: angles must lie in [0, pi]");
  require(b > 0.0 && std::isfinite(b), "exact_A_example1: b must be positive");
  // The sequences eps = c_{2j+1}/b and c_{2j}/b pick out the extreme blocks;
  // the two envelopes are ordered by the cosines, not by the labels g1, g2.
  const double c1 = std::cos(g1);
  const double c2 = std::cos(g2);
  return {{b, AdhesionKind::I, b * std::min(c1, c2), EstimateMethod::SequenceExact, 0.0},
          {b, AdhesionKind::S, b * std::max(c1, c2), EstimateMethod::SequenceExact, 0.0}};
}

SweepTable::SweepTable(const ContactProfile& profile, double eps_lo, int points_per_decade, double b_floor)
    : profile_(profile), eps_lo_(eps_lo), ppd_(points_per_decade), b_floor_(b_floor) {
  require(eps_lo > 0.0 && points_per_decade >= 8 && b_floor > 0.0, "sweep table: invalid configuration");
  const double s_max = profile_.s_max();
  const int last = last_grid_index(s_max / b_floor_, eps_lo_, ppd_);
  running_min_.reserve(static_cast<std::size_t>(last) + 1);
  running_max_.reserve(static_cast<std::size_t>(last) + 1);
  for (int k = 0; k <= last; ++k) {
    const double x = grid_point(s_max, k, ppd_);
    const double mean = profile_.cos_integral(x) / x;
    running_min_.push_back(k == 0 ? mean : std::min(running_min_.back(), mean));
    running_max_.push_back(k == 0 ? mean : std::max(running_max_.back(), mean));
  }
}

AdhesionEstimate SweepTable::estimate(AdhesionKind kind, double b) const {
  require(b > 0.0 && std::isfinite(b), "sweep table: b must be positive");
  const double eps_hi = profile_.s_max() / b;
  require(eps_lo_ < eps_hi, "sweep table: b too large for the scale floor");
  if (b < b_floor_) {
    const SweepConfig sweep{eps_hi, eps_lo_, ppd_};
    return kind == AdhesionKind::I ? estimate_AI(profile_, b, sweep) : estimate_AS(profile_, b, sweep);
  }
  const auto k = static_cast<std::size_t>(last_grid_index(eps_hi, eps_lo_, ppd_));
  const double mean = kind == AdhesionKind::I ? running_min_[k] : running_max_[k];
  const double spacing = std::pow(10.0, 1.0 / ppd_) - 1.0;
  return {b, kind, clamp_to_b(b * mean, b), EstimateMethod::Sweep, b * spacing};
}

}  // namespace wedgecap
