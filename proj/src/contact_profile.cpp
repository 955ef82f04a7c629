#include "wedgecap/contact_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

constexpr double kPi = std::numbers::pi;

// Smallest binary exponent that keeps a power of two a normal double.
constexpr int kMinNormalExponent = -1022;

bool valid_angle(double g) { return std::isfinite(g) && g >= 0.0 && g <= kPi; }

}  // namespace

std::string_view to_string(Side side) { return side == Side::Plus ? "+" : "-"; }

WedgeGeometry::WedgeGeometry(double alpha) : alpha_(alpha), convex_(alpha <= kPi / 2) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= kPi,
          "wedge half-angle must lie in (0, pi]");
}

ContactProfile::ContactProfile(Side side, std::vector<double> breaks, std::vector<double> values,
                               double s_max, std::vector<PointAnnotation> annotations)
    : side_(side), annotations_(std::move(annotations)) {
  require(!breaks.empty(), "profile needs at least one segment");
  require(std::isfinite(s_max) && s_max > 0.0, "s_max must be positive");
  require(values.size() == breaks.size() || values.size() == breaks.size() + 1,
          "profile needs one value per break (plus an optional tail value)");
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const double lo = i == 0 ? 0.0 : breaks[i - 1];
    require(std::isfinite(breaks[i]) && breaks[i] > lo, "profile breaks must be strictly increasing and positive");
  }
  require(breaks.back() <= s_max, "profile breaks must not exceed s_max");
  for (double g : values) require(valid_angle(g), "contact angles must lie in [0, pi]");

  if (values.size() == breaks.size() + 1) {
    require(breaks.back() < s_max, "explicit tail value needs breaks.back() < s_max");
    breaks.push_back(s_max);
  } else if (breaks.back() < s_max) {
    breaks.push_back(s_max);
    values.push_back(values.back());
  }
  ends_ = std::move(breaks);
  values_ = std::move(values);

  cosines_.resize(values_.size());
  prefix_.resize(values_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    cosines_[i] = std::cos(values_[i]);
    const double lo = i == 0 ? 0.0 : ends_[i - 1];
    acc += (ends_[i] - lo) * cosines_[i];
    prefix_[i] = acc;
  }

  for (const auto& a : annotations_) {
    require(a.s > 0.0 && a.s <= s_max && valid_angle(a.gamma), "annotation out of range");
  }
}

std::size_t ContactProfile::segment_index(double s) const {
  // First segment whose right end is >= s, i.e. the one covering (lo, end].
  auto it = std::lower_bound(ends_.begin(), ends_.end(), s);
  if (it == ends_.end()) --it;
  return static_cast<std::size_t>(it - ends_.begin());
}

double ContactProfile::gamma_at(double s) const {
  require(s > 0.0 && s <= s_max(), "arclength outside (0, s_max]");
  return values_[segment_index(s)];
}

double ContactProfile::cos_integral(double x) const {
  require(x >= 0.0 && x <= s_max(), "cos_integral: x outside [0, s_max]");
  if (x == 0.0) return 0.0;
  const std::size_t i = segment_index(x);
  const double lo = i == 0 ? 0.0 : ends_[i - 1];
  const double below = i == 0 ? 0.0 : prefix_[i - 1];
  return below + (x - lo) * cosines_[i];
}

double ContactProfile::cos_integral(double x0, double x1) const {
  require(x0 <= x1, "cos_integral: reversed interval");
  return cos_integral(x1) - cos_integral(x0);
}

double ContactProfile::averaged_cos(double eps, double b) const {
  require(eps > 0.0 && b > 0.0, "averaged_cos: eps and b must be positive");
  double x = b * eps;
  // b * (s_max / b) can land one ulp above s_max.
  if (x > s_max() && x <= s_max() * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())) x = s_max();
  require(x <= s_max(), "averaged_cos: b*eps exceeds s_max");
  return cos_integral(x) / eps;
}

ContactProfile ContactProfile::with_side(Side side) const {
  ContactProfile copy = *this;
  copy.side_ = side;
  return copy;
}

ContactProfile make_piecewise(Side side, std::vector<double> breaks, std::vector<double> values,
                              double s_max) {
  return ContactProfile(side, std::move(breaks), std::move(values), s_max);
}

ContactProfile constant_profile(double gamma, double s_max, Side side) {
  return ContactProfile(side, {s_max}, {gamma}, s_max);
}

ContactProfile example1_profile(double g1, double g2, int depth, Side side) {
  require(valid_angle(g1) && valid_angle(g2), "example1: angles must lie in [0, pi]");
  require(depth >= 1, "example1: depth must be >= 1");
  require(-static_cast<long>(depth) * (depth + 1) >= kMinNormalExponent,
          "example1: depth " + std::to_string(depth) + " underflows double precision");

  std::vector<double> ends;
  std::vector<double> values;
  // Tail below the deepest block carries the deepest block's value.
  ends.push_back(std::ldexp(1.0, -depth * (depth + 1)));
  values.push_back(g2);
  for (int n = depth; n >= 1; --n) {
    ends.push_back(std::ldexp(1.0, -n * n));  // B_n = (2^{-n(n+1)}, 2^{-n^2}]
    values.push_back(g2);
    ends.push_back(std::ldexp(1.0, -n * (n - 1)));  // A_n = (2^{-n^2}, 2^{-n(n-1)}]
    values.push_back(g1);
  }
  return ContactProfile(side, std::move(ends), std::move(values), 1.0);
}

ContactProfile example2_profile(double g1, double g2, int depth, Side side) {
  require(valid_angle(g1) && valid_angle(g2), "example2: angles must lie in [0, pi]");
  require(depth >= 1, "example2: depth must be >= 1");
  require(-2L * depth >= kMinNormalExponent,
          "example2: depth " + std::to_string(depth) + " underflows double precision");

  std::vector<double> ends;
  std::vector<double> values;
  std::vector<PointAnnotation> notes;
  ends.push_back(std::ldexp(1.0, -2 * depth));
  values.push_back(g2);
  for (int n = depth; n >= 1; --n) {
    const double quarter = std::ldexp(1.0, -2 * n);  // 1/4^n
    ends.push_back(2.0 * quarter);  // B_n
    values.push_back(g2);
    ends.push_back(4.0 * quarter);  // A_n
    values.push_back(g1);
    notes.push_back({4.0 * quarter, kPi});
    notes.push_back({2.0 * quarter, 0.0});
  }
  return ContactProfile(side, std::move(ends), std::move(values), 1.0, std::move(notes));
}

EssentialRange essential_range(const ContactProfile& profile) {
  const auto values = profile.segment_values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

void GammaBoundsHypothesis::validate() const {
  for (double g : {lower_plus, upper_plus, lower_minus, upper_minus}) {
    require(valid_angle(g), "hypothesis bounds must lie in [0, pi]");
  }
  require(lower_plus <= upper_plus && lower_minus <= upper_minus,
          "hypothesis lower bound exceeds upper bound");
}

std::string_view to_string(Theorem1Applicability tag) {
  switch (tag) {
    case Theorem1Applicability::NonconvexOk: return "nonconvex_ok";
    case Theorem1Applicability::ConvexOk: return "convex_ok";
    case Theorem1Applicability::Fails: return "fails";
  }
  return "fails";
}

Theorem1Applicability theorem1_applicability(const WedgeGeometry& geometry,
                                             const GammaBoundsHypothesis& hypothesis) {
  hypothesis.validate();
  const double alpha = geometry.alpha();
  if (alpha > kPi / 2) return Theorem1Applicability::NonconvexOk;
  const double lower_sum = hypothesis.lower_plus + hypothesis.lower_minus;
  const double upper_sum = hypothesis.upper_plus + hypothesis.upper_minus;
  if (kPi - 2 * alpha < lower_sum && upper_sum < kPi + 2 * alpha) return Theorem1Applicability::ConvexOk;
  return Theorem1Applicability::Fails;
}

}  // namespace wedgecap
