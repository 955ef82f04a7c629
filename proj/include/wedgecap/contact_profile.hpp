#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace wedgecap {

enum class Side { Plus, Minus };

std::string_view to_string(Side side);

/// Wedge of half-opening `alpha` about the positive x-axis, corner at the origin.
class WedgeGeometry {
 public:
  explicit WedgeGeometry(double alpha);

  double alpha() const noexcept { return alpha_; }
  bool convex() const noexcept { return convex_; }

 private:
  double alpha_;
  bool convex_;
};

struct PointAnnotation {
  double s;
  double gamma;
};

/// Piecewise-constant contact angle along one wall, parametrized by arclength
/// from the corner. Segment i covers (end[i-1], end[i]] with end[-1] = 0; the
/// last end is s_max. Integrals of cos(gamma) are exact prefix sums.
class ContactProfile {
 public:
  /// `values` has either breaks.size() entries (the last value also covers
  /// (breaks.back(), s_max]) or breaks.size() + 1 entries (explicit tail value).
  ContactProfile(Side side, std::vector<double> breaks, std::vector<double> values, double s_max,
                 std::vector<PointAnnotation> annotations = {});

  Side side() const noexcept { return side_; }
  double s_max() const noexcept { return ends_.back(); }

  std::span<const double> segment_ends() const noexcept { return ends_; }
  std::span<const double> segment_values() const noexcept { return values_; }
  std::span<const PointAnnotation> annotations() const noexcept { return annotations_; }
  std::size_t segment_count() const noexcept { return values_.size(); }

  /// gamma on the segment covering s; annotations are ignored.
  double gamma_at(double s) const;

  /// Exact integral of cos(gamma) over (0, x], 0 <= x <= s_max.
  double cos_integral(double x) const;

  /// Exact integral of cos(gamma) over (x0, x1].
  double cos_integral(double x0, double x1) const;

  /// (1/eps) * integral of cos(gamma) over (0, b*eps).
  double averaged_cos(double eps, double b) const;

  /// Same profile with the wall tag replaced.
  ContactProfile with_side(Side side) const;

 private:
  std::size_t segment_index(double s) const;

  Side side_;
  std::vector<double> ends_;
  std::vector<double> values_;
  std::vector<double> cosines_;
  std::vector<double> prefix_;  // prefix_[i] = integral over (0, ends_[i]]
  std::vector<PointAnnotation> annotations_;
};

ContactProfile make_piecewise(Side side, std::vector<double> breaks, std::vector<double> values,
                              double s_max);

ContactProfile constant_profile(double gamma, double s_max = 1.0, Side side = Side::Plus);

/// Blocks (2^{-n^2}, 2^{-n(n-1)}] carry g1 and (2^{-n(n+1)}, 2^{-n^2}] carry g2
/// for n = 1..depth on (0, 1]; below 2^{-depth(depth+1)} the value is g2.
ContactProfile example1_profile(double g1, double g2, int depth, Side side = Side::Plus);

/// Ratio-4 log-periodic profile: (2/4^n, 4/4^n) carries g1 and (1/4^n, 2/4^n)
/// carries g2; the isolated values pi at 4/4^n and 0 at 2/4^n are kept as
/// annotations only. Below 4^{-depth} the value is g2.
ContactProfile example2_profile(double g1, double g2, int depth, Side side = Side::Plus);

struct EssentialRange {
  double ess_liminf;
  double ess_limsup;
};

/// Essential inf/sup of gamma over the profile support. For the finite-depth
/// example generators every block family is present, so this is the pair of
/// essential limits at the corner.
EssentialRange essential_range(const ContactProfile& profile);

struct GammaBoundsHypothesis {
  double lower_plus;
  double upper_plus;
  double lower_minus;
  double upper_minus;

  void validate() const;
};

enum class Theorem1Applicability { NonconvexOk, ConvexOk, Fails };

std::string_view to_string(Theorem1Applicability tag);

/// Radial limits exist for every nonconvex corner; for a convex corner the
/// bounds must satisfy pi - 2a < lower+ + lower- and upper+ + upper- < pi + 2a.
Theorem1Applicability theorem1_applicability(const WedgeGeometry& geometry,
                                             const GammaBoundsHypothesis& hypothesis);

}  // namespace wedgecap
