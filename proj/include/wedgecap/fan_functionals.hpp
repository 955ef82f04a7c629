#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "wedgecap/contact_profile.hpp"

namespace wedgecap {

enum class AdhesionKind { I, S };
enum class EstimateMethod { Sweep, LogPeriodicExact, SequenceExact };

std::string_view to_string(AdhesionKind kind);
std::string_view to_string(EstimateMethod method);

/// Geometric scale grid eps_k = eps_hi * 10^{-k/points_per_decade}, k = 0, 1, ...
/// while eps_k >= eps_lo. The grid is anchored at eps_hi so that refining
/// points_per_decade by an integer factor or lowering eps_lo only adds points.
struct SweepConfig {
  double eps_hi = 0.0;
  double eps_lo = 1e-10;
  int points_per_decade = 64;

  /// eps_hi = s_max / b, eps_lo = 1e-10, 64 points per decade.
  static SweepConfig defaults_for(const ContactProfile& profile, double b, double eps_lo = 1e-10,
                                  int points_per_decade = 64);

  void validate(const ContactProfile& profile, double b) const;
  std::vector<double> grid() const;
  /// Relative spacing 10^{1/points_per_decade} - 1.
  double relative_spacing() const;
};

struct AdhesionEstimate {
  double b;
  AdhesionKind kind;
  double value;
  EstimateMethod method;
  double uncertainty;
};

/// min over the sweep grid of averaged_cos(profile, eps, b).
AdhesionEstimate estimate_AI(const ContactProfile& profile, double b, const SweepConfig& sweep);
/// max over the sweep grid of averaged_cos(profile, eps, b).
AdhesionEstimate estimate_AS(const ContactProfile& profile, double b, const SweepConfig& sweep);

/// One multiplicative period of a profile that is self-similar below s0:
/// gamma(s / ratio) = gamma(s) for s <= s0.
///
/// With I(x) the cos-integral of the infinite self-similar extension,
/// x -> I(x)/x is log-periodic and, on each segment of the period window
/// [s0/ratio, s0], has the form c1 + c2/x. Its extrema over the window are
/// therefore attained at segment breakpoints, and A_I(b), A_S(b) are b times
/// the smallest and largest breakpoint value.
class LogPeriodicStructure {
 public:
  /// Throws ErrorCode::NotSelfSimilar if no s0 admits the pattern.
  LogPeriodicStructure(const ContactProfile& profile, double ratio);

  double ratio() const noexcept { return ratio_; }
  double period_top() const noexcept { return s0_; }
  /// min and max of I(x)/x over one period.
  double min_mean() const noexcept { return min_mean_; }
  double max_mean() const noexcept { return max_mean_; }
  /// I(x)/x of the infinite extension for x in [s0/ratio, s0].
  double mean_cos(double x) const;

 private:
  double ratio_;
  double s0_;
  double i_bottom_;  // I(s0 / ratio) of the infinite extension
  std::vector<double> knots_;   // change points inside the window, ascending, with both ends
  std::vector<double> values_;  // cos(gamma) on (knots_[i], knots_[i+1]]
  double min_mean_;
  double max_mean_;
};

std::pair<AdhesionEstimate, AdhesionEstimate> exact_A_log_periodic(const ContactProfile& profile, double b,
                                                                   double ratio);

/// Closed-form functionals of the two-scale staircase (example1_profile):
/// A_I = b cos(g2), A_S = b cos(g1). Valid for every b > 0.
std::pair<AdhesionEstimate, AdhesionEstimate> exact_A_example1(double g1, double g2, double b);

/// Precomputed sweep for repeated queries at many b with the default anchor
/// eps_hi = s_max / b. The scale grid x_k = b * eps_k = s_max * 10^{-k/p} does
/// not depend on b, so running minima/maxima of I(x)/x answer each query.
class SweepTable {
 public:
  SweepTable(const ContactProfile& profile, double eps_lo = 1e-10, int points_per_decade = 64,
             double b_floor = 1e-8);

  AdhesionEstimate estimate(AdhesionKind kind, double b) const;

 private:
  ContactProfile profile_;
  double eps_lo_;
  int ppd_;
  double b_floor_;
  std::vector<double> running_min_;
  std::vector<double> running_max_;
};

}  // namespace wedgecap
