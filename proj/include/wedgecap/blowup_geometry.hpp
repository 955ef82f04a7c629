#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wedgecap/contact_profile.hpp"
#include "wedgecap/fan_bounds.hpp"

namespace wedgecap {

// ---------------------------------------------------------------------------
// Blow-up rescaling
// ---------------------------------------------------------------------------

struct RescaleSpec {
  double eps;
  double z0;
};

struct Sample {
  double x;
  double y;
  double f;
};

/// Maps samples (X, Y, f) of the original solution to (X/eps, Y/eps, (f - z0)/eps),
/// i.e. samples of f_k(x, y) = (f(eps x, eps y) - z0)/eps on the dilated domain.
/// Every sample must lie in the closed wedge minus the corner, within `radius`.
std::vector<Sample> rescale_solution(std::span<const Sample> samples, const RescaleSpec& spec,
                                     const WedgeGeometry& geometry,
                                     double radius = std::numeric_limits<double>::infinity());

std::function<double(double, double)> rescale_function(std::function<double(double, double)> f,
                                                       const RescaleSpec& spec);

// ---------------------------------------------------------------------------
// Triangular perturbation of the blow-up limit sets
// ---------------------------------------------------------------------------

/// Triangle with vertices O = (0, 0), B = b (cos(+-alpha), sin(+-alpha)) on the
/// wall of the given side, and C = (cos theta0, sin theta0) on the unit circle.
struct TriangleComparison {
  double alpha;
  double theta0;
  double b;
  Side side;

  /// Angle at O between the wall and the ray through C.
  double corner_angle() const;
  /// Throws DegenerateTriangle when O, B, C are collinear (unless allowed).
  void validate(bool allow_wall = false) const;
};

/// omega with pi - omega the interior angle OBC, so that omega -> lambda when
/// b = sin(lambda - beta)/sin(lambda) and the corner angle tends to beta.
/// The same convention is used on both walls; the mirror image of a
/// configuration has the same omega.
double triangle_omega(const TriangleComparison& cmp);

/// |BC| from coordinates.
double bc_length(const TriangleComparison& cmp);

/// |BC| by the sine rule: sin(corner angle) / sin(omega).
double bc_length_sine_rule(const TriangleComparison& cmp);

/// (1 - A_I^+(b)) - sin(alpha - theta0)/sin(omega). At theta0 = alpha the
/// continuous limit (1 - A) - |1 - b| is returned.
double phi_difference(const TriangleComparison& cmp, double a_plus_value);

/// (1 + A_S^-(b)) - sin(alpha + theta0)/sin(omega). At theta0 = -alpha the
/// continuous limit (1 + A) - |1 - b| is returned.
double psi_difference(const TriangleComparison& cmp, double a_minus_value);

/// Limits of the two differences as the ray reaches the fan edge, with
/// b = sin(lambda - beta)/sin(lambda): (1 - A(b)) - sin(beta)/sin(lambda) and
/// (1 + A(b)) - sin(beta)/sin(lambda).
double phi_limit(const AdhesionFunction& a, double beta, double lambda);
double psi_limit(const AdhesionFunction& a, double beta, double lambda);

struct Witness {
  double lambda;
  double value;
};

/// Positive limiting difference for the condition that (fan_case, side)
/// imposes, if one exists on the lambda grid (refined around its maximum).
/// A witness means a fan of size beta_claim would contradict minimality.
std::optional<Witness> contradiction_witness(const AdhesionFunction& a, FanCase fan_case, Side side,
                                             double beta_claim, const LambdaGridConfig& grid = {});

/// Condition kind (phi for increasing, psi for decreasing) for a side in a case.
ConditionKind condition_for(FanCase fan_case, Side side);

/// Triangle on the coupled curve b = sin(lambda - beta)/sin(lambda) with the ray
/// at angular distance beta + gap from the wall (gap -> 0 is the limit taken
/// in the proof).
TriangleComparison coupled_triangle(double alpha, double beta, double lambda, double gap, Side side);

/// CSV with columns lambda,b,A,difference for the limit formula of `kind`.
void write_limit_sweep_csv(std::ostream& out, const AdhesionFunction& a, ConditionKind kind, double beta,
                           const std::vector<double>& lambdas);

}  // namespace wedgecap
