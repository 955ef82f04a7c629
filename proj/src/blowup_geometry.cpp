#include "wedgecap/blowup_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <numbers>
#include <ostream>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

constexpr double kPi = std::numbers::pi;

struct Point {
  double x;
  double y;
};

Point wall_point(const TriangleComparison& cmp) {
  const double wall = cmp.side == Side::Plus ? cmp.alpha : -cmp.alpha;
  return {cmp.b * std::cos(wall), cmp.b * std::sin(wall)};
}

Point ray_point(const TriangleComparison& cmp) { return {std::cos(cmp.theta0), std::sin(cmp.theta0)}; }

bool at_wall(const TriangleComparison& cmp) { return cmp.corner_angle() == 0.0; }

}  // namespace

std::vector<Sample> rescale_solution(std::span<const Sample> samples, const RescaleSpec& spec,
                                     const WedgeGeometry& geometry, double radius) {
  require(spec.eps > 0.0 && std::isfinite(spec.eps), "rescale: eps must be positive");
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const double r = std::hypot(s.x, s.y);
    const double theta = std::atan2(s.y, s.x);
    const bool inside = r > 0.0 && r <= radius && std::abs(theta) <= geometry.alpha() * (1.0 + 1e-14);
    require(inside, "rescale: sample outside the domain");
    out.push_back({s.x / spec.eps, s.y / spec.eps, (s.f - spec.z0) / spec.eps});
  }
  return out;
}

std::function<double(double, double)> rescale_function(std::function<double(double, double)> f,
                                                       const RescaleSpec& spec) {
  require(spec.eps > 0.0 && std::isfinite(spec.eps), "rescale: eps must be positive");
  return [f = std::move(f), spec](double x, double y) { return (f(spec.eps * x, spec.eps * y) - spec.z0) / spec.eps; };
}

double TriangleComparison::corner_angle() const {
  return side == Side::Plus ? alpha - theta0 : alpha + theta0;
}

void TriangleComparison::validate(bool allow_wall) const {
  require(alpha > 0.0 && alpha <= kPi, "triangle: alpha outside (0, pi]");
  require(b > 0.0 && std::isfinite(b), "triangle: b must be positive");
  require(theta0 >= -alpha && theta0 <= alpha, "triangle: theta0 outside [-alpha, alpha]");
  const double angle = corner_angle();
  if (angle == 0.0 && allow_wall) return;
  if (angle <= 0.0 || angle >= kPi) {
    fail(ErrorCode::DegenerateTriangle, "triangle: O, B, C are collinear");
  }
}

double triangle_omega(const TriangleComparison& cmp) {
  cmp.validate();
  const Point b = wall_point(cmp);
  const Point c = ray_point(cmp);
  const Point to_o{-b.x, -b.y};
  const Point to_c{c.x - b.x, c.y - b.y};
  const double cross = to_o.x * to_c.y - to_o.y * to_c.x;
  const double dot = to_o.x * to_c.x + to_o.y * to_c.y;
  const double interior = std::atan2(std::abs(cross), dot);
  return kPi - interior;
}

double bc_length(const TriangleComparison& cmp) {
  cmp.validate();
  const Point b = wall_point(cmp);
  const Point c = ray_point(cmp);
  return std::hypot(c.x - b.x, c.y - b.y);
}

double bc_length_sine_rule(const TriangleComparison& cmp) {
  return std::sin(cmp.corner_angle()) / std::sin(triangle_omega(cmp));
}

double phi_difference(const TriangleComparison& cmp, double a_plus_value) {
  require(cmp.side == Side::Plus, "phi_difference acts on the + wall");
  cmp.validate(true);
  if (at_wall(cmp)) return (1.0 - a_plus_value) - std::abs(1.0 - cmp.b);
  return (1.0 - a_plus_value) - bc_length_sine_rule(cmp);
}

double psi_difference(const TriangleComparison& cmp, double a_minus_value) {
  require(cmp.side == Side::Minus, "psi_difference acts on the - wall");
  cmp.validate(true);
  if (at_wall(cmp)) return (1.0 + a_minus_value) - std::abs(1.0 - cmp.b);
  return (1.0 + a_minus_value) - bc_length_sine_rule(cmp);
}

double phi_limit(const AdhesionFunction& a, double beta, double lambda) {
  require(beta >= 0.0 && beta < lambda && lambda < kPi, "phi_limit needs 0 <= beta < lambda < pi");
  return (1.0 - a(fan_ratio(beta, lambda))) - std::sin(beta) / std::sin(lambda);
}

double psi_limit(const AdhesionFunction& a, double beta, double lambda) {
  require(beta >= 0.0 && beta < lambda && lambda < kPi, "psi_limit needs 0 <= beta < lambda < pi");
  return (1.0 + a(fan_ratio(beta, lambda))) - std::sin(beta) / std::sin(lambda);
}

ConditionKind condition_for(FanCase fan_case, Side side) {
  for (const auto& entry : case_condition_map(fan_case)) {
    if (entry.side == side) return entry.kind;
  }
  fail(ErrorCode::InvalidArgument, "case does not constrain this side");
}

std::optional<Witness> contradiction_witness(const AdhesionFunction& a, FanCase fan_case, Side side,
                                             double beta_claim, const LambdaGridConfig& grid_config) {
  require(beta_claim >= 0.0 && beta_claim < kPi, "beta claim outside [0, pi)");
  const ConditionKind kind = condition_for(fan_case, side);
  const auto limit = [&](double lambda) {
    return kind == ConditionKind::Increasing ? phi_limit(a, beta_claim, lambda) : psi_limit(a, beta_claim, lambda);
  };
  // Maximize the limiting difference = minimize its negation, with the same
  // grid and refinement as the feasibility check.
  const auto grid = lambda_grid(beta_claim, grid_config);
  const auto check = holds_for_all_lambda([&](double lambda) { return -limit(lambda); }, beta_claim, grid,
                                          grid_config);
  if (check.holds) return std::nullopt;
  return Witness{check.worst_lambda, -check.worst_value};
}

TriangleComparison coupled_triangle(double alpha, double beta, double lambda, double gap, Side side) {
  require(beta >= 0.0 && beta < lambda && lambda < kPi, "coupled_triangle needs 0 <= beta < lambda < pi");
  require(gap >= 0.0 && beta + gap <= 2.0 * alpha, "coupled_triangle: ray outside the wedge");
  const double theta0 = side == Side::Plus ? alpha - beta - gap : -alpha + beta + gap;
  return {alpha, theta0, fan_ratio(beta, lambda), side};
}

void write_limit_sweep_csv(std::ostream& out, const AdhesionFunction& a, ConditionKind kind, double beta,
                           const std::vector<double>& lambdas) {
  out << "lambda,b,A,difference\n";
  for (double lambda : lambdas) {
    const double b = fan_ratio(beta, lambda);
    const double diff = kind == ConditionKind::Increasing ? phi_limit(a, beta, lambda) : psi_limit(a, beta, lambda);
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g}\n", lambda, b, a(b), diff);
  }
}

}  // namespace wedgecap
