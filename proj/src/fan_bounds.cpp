#include "wedgecap/fan_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

constexpr double kPi = std::numbers::pi;

double golden_minimize(const std::function<double(double)>& f, double lo, double hi, int iterations,
                       double* argmin) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < iterations && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < fd) {
    *argmin = c;
    return fc;
  }
  *argmin = d;
  return fd;
}

}  // namespace

std::string_view to_string(FanCase c) {
  switch (c) {
    case FanCase::I: return "I";
    case FanCase::D: return "D";
    case FanCase::ID: return "ID";
    case FanCase::DI: return "DI";
  }
  return "I";
}

std::optional<FanCase> parse_fan_case(std::string_view text) {
  if (text == "I") return FanCase::I;
  if (text == "D") return FanCase::D;
  if (text == "ID") return FanCase::ID;
  if (text == "DI") return FanCase::DI;
  return std::nullopt;
}

std::string_view to_string(ConditionKind kind) {
  return kind == ConditionKind::Increasing ? "increasing" : "decreasing";
}

std::string_view to_string(FanMethod method) {
  return method == FanMethod::Theorem2Scan ? "theorem2_scan" : "corollary1";
}

AdhesionFunction::AdhesionFunction(AdhesionKind kind, Evaluator evaluator, EstimateMethod method)
    : kind_(kind), method_(method), evaluator_(std::move(evaluator)) {
  require(static_cast<bool>(evaluator_), "adhesion function needs an evaluator");
}

AdhesionFunction AdhesionFunction::constant(AdhesionKind kind, double gamma0) {
  require(gamma0 >= 0.0 && gamma0 <= kPi, "constant adhesion: angle outside [0, pi]");
  const double c = std::cos(gamma0);
  return AdhesionFunction(kind, [c](double b) { return b * c; }, EstimateMethod::LogPeriodicExact);
}

AdhesionFunction AdhesionFunction::example1(AdhesionKind kind, double g1, double g2) {
  exact_A_example1(g1, g2, 1.0);  // validates the angles
  return AdhesionFunction(
      kind,
      [kind, g1, g2](double b) {
        const auto [ai, as] = exact_A_example1(g1, g2, b);
        return kind == AdhesionKind::I ? ai.value : as.value;
      },
      EstimateMethod::SequenceExact);
}

AdhesionFunction AdhesionFunction::log_periodic(AdhesionKind kind, const ContactProfile& profile, double ratio) {
  auto structure = std::make_shared<const LogPeriodicStructure>(profile, ratio);
  const double mean = kind == AdhesionKind::I ? structure->min_mean() : structure->max_mean();
  return AdhesionFunction(
      kind, [mean](double b) { return std::clamp(b * mean, -b, b); }, EstimateMethod::LogPeriodicExact);
}

AdhesionFunction AdhesionFunction::sweep(AdhesionKind kind, const ContactProfile& profile, double eps_lo,
                                         int points_per_decade) {
  auto table = std::make_shared<const SweepTable>(profile, eps_lo, points_per_decade);
  return AdhesionFunction(
      kind, [kind, table](double b) { return table->estimate(kind, b).value; }, EstimateMethod::Sweep);
}

double AdhesionFunction::operator()(double b) const {
  require(b > 0.0 && std::isfinite(b), "adhesion function: b must be positive");
  const double v = evaluator_(b);
  require(std::isfinite(v) && std::abs(v) <= b * (1.0 + 1e-12), "adhesion function value outside [-b, b]");
  return v;
}

double fan_ratio(double beta, double lambda) { return std::sin(lambda - beta) / std::sin(lambda); }

namespace {

void require_fan_angles(double beta, double lambda) {
  require(beta >= 0.0 && beta < lambda && lambda < kPi, "fan condition needs 0 <= beta < lambda < pi");
}

}  // namespace

double condition_increasing(const AdhesionFunction& a, double beta, double lambda) {
  require_fan_angles(beta, lambda);
  const double s = std::sin(lambda);
  return a(std::sin(lambda - beta) / s) + std::sin(beta) / s - 1.0;
}

double condition_decreasing(const AdhesionFunction& a, double beta, double lambda) {
  require_fan_angles(beta, lambda);
  const double s = std::sin(lambda);
  return std::sin(beta) / s - 1.0 - a(std::sin(lambda - beta) / s);
}

std::vector<double> lambda_grid(double beta, const LambdaGridConfig& config) {
  const double lo = beta + config.edge;
  const double hi = kPi - config.edge;
  require(lo < hi && config.uniform_points >= 512, "degenerate lambda grid");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(config.uniform_points + config.graded_points));
  for (int i = 0; i < config.uniform_points; ++i) {
    grid.push_back(lo + (hi - lo) * i / (config.uniform_points - 1));
  }
  // The negative dip of a just-infeasible beta hugs lambda = beta.
  const double span = std::min(0.1, hi - lo);
  if (config.graded_points > 1 && span > config.edge) {
    for (int i = 1; i < config.graded_points; ++i) {
      grid.push_back(beta + config.edge * std::pow(span / config.edge, static_cast<double>(i) / (config.graded_points - 1)));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::erase_if(grid, [&](double l) { return l < lo || l > hi; });
  return grid;
}

LambdaCheck holds_for_all_lambda(const std::function<double(double)>& cond, double beta,
                                 const std::vector<double>& grid, const LambdaGridConfig& config) {
  require(grid.size() >= 3, "degenerate lambda grid");
  require(grid.front() > beta, "lambda grid must lie above beta");
  std::size_t best = 0;
  double best_value = cond(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = cond(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double worst_lambda = grid[best];
  double worst_value = best_value;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  double refined_lambda = worst_lambda;
  const double refined = golden_minimize(cond, lo, hi, 80, &refined_lambda);
  if (refined < worst_value) {
    worst_value = refined;
    worst_lambda = refined_lambda;
  }
  return {worst_value >= -config.tolerance, worst_lambda, worst_value};
}

FanBoundResult min_admissible_fan(const AdhesionFunction& a, ConditionKind kind, const FanScanConfig& scan,
                                  Side side, FanCase fan_case) {
  require(scan.beta_step > 0.0 && scan.beta_step <= 0.1, "beta_step must lie in (0, 0.1]");
  const auto condition = [&](double beta) {
    return [&a, kind, beta](double lambda) {
      return kind == ConditionKind::Increasing ? condition_increasing(a, beta, lambda)
                                               : condition_decreasing(a, beta, lambda);
    };
  };

  std::optional<double> beta_min;
  std::optional<double> worst;
  bool monotone = true;
  bool seen_feasible = false;
  for (int k = 0;; ++k) {
    const double beta = k * scan.beta_step;
    if (beta > kPi - scan.beta_step) break;
    const auto check = holds_for_all_lambda(condition(beta), beta, lambda_grid(beta, scan.lambda), scan.lambda);
    if (check.holds) {
      if (!seen_feasible) {
        beta_min = beta;
        worst = check.worst_lambda;
      }
      seen_feasible = true;
    } else if (seen_feasible) {
      monotone = false;
    }
  }
  if (!beta_min) fail(ErrorCode::InfeasibleScan, "infeasible_scan: no admissible fan size below pi - beta_step");
  return {side, fan_case, kind, *beta_min, FanMethod::Theorem2Scan, worst, monotone};
}

double corollary1_bound(double m, CorollaryVariant variant) {
  require(m >= -1.0 && m <= 1.0, "corollary bound needs m in [-1, 1]");
  const double sigma = std::acos(m);
  return (variant == CorollaryVariant::A || variant == CorollaryVariant::B) ? sigma : kPi - sigma;
}

EffectiveAngle effective_angle(const AdhesionFunction& a, const std::vector<double>& b_grid) {
  require(!b_grid.empty(), "effective_angle: empty b grid");
  double m = a.kind() == AdhesionKind::I ? -std::numeric_limits<double>::infinity()
                                         : std::numeric_limits<double>::infinity();
  for (double b : b_grid) {
    require(b > 0.0 && b < 1.0, "effective_angle: b grid must lie in (0, 1)");
    const double slope = a(b) / b;
    m = a.kind() == AdhesionKind::I ? std::max(m, slope) : std::min(m, slope);
  }
  m = std::clamp(m, -1.0, 1.0);
  return {m, std::acos(m)};
}

std::vector<double> default_b_grid(int points) {
  require(points >= 32, "b grid needs at least 32 points");
  std::vector<double> grid;
  for (int i = 1; i <= points; ++i) grid.push_back(static_cast<double>(i) / (points + 1));
  return grid;
}

std::vector<SideCondition> case_condition_map(FanCase c) {
  const SideCondition c1{Side::Plus, ConditionKind::Increasing, 1};
  const SideCondition c2{Side::Minus, ConditionKind::Increasing, 2};
  const SideCondition c3{Side::Minus, ConditionKind::Decreasing, 3};
  const SideCondition c4{Side::Plus, ConditionKind::Decreasing, 4};
  switch (c) {
    case FanCase::I: return {c1, c3};
    case FanCase::D: return {c2, c4};
    case FanCase::DI: return {c1, c2};
    case FanCase::ID: return {c3, c4};
  }
  return {};
}

}  // namespace wedgecap
