#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedgecap/contact_profile.hpp"
#include "wedgecap/fan_functionals.hpp"

namespace wedgecap {

enum class FanCase { I, D, ID, DI };

std::string_view to_string(FanCase c);
std::optional<FanCase> parse_fan_case(std::string_view text);

/// b -> A(b) with either liminf (I) or limsup (S) semantics.
class AdhesionFunction {
 public:
  using Evaluator = std::function<double(double)>;

  AdhesionFunction(AdhesionKind kind, Evaluator evaluator, EstimateMethod method = EstimateMethod::Sweep);

  /// b cos(gamma0), exact for either kind.
  static AdhesionFunction constant(AdhesionKind kind, double gamma0);
  static AdhesionFunction example1(AdhesionKind kind, double g1, double g2);
  static AdhesionFunction log_periodic(AdhesionKind kind, const ContactProfile& profile, double ratio);
  static AdhesionFunction sweep(AdhesionKind kind, const ContactProfile& profile, double eps_lo = 1e-10,
                                int points_per_decade = 64);

  AdhesionKind kind() const noexcept { return kind_; }
  EstimateMethod method() const noexcept { return method_; }

  /// Throws unless the value lies in [-b, b].
  double operator()(double b) const;

 private:
  AdhesionKind kind_;
  EstimateMethod method_;
  Evaluator evaluator_;
};

enum class ConditionKind { Increasing, Decreasing };

std::string_view to_string(ConditionKind kind);

/// b(lambda, beta) = sin(lambda - beta) / sin(lambda).
double fan_ratio(double beta, double lambda);

/// A_I(b) + sin(beta)/sin(lambda) - 1; nonnegative where the fan condition holds.
double condition_increasing(const AdhesionFunction& a, double beta, double lambda);

/// sin(beta)/sin(lambda) - 1 - A_S(b); nonnegative where the fan condition holds.
double condition_decreasing(const AdhesionFunction& a, double beta, double lambda);

struct LambdaGridConfig {
  double edge = 1e-4;        // lambda in (beta + edge, pi - edge)
  int uniform_points = 1024;
  int graded_points = 96;    // extra points clustered geometrically just above beta
  double tolerance = 1e-12;  // condition values >= -tolerance count as holding
};

std::vector<double> lambda_grid(double beta, const LambdaGridConfig& config = {});

struct LambdaCheck {
  bool holds;
  double worst_lambda;
  double worst_value;
};

/// Minimizes cond over the grid, then refines by golden-section search in the
/// bracket around the grid minimizer.
LambdaCheck holds_for_all_lambda(const std::function<double(double)>& cond, double beta,
                                 const std::vector<double>& grid, const LambdaGridConfig& config = {});

enum class FanMethod { Theorem2Scan, Corollary1 };

std::string_view to_string(FanMethod method);

struct FanScanConfig {
  double beta_step = 1e-3;
  LambdaGridConfig lambda;
};

struct FanBoundResult {
  Side side;
  FanCase fan_case;
  ConditionKind condition;
  double beta_min;
  FanMethod method;
  std::optional<double> worst_lambda;
  bool monotone_flag;
};

/// Smallest grid beta = k * beta_step for which the condition holds for all
/// lambda. The whole scan is evaluated so that monotone_flag can report
/// whether feasibility switched on exactly once. Throws
/// ErrorCode::InfeasibleScan when no beta below pi - beta_step is feasible.
FanBoundResult min_admissible_fan(const AdhesionFunction& a, ConditionKind kind, const FanScanConfig& scan = {},
                                  Side side = Side::Plus, FanCase fan_case = FanCase::I);

enum class CorollaryVariant { A, B, C, D };

/// arccos(m) for variants a/b, pi - arccos(m) for c/d.
double corollary1_bound(double m, CorollaryVariant variant);

struct EffectiveAngle {
  double m;
  double sigma;
};

/// Tightest linear envelope on the grid: for kind I the smallest m with
/// A(b) <= m b (max of A(b)/b); for kind S the largest m with A(b) >= m b
/// (min of A(b)/b). sigma = arccos(m).
EffectiveAngle effective_angle(const AdhesionFunction& a, const std::vector<double>& b_grid);

/// 64 points uniformly spaced in (0, 1).
std::vector<double> default_b_grid(int points = 64);

struct SideCondition {
  Side side;
  ConditionKind kind;
  int number;  // 1..4 in the order the fan conditions are listed
};

std::vector<SideCondition> case_condition_map(FanCase c);

}  // namespace wedgecap
