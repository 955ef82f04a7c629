#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wedgecap/contact_profile.hpp"

namespace wedgecap {

/// Polar grid on the truncated sector {r_min <= r <= r_max, |theta| <= alpha}.
/// radii[0] = r_max > radii[1] > ... > radii[m] = r_min with a constant ratio;
/// thetas are uniform on [-alpha, alpha] with n_theta + 1 nodes.
struct SectorMesh {
  WedgeGeometry geometry;
  std::vector<double> radii;
  std::vector<double> thetas;

  int m() const noexcept { return static_cast<int>(radii.size()) - 1; }
  int n_theta() const noexcept { return static_cast<int>(thetas.size()) - 1; }
  std::size_t node_count() const noexcept { return radii.size() * thetas.size(); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * thetas.size() + static_cast<std::size_t>(j);
  }
  /// ln(r_i / r_{i+1}).
  double log_step() const;
  double theta_step() const;
};

/// Requires 0 < r_min < r_max and m, n_theta >= 2. The solvers additionally
/// require m, n_theta >= 16.
SectorMesh build_sector_mesh(const WedgeGeometry& geometry, double r_min, double r_max, int m, int n_theta);

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 200;
};

struct SolutionField {
  explicit SolutionField(SectorMesh mesh_in) : mesh(std::move(mesh_in)) {}

  SectorMesh mesh;
  std::vector<double> values;      // f(r_i, theta_j) at mesh.index(i, j)
  std::vector<double> rhs_values;  // right-hand side of Nf at each node (kappa f + lambda, or 2H)
  double kappa = 0.0;
  double lambda = 0.0;
  bool converged = false;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  std::vector<double> residual_history;
  bool mean_pinned = false;  // pure Neumann nullspace fixed by mean value 0
  std::vector<std::string> warnings;

  double at(int i, int j) const { return values[mesh.index(i, j)]; }
};

/// Field with f(r, theta) sampled at the nodes, marked converged. Used for
/// synthetic inputs to the trace and fan tools.
SolutionField sample_field(const SectorMesh& mesh, const std::function<double(double, double)>& f);

/// r0 = 1 for M2 = 0, otherwise 1/M2 + 1 - sqrt(1/M2^2 + 1).
double torus_minor_radius(double m2);

struct Bounds {
  double m1;
  double m2;
};

/// M1 = max |f|, M2 = max |right-hand side| over the nodes.
Bounds bounds_estimate(const SolutionField& field);

/// Damped Newton on the finite-volume discretization of
///   div(Tf) = kappa f + lambda,  Tf . nu = cos(gamma) on the walls,
/// with no flux through the arcs r = r_min and r = r_max. profile_plus sits on
/// theta = +alpha, profile_minus on theta = -alpha; both must cover r_max.
/// Non-convergence is reported through `converged` and the residual history.
SolutionField solve_capillary(const SectorMesh& mesh, double kappa, double lambda, const ContactProfile& profile_plus,
                              const ContactProfile& profile_minus, const SolverConfig& config = {});

using HeightFunction = std::function<double(double x, double y, double t)>;

/// Nf = 2H(x, y, f) with the same boundary data. dh_dt is the derivative of H
/// in t; if absent a central difference is used. With 2H = kappa t + lambda and
/// the exact derivative the iteration matches solve_capillary bit for bit.
SolutionField solve_pmc(const SectorMesh& mesh, const HeightFunction& h, const ContactProfile& profile_plus,
                        const ContactProfile& profile_minus, const SolverConfig& config = {},
                        const std::optional<HeightFunction>& dh_dt = std::nullopt);

struct ManufacturedRun {
  int m;
  int n_theta;
  double max_error;
  bool converged;
};

struct ManufacturedStudy {
  std::vector<ManufacturedRun> runs;
  std::vector<double> slopes;  // log2 error ratio between consecutive runs
  double fitted_slope;         // least-squares slope of log error against log spacing
};

/// Solves with the exact solution f = r^2 cos(theta): kappa = 1, lambda = 0,
/// source N f - f, and analytic flux data on all four sides. Each entry of
/// `sizes` is used for both m and n_theta.
ManufacturedStudy manufactured_convergence(const std::vector<int>& sizes, double alpha = 1.0, double r_min = 0.1,
                                           double r_max = 1.0, const SolverConfig& config = {});

/// f at the n smallest radii along every ray, with Rf(theta) from polynomial
/// extrapolation to r = 0 and the residual |P_n(0) - P_{n-1}(0)|, where P_{n-1}
/// drops the largest radius.
struct RadialTrace {
  std::vector<double> radii;   // strictly decreasing
  std::vector<double> thetas;
  std::vector<std::vector<double>> values;  // values[j][k] = f(radii[k], thetas[j])
  std::vector<double> rf;
  std::vector<double> residual;
};

RadialTrace radial_trace(const SolutionField& field, int n_radii);

enum class FanShape { Constant, I, D, ID, DI, Unclassified };

std::string_view to_string(FanShape shape);

struct FanMeasurement {
  FanShape shape;
  double alpha1;
  double alpha2;
  std::optional<double> alpha_left;
  std::optional<double> alpha_right;
  double beta_minus;  // alpha1 + alpha
  double beta_plus;   // alpha - alpha2
  double tolerance;
  std::string diagnostics;
};

/// Reads off the side fans and the shape of Rf between them. A constant trace
/// reports alpha1 = alpha, alpha2 = -alpha (both fans cover the sector). ID and
/// DI need an interior plateau of width pi within two grid spacings, so they
/// only occur when 2 alpha > pi.
FanMeasurement measure_fans(const std::vector<double>& thetas, const std::vector<double>& rf, double alpha,
                            double tol);

/// Uses tol = max(10 * median residual, 1e-9 * (1 + max |Rf|)).
FanMeasurement measure_fans(const RadialTrace& trace, double alpha, std::optional<double> tol = std::nullopt);

double default_fan_tolerance(const RadialTrace& trace);

void write_solution_csv(std::ostream& out, const SolutionField& field);
void write_trace_csv(std::ostream& out, const RadialTrace& trace);

/// key: value lines; `extra` entries are appended in order.
void write_manifest(std::ostream& out, const SolutionField& field,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace wedgecap
