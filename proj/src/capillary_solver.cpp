#include "wedgecap/capillary_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <numbers>
#include <ostream>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMinSolverCells = 16;

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

struct Term {
  std::size_t node;
  double coef;
};

// Linear combination of at most six nodal values.
class Stencil {
 public:
  void add(std::size_t node, double coef) { terms_[size_++] = {node, coef}; }

  void add_scaled(const Stencil& other, double scale) {
    for (int t = 0; t < other.size_; ++t) add(other.terms_[t].node, other.terms_[t].coef * scale);
  }

  double apply(const Eigen::VectorXd& f) const {
    double v = 0.0;
    for (int t = 0; t < size_; ++t) v += terms_[t].coef * f[static_cast<Eigen::Index>(terms_[t].node)];
    return v;
  }

  std::span<const Term> terms() const { return {terms_.data(), static_cast<std::size_t>(size_)}; }

 private:
  std::array<Term, 6> terms_{};
  int size_ = 0;
};

// Interior face between control volumes a and b in the (s = ln r, theta) plane.
// The flux extent * p / W leaves a and enters b, where p is the derivative
// from a towards b and q the tangential derivative.
struct Face {
  std::size_t a;
  std::size_t b;
  double extent;
  double r;
  Stencil normal;
  Stencil tangential;
};

struct CellBox {
  double r_in;
  double r_out;
  double theta_lo;
  double theta_hi;
};

struct Discretization {
  std::vector<Face> faces;
  std::vector<CellBox> cells;
  std::vector<double> area;
  std::vector<double> perimeter;
  std::vector<double> x;
  std::vector<double> y;
};

Stencil theta_derivative(const SectorMesh& mesh, int i, int j) {
  const int n = mesh.n_theta();
  const double k = mesh.theta_step();
  Stencil d;
  if (j == 0) {
    d.add(mesh.index(i, 0), -1.5 / k);
    d.add(mesh.index(i, 1), 2.0 / k);
    d.add(mesh.index(i, 2), -0.5 / k);
  } else if (j == n) {
    d.add(mesh.index(i, n), 1.5 / k);
    d.add(mesh.index(i, n - 1), -2.0 / k);
    d.add(mesh.index(i, n - 2), 0.5 / k);
  } else {
    d.add(mesh.index(i, j + 1), 0.5 / k);
    d.add(mesh.index(i, j - 1), -0.5 / k);
  }
  return d;
}

// d/ds with s = ln r; s decreases as the row index i grows.
Stencil s_derivative(const SectorMesh& mesh, int i, int j) {
  const int m = mesh.m();
  const double h = mesh.log_step();
  Stencil d;
  if (i == 0) {
    d.add(mesh.index(0, j), 1.5 / h);
    d.add(mesh.index(1, j), -2.0 / h);
    d.add(mesh.index(2, j), 0.5 / h);
  } else if (i == m) {
    d.add(mesh.index(m, j), -1.5 / h);
    d.add(mesh.index(m - 1, j), 2.0 / h);
    d.add(mesh.index(m - 2, j), -0.5 / h);
  } else {
    d.add(mesh.index(i - 1, j), 0.5 / h);
    d.add(mesh.index(i + 1, j), -0.5 / h);
  }
  return d;
}

Discretization discretize(const SectorMesh& mesh) {
  const int m = mesh.m();
  const int n = mesh.n_theta();
  const double h = mesh.log_step();
  const double k = mesh.theta_step();
  const auto& r = mesh.radii;
  const auto& th = mesh.thetas;
  const double alpha = mesh.geometry.alpha();

  Discretization d;
  const std::size_t count = mesh.node_count();
  d.cells.resize(count);
  d.area.resize(count);
  d.perimeter.resize(count);
  d.x.resize(count);
  d.y.resize(count);
  for (int i = 0; i <= m; ++i) {
    const double r_out = i == 0 ? r[0] : std::sqrt(r[i - 1] * r[i]);
    const double r_in = i == m ? r[m] : std::sqrt(r[i] * r[i + 1]);
    for (int j = 0; j <= n; ++j) {
      const double lo = std::max(th[j] - 0.5 * k, -alpha);
      const double hi = std::min(th[j] + 0.5 * k, alpha);
      const std::size_t id = mesh.index(i, j);
      d.cells[id] = {r_in, r_out, lo, hi};
      d.area[id] = 0.5 * (hi - lo) * (r_out * r_out - r_in * r_in);
      d.perimeter[id] = (hi - lo) * (r_out + r_in) + 2.0 * (r_out - r_in);
      d.x[id] = r[i] * std::cos(th[j]);
      d.y[id] = r[i] * std::sin(th[j]);
    }
  }

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= n; ++j) {
      Face face{mesh.index(i, j), mesh.index(i + 1, j), (j == 0 || j == n) ? 0.5 * k : k, std::sqrt(r[i] * r[i + 1]),
                {}, {}};
      face.normal.add(face.b, 1.0 / h);
      face.normal.add(face.a, -1.0 / h);
      face.tangential.add_scaled(theta_derivative(mesh, i, j), 0.5);
      face.tangential.add_scaled(theta_derivative(mesh, i + 1, j), 0.5);
      d.faces.push_back(face);
    }
  }
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j < n; ++j) {
      Face face{mesh.index(i, j), mesh.index(i, j + 1), (i == 0 || i == m) ? 0.5 * h : h, r[i], {}, {}};
      face.normal.add(face.b, 1.0 / k);
      face.normal.add(face.a, -1.0 / k);
      face.tangential.add_scaled(s_derivative(mesh, i, j), 0.5);
      face.tangential.add_scaled(s_derivative(mesh, i, j + 1), 0.5);
      d.faces.push_back(face);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Newton iteration
// ---------------------------------------------------------------------------

using Rhs = std::function<double(double, double, double)>;

struct Problem {
  Rhs rhs;    // right-hand side of Nf at (x, y, t)
  Rhs rhs_t;  // its t-derivative
  std::vector<double> boundary_flux;  // prescribed outward flux per control volume
  std::vector<double> fixed_source;   // integral of an extra source per control volume
  std::vector<double> initial;
  bool pin_mean = false;
};

class NewtonSystem {
 public:
  NewtonSystem(const SectorMesh& mesh, const Discretization& d, const Problem& p)
      : mesh_(mesh), d_(d), p_(p), n_(static_cast<Eigen::Index>(mesh.node_count())) {}

  // True residual: outward flux minus integrated right-hand side.
  Eigen::VectorXd residual(const Eigen::VectorXd& f, std::vector<Eigen::Triplet<double>>* jac) const {
    Eigen::VectorXd res = Eigen::VectorXd::Zero(n_);
    for (const Face& face : d_.faces) {
      const double p = face.normal.apply(f);
      const double q = face.tangential.apply(f);
      const double r2 = face.r * face.r;
      const double w = std::sqrt(1.0 + (p * p + q * q) / r2);
      const double flux = face.extent * p / w;
      res[idx(face.a)] += flux;
      res[idx(face.b)] -= flux;
      if (jac) {
        const double w3 = w * w * w;
        const double dp = face.extent * (1.0 + q * q / r2) / w3;
        const double dq = -face.extent * p * q / (r2 * w3);
        for (const Term& t : face.normal.terms()) {
          jac->emplace_back(idx(face.a), idx(t.node), dp * t.coef);
          jac->emplace_back(idx(face.b), idx(t.node), -dp * t.coef);
        }
        for (const Term& t : face.tangential.terms()) {
          jac->emplace_back(idx(face.a), idx(t.node), dq * t.coef);
          jac->emplace_back(idx(face.b), idx(t.node), -dq * t.coef);
        }
      }
    }
    for (Eigen::Index c = 0; c < n_; ++c) {
      const auto u = static_cast<std::size_t>(c);
      res[c] += p_.boundary_flux[u] - p_.fixed_source[u] - d_.area[u] * p_.rhs(d_.x[u], d_.y[u], f[c]);
      if (jac) jac->emplace_back(c, c, -d_.area[u] * p_.rhs_t(d_.x[u], d_.y[u], f[c]));
    }
    return res;
  }

  // The last equation is replaced by the area-weighted mean when pinning.
  void pin(Eigen::VectorXd& res, const Eigen::VectorXd& f, std::vector<Eigen::Triplet<double>>* jac) const {
    if (!p_.pin_mean) return;
    const Eigen::Index last = n_ - 1;
    double total = 0.0;
    for (double a : d_.area) total += a;
    double mean = 0.0;
    for (Eigen::Index c = 0; c < n_; ++c) mean += d_.area[static_cast<std::size_t>(c)] * f[c];
    res[last] = mean / total;
    if (jac) {
      std::erase_if(*jac, [last](const Eigen::Triplet<double>& t) { return t.row() == last; });
      for (Eigen::Index c = 0; c < n_; ++c) jac->emplace_back(last, c, d_.area[static_cast<std::size_t>(c)] / total);
    }
  }

  double scaled_max(const Eigen::VectorXd& res) const {
    double v = 0.0;
    for (Eigen::Index c = 0; c < n_; ++c) v = std::max(v, std::abs(res[c]) / d_.perimeter[static_cast<std::size_t>(c)]);
    return v;
  }

  double merit(const Eigen::VectorXd& res) const {
    double v = 0.0;
    for (Eigen::Index c = 0; c < n_; ++c) {
      const double s = res[c] / d_.perimeter[static_cast<std::size_t>(c)];
      v += s * s;
    }
    return std::sqrt(v);
  }

  Eigen::Index size() const { return n_; }

 private:
  static Eigen::Index idx(std::size_t u) { return static_cast<Eigen::Index>(u); }

  const SectorMesh& mesh_;
  const Discretization& d_;
  const Problem& p_;
  Eigen::Index n_;
};

SolutionField run_newton(const SectorMesh& mesh, const Discretization& d, const Problem& problem,
                         const SolverConfig& config) {
  require(config.tol > 0.0 && config.max_iter >= 1, "solver: tol must be positive and max_iter >= 1");
  const NewtonSystem system(mesh, d, problem);
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(problem.initial.data(), system.size());

  SolutionField field(mesh);
  field.mean_pinned = problem.pin_mean;

  Eigen::VectorXd res = system.residual(f, nullptr);
  double norm = system.scaled_max(res);
  field.residual_history.push_back(norm);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  int iteration = 0;
  while (norm > config.tol && iteration < config.max_iter) {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd newton_res = system.residual(f, &triplets);
    system.pin(newton_res, f, &triplets);
    Eigen::SparseMatrix<double> jac(system.size(), system.size());
    jac.setFromTriplets(triplets.begin(), triplets.end());
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) {
      field.warnings.push_back(problem.pin_mean ? "singular Jacobian despite mean pinning"
                                                : "singular Jacobian (pure Neumann nullspace?)");
      break;
    }
    const Eigen::VectorXd step = lu.solve(-newton_res);

    // Backtracking on the scaled residual norm.
    const double merit0 = system.merit(newton_res);
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const Eigen::VectorXd trial = f + t * step;
      Eigen::VectorXd trial_res = system.residual(trial, nullptr);
      Eigen::VectorXd pinned_res = trial_res;
      system.pin(pinned_res, trial, nullptr);
      if (system.merit(pinned_res) <= (1.0 - 1e-4 * t) * merit0 || system.scaled_max(trial_res) <= config.tol) {
        f = trial;
        res = trial_res;
        accepted = true;
        break;
      }
    }
    ++iteration;
    if (!accepted) {
      field.warnings.push_back("line search stalled");
      break;
    }
    norm = system.scaled_max(res);
    field.residual_history.push_back(norm);
  }

  field.values.assign(f.data(), f.data() + f.size());
  field.rhs_values.resize(field.values.size());
  for (std::size_t u = 0; u < field.values.size(); ++u) {
    field.rhs_values[u] = problem.rhs(d.x[u], d.y[u], field.values[u]);
  }
  field.residual_norm = norm;
  field.newton_iterations = iteration;
  field.converged = norm <= config.tol;
  if (!field.converged && iteration >= config.max_iter) field.warnings.push_back("iteration limit reached");
  return field;
}

void require_solver_mesh(const SectorMesh& mesh) {
  require(mesh.m() >= kMinSolverCells && mesh.n_theta() >= kMinSolverCells, "solver: m and n_theta must be >= 16");
}

std::vector<double> wall_fluxes(const SectorMesh& mesh, const Discretization& d, const ContactProfile& plus,
                                const ContactProfile& minus) {
  const double r_max = mesh.radii.front();
  for (const ContactProfile* p : {&plus, &minus}) {
    require(p->s_max() >= r_max * (1.0 - 1e-12), "solver: profile does not cover r_max");
  }
  std::vector<double> flux(mesh.node_count(), 0.0);
  for (int i = 0; i <= mesh.m(); ++i) {
    const CellBox& box = d.cells[mesh.index(i, 0)];
    flux[mesh.index(i, mesh.n_theta())] += plus.cos_integral(box.r_in, std::min(box.r_out, plus.s_max()));
    flux[mesh.index(i, 0)] += minus.cos_integral(box.r_in, std::min(box.r_out, minus.s_max()));
  }
  return flux;
}

void applicability_warning(const SectorMesh& mesh, const ContactProfile& plus, const ContactProfile& minus,
                           SolutionField& field) {
  const auto ep = essential_range(plus);
  const auto em = essential_range(minus);
  const GammaBoundsHypothesis hyp{ep.ess_liminf, ep.ess_limsup, em.ess_liminf, em.ess_limsup};
  if (theorem1_applicability(mesh.geometry, hyp) == Theorem1Applicability::Fails) {
    field.warnings.push_back("contact angles violate the convex-corner hypothesis; radial limits may not exist");
  }
}

// ---------------------------------------------------------------------------
// Manufactured solution f = r^2 cos(theta) = x r
// ---------------------------------------------------------------------------

struct Derivatives {
  double f;
  double fx;
  double fy;
  double fxx;
  double fxy;
  double fyy;
};

Derivatives manufactured(double x, double y) {
  const double r = std::hypot(x, y);
  const double r3 = r * r * r;
  return {x * r,
          r + x * x / r,
          x * y / r,
          3.0 * x / r - x * x * x / r3,
          y / r - x * x * y / r3,
          x / r - x * y * y / r3};
}

double manufactured_curvature(double x, double y) {
  const Derivatives d = manufactured(x, y);
  const double w = std::sqrt(1.0 + d.fx * d.fx + d.fy * d.fy);
  return ((1.0 + d.fy * d.fy) * d.fxx - 2.0 * d.fx * d.fy * d.fxy + (1.0 + d.fx * d.fx) * d.fyy) / (w * w * w);
}

// Tf . nu for the manufactured solution.
double manufactured_flux(double x, double y, double nx, double ny) {
  const Derivatives d = manufactured(x, y);
  const double w = std::sqrt(1.0 + d.fx * d.fx + d.fy * d.fy);
  return (d.fx * nx + d.fy * ny) / w;
}

constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                            0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                              0.3478548451374538};

template <class F>
double gauss(double lo, double hi, F&& f) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t q = 0; q < kGaussNodes.size(); ++q) sum += kGaussWeights[q] * f(mid + half * kGaussNodes[q]);
  return sum * half;
}

SolutionField solve_manufactured(const SectorMesh& mesh, const SolverConfig& config) {
  require_solver_mesh(mesh);
  const Discretization d = discretize(mesh);
  const double alpha = mesh.geometry.alpha();
  const int m = mesh.m();
  const int n = mesh.n_theta();
  const double kappa = 1.0;

  Problem problem;
  problem.rhs = [kappa](double, double, double t) { return kappa * t; };
  problem.rhs_t = [kappa](double, double, double) { return kappa; };
  problem.boundary_flux.assign(mesh.node_count(), 0.0);
  problem.fixed_source.assign(mesh.node_count(), 0.0);
  problem.initial.assign(mesh.node_count(), 0.0);

  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      const std::size_t u = mesh.index(i, j);
      const CellBox& box = d.cells[u];
      problem.fixed_source[u] = gauss(box.theta_lo, box.theta_hi, [&](double th) {
        return gauss(box.r_in, box.r_out, [&](double r) {
          const double x = r * std::cos(th);
          const double y = r * std::sin(th);
          return (manufactured_curvature(x, y) - kappa * manufactured(x, y).f) * r;
        });
      });
      double flux = 0.0;
      if (j == n) {
        flux += gauss(box.r_in, box.r_out, [&](double r) {
          return manufactured_flux(r * std::cos(alpha), r * std::sin(alpha), -std::sin(alpha), std::cos(alpha));
        });
      }
      if (j == 0) {
        flux += gauss(box.r_in, box.r_out, [&](double r) {
          return manufactured_flux(r * std::cos(alpha), -r * std::sin(alpha), -std::sin(alpha), -std::cos(alpha));
        });
      }
      if (i == 0 || i == m) {
        const double radius = mesh.radii[static_cast<std::size_t>(i)];
        const double sign = i == 0 ? 1.0 : -1.0;
        flux += gauss(box.theta_lo, box.theta_hi, [&](double th) {
          const double c = std::cos(th);
          const double s = std::sin(th);
          return manufactured_flux(radius * c, radius * s, sign * c, sign * s) * radius;
        });
      }
      problem.boundary_flux[u] = flux;
    }
  }
  SolutionField field = run_newton(mesh, d, problem, config);
  field.kappa = kappa;
  field.lambda = 0.0;
  return field;
}

double neville_at_zero(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t n = y.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t k = 0; k + level < n; ++k) {
      // Correction form, so constant data is reproduced exactly.
      y[k] = y[k + 1] + (y[k + 1] - y[k]) * x[k + level] / (x[k] - x[k + level]);
    }
  }
  return y[0];
}

// Rf weakly increasing on [lo, hi] up to tol.
bool rises(const std::vector<double>& v, std::size_t lo, std::size_t hi, double tol) {
  double peak = v[lo];
  for (std::size_t j = lo; j <= hi; ++j) {
    if (v[j] < peak - tol) return false;
    peak = std::max(peak, v[j]);
  }
  return true;
}

bool falls(const std::vector<double>& v, std::size_t lo, std::size_t hi, double tol) {
  double low = v[lo];
  for (std::size_t j = lo; j <= hi; ++j) {
    if (v[j] > low + tol) return false;
    low = std::min(low, v[j]);
  }
  return true;
}

struct Plateau {
  std::size_t lo;
  std::size_t hi;
};

// Contiguous block of indices in [lo, hi] within tol of the extreme value.
std::optional<Plateau> extreme_plateau(const std::vector<double>& v, std::size_t lo, std::size_t hi, double tol,
                                       bool maximum) {
  double extreme = v[lo];
  for (std::size_t j = lo; j <= hi; ++j) extreme = maximum ? std::max(extreme, v[j]) : std::min(extreme, v[j]);
  std::optional<Plateau> block;
  for (std::size_t j = lo; j <= hi; ++j) {
    if (std::abs(v[j] - extreme) > tol) continue;
    if (!block) {
      block = Plateau{j, j};
    } else if (block->hi + 1 == j) {
      block->hi = j;
    } else {
      return std::nullopt;
    }
  }
  return block;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

double SectorMesh::log_step() const { return std::log(radii[0] / radii[1]); }

double SectorMesh::theta_step() const { return thetas[1] - thetas[0]; }

SectorMesh build_sector_mesh(const WedgeGeometry& geometry, double r_min, double r_max, int m, int n_theta) {
  require(r_min > 0.0 && r_min < r_max && std::isfinite(r_max), "mesh: need 0 < r_min < r_max");
  require(m >= 2 && n_theta >= 2, "mesh: m and n_theta must be >= 2");
  SectorMesh mesh{geometry, {}, {}};
  const double log_ratio = std::log(r_min / r_max) / m;
  mesh.radii.resize(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) mesh.radii[static_cast<std::size_t>(i)] = r_max * std::exp(i * log_ratio);
  mesh.radii.front() = r_max;
  mesh.radii.back() = r_min;
  const double alpha = geometry.alpha();
  mesh.thetas.resize(static_cast<std::size_t>(n_theta) + 1);
  for (int j = 0; j <= n_theta; ++j) mesh.thetas[static_cast<std::size_t>(j)] = -alpha + 2.0 * alpha * j / n_theta;
  mesh.thetas.front() = -alpha;
  mesh.thetas.back() = alpha;
  return mesh;
}

SolutionField sample_field(const SectorMesh& mesh, const std::function<double(double, double)>& f) {
  SolutionField field(mesh);
  field.values.resize(mesh.node_count());
  for (int i = 0; i <= mesh.m(); ++i) {
    for (int j = 0; j <= mesh.n_theta(); ++j) {
      field.values[mesh.index(i, j)] = f(mesh.radii[static_cast<std::size_t>(i)], mesh.thetas[static_cast<std::size_t>(j)]);
    }
  }
  field.rhs_values.assign(mesh.node_count(), 0.0);
  field.converged = true;
  return field;
}

double torus_minor_radius(double m2) {
  require(m2 >= 0.0 && std::isfinite(m2), "torus_minor_radius: M2 must be >= 0");
  if (m2 == 0.0) return 1.0;
  // 1/M2 + 1 - sqrt(1/M2^2 + 1), rationalized to avoid cancellation.
  return 2.0 / (1.0 + m2 + std::sqrt(1.0 + m2 * m2));
}

Bounds bounds_estimate(const SolutionField& field) {
  require(!field.values.empty() && field.values.size() == field.rhs_values.size(), "bounds_estimate: empty field");
  Bounds b{0.0, 0.0};
  for (double v : field.values) b.m1 = std::max(b.m1, std::abs(v));
  for (double v : field.rhs_values) b.m2 = std::max(b.m2, std::abs(v));
  return b;
}

SolutionField solve_capillary(const SectorMesh& mesh, double kappa, double lambda, const ContactProfile& profile_plus,
                              const ContactProfile& profile_minus, const SolverConfig& config) {
  require(kappa >= 0.0 && std::isfinite(kappa) && std::isfinite(lambda), "solve_capillary: need kappa >= 0");
  require_solver_mesh(mesh);
  const Discretization d = discretize(mesh);
  Problem problem;
  problem.rhs = [kappa, lambda](double, double, double t) { return kappa * t + lambda; };
  problem.rhs_t = [kappa](double, double, double) { return kappa; };
  problem.boundary_flux = wall_fluxes(mesh, d, profile_plus, profile_minus);
  problem.fixed_source.assign(mesh.node_count(), 0.0);
  problem.initial.assign(mesh.node_count(), kappa > 0.0 ? -lambda / kappa : 0.0);
  problem.pin_mean = kappa == 0.0;

  if (problem.pin_mean) {
    // Integrated balance: total wall flux must equal lambda times the area.
    double wall = 0.0;
    double area = 0.0;
    double perimeter = 0.0;
    for (std::size_t u = 0; u < mesh.node_count(); ++u) {
      wall += problem.boundary_flux[u];
      area += d.area[u];
    }
    const double r0 = mesh.radii.front();
    const double r1 = mesh.radii.back();
    perimeter = 2.0 * mesh.geometry.alpha() * (r0 + r1) + 2.0 * (r0 - r1);
    if (std::abs(wall - lambda * area) > config.tol * perimeter) {
      fail(ErrorCode::InvalidArgument,
           fmt::format("solve_capillary: kappa = 0 needs balanced data (wall flux {:.6g} vs lambda * area {:.6g})",
                       wall, lambda * area));
    }
  }

  SolutionField field = run_newton(mesh, d, problem, config);
  field.kappa = kappa;
  field.lambda = lambda;
  applicability_warning(mesh, profile_plus, profile_minus, field);
  return field;
}

SolutionField solve_pmc(const SectorMesh& mesh, const HeightFunction& h, const ContactProfile& profile_plus,
                        const ContactProfile& profile_minus, const SolverConfig& config,
                        const std::optional<HeightFunction>& dh_dt) {
  require(static_cast<bool>(h), "solve_pmc: H is required");
  require_solver_mesh(mesh);
  const Discretization d = discretize(mesh);
  Problem problem;
  problem.rhs = [h](double x, double y, double t) { return 2.0 * h(x, y, t); };
  if (dh_dt && *dh_dt) {
    problem.rhs_t = [dh = *dh_dt](double x, double y, double t) { return 2.0 * dh(x, y, t); };
  } else {
    problem.rhs_t = [h](double x, double y, double t) {
      const double step = 1e-6 * (1.0 + std::abs(t));
      return (h(x, y, t + step) - h(x, y, t - step)) / step;
    };
  }
  problem.boundary_flux = wall_fluxes(mesh, d, profile_plus, profile_minus);
  problem.fixed_source.assign(mesh.node_count(), 0.0);

  // One scalar Newton step on 2H(x, y, t) = 0 from t = 0 at every node.
  problem.initial.resize(mesh.node_count());
  bool flat = true;
  for (std::size_t u = 0; u < mesh.node_count(); ++u) {
    const double slope = problem.rhs_t(d.x[u], d.y[u], 0.0);
    if (slope != 0.0) flat = false;
    problem.initial[u] = slope > 0.0 ? -(0.5 * problem.rhs(d.x[u], d.y[u], 0.0)) / (0.5 * slope) : 0.0;
  }
  problem.pin_mean = flat;

  SolutionField field = run_newton(mesh, d, problem, config);
  applicability_warning(mesh, profile_plus, profile_minus, field);

  // Monotonicity of H in t over the range the solution visits.
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  constexpr int kSamples = 8;
  for (std::size_t u = 0; u < mesh.node_count(); ++u) {
    double previous = h(d.x[u], d.y[u], *lo);
    bool monotone = true;
    for (int s = 1; s <= kSamples && *hi > *lo; ++s) {
      const double t = *lo + (*hi - *lo) * s / kSamples;
      const double value = h(d.x[u], d.y[u], t);
      if (value < previous - 1e-12 * (1.0 + std::abs(previous))) monotone = false;
      previous = value;
    }
    if (!monotone) {
      field.warnings.push_back(fmt::format("H is not increasing in t at node ({:.6g}, {:.6g})", d.x[u], d.y[u]));
      break;
    }
  }
  return field;
}

ManufacturedStudy manufactured_convergence(const std::vector<int>& sizes, double alpha, double r_min, double r_max,
                                           const SolverConfig& config) {
  require(sizes.size() >= 2, "manufactured_convergence: need at least two meshes");
  ManufacturedStudy study;
  const WedgeGeometry geometry(alpha);
  for (int size : sizes) {
    const SectorMesh mesh = build_sector_mesh(geometry, r_min, r_max, size, size);
    const SolutionField field = solve_manufactured(mesh, config);
    double err = 0.0;
    for (int i = 0; i <= mesh.m(); ++i) {
      for (int j = 0; j <= mesh.n_theta(); ++j) {
        const double r = mesh.radii[static_cast<std::size_t>(i)];
        const double th = mesh.thetas[static_cast<std::size_t>(j)];
        err = std::max(err, std::abs(field.at(i, j) - r * r * std::cos(th)));
      }
    }
    study.runs.push_back({size, size, err, field.converged});
  }
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < study.runs.size(); ++k) {
    const auto& run = study.runs[k];
    if (k > 0) {
      const auto& prev = study.runs[k - 1];
      study.slopes.push_back(std::log(prev.max_error / run.max_error) / std::log(static_cast<double>(run.m) / prev.m));
    }
    const double x = std::log(1.0 / run.m);
    const double y = std::log(run.max_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(study.runs.size());
  study.fitted_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return study;
}

RadialTrace radial_trace(const SolutionField& field, int n_radii) {
  if (!field.converged) fail(ErrorCode::SolverFailure, "radial_trace: field did not converge");
  const SectorMesh& mesh = field.mesh;
  require(n_radii >= 2 && n_radii <= mesh.m(), "radial_trace: need 2 <= n_radii <= m");
  RadialTrace trace;
  const int first = mesh.m() - n_radii + 1;
  for (int i = first; i <= mesh.m(); ++i) trace.radii.push_back(mesh.radii[static_cast<std::size_t>(i)]);
  trace.thetas = mesh.thetas;
  const std::vector<double> shorter_radii(trace.radii.begin() + 1, trace.radii.end());
  for (int j = 0; j <= mesh.n_theta(); ++j) {
    std::vector<double> ray;
    for (int i = first; i <= mesh.m(); ++i) ray.push_back(field.at(i, j));
    const double full = neville_at_zero(trace.radii, ray);
    const double shorter = neville_at_zero(shorter_radii, std::vector<double>(ray.begin() + 1, ray.end()));
    trace.values.push_back(std::move(ray));
    trace.rf.push_back(full);
    trace.residual.push_back(std::abs(full - shorter));
  }
  return trace;
}

std::string_view to_string(FanShape shape) {
  switch (shape) {
    case FanShape::Constant: return "constant";
    case FanShape::I: return "I";
    case FanShape::D: return "D";
    case FanShape::ID: return "ID";
    case FanShape::DI: return "DI";
    case FanShape::Unclassified: return "unclassified";
  }
  return "unclassified";
}

FanMeasurement measure_fans(const std::vector<double>& thetas, const std::vector<double>& rf, double alpha,
                            double tol) {
  require(thetas.size() == rf.size() && thetas.size() >= 3, "measure_fans: need matching samples (>= 3)");
  require(alpha > 0.0 && alpha <= kPi, "measure_fans: alpha outside (0, pi]");
  require(tol >= 0.0 && std::isfinite(tol), "measure_fans: tol must be >= 0");
  double spacing = 0.0;
  for (std::size_t j = 1; j < thetas.size(); ++j) {
    require(thetas[j] > thetas[j - 1], "measure_fans: thetas must increase");
    spacing = std::max(spacing, thetas[j] - thetas[j - 1]);
  }

  FanMeasurement out{FanShape::Unclassified, alpha, -alpha, std::nullopt, std::nullopt, 2.0 * alpha, 2.0 * alpha,
                     tol, ""};
  double variation = 0.0;
  for (std::size_t j = 1; j < rf.size(); ++j) variation += std::abs(rf[j] - rf[j - 1]);
  if (variation <= tol) {
    out.shape = FanShape::Constant;
    return out;
  }

  const std::size_t last = rf.size() - 1;
  std::size_t jl = 0;
  while (jl < last && std::abs(rf[jl + 1] - rf[0]) <= tol) ++jl;
  std::size_t jr = last;
  while (jr > 0 && std::abs(rf[jr - 1] - rf[last]) <= tol) --jr;
  if (jl >= jr) {
    out.diagnostics = "wall plateaus overlap without a constant trace";
    return out;
  }
  out.alpha1 = thetas[jl];
  out.alpha2 = thetas[jr];
  out.beta_minus = out.alpha1 + alpha;
  out.beta_plus = alpha - out.alpha2;

  if (rises(rf, jl, jr, tol)) {
    out.shape = FanShape::I;
    return out;
  }
  if (falls(rf, jl, jr, tol)) {
    out.shape = FanShape::D;
    return out;
  }

  for (bool maximum : {true, false}) {
    const auto plateau = extreme_plateau(rf, jl, jr, tol, maximum);
    if (!plateau) continue;
    const bool shape_ok = maximum ? rises(rf, jl, plateau->lo, tol) && falls(rf, plateau->hi, jr, tol)
                                  : falls(rf, jl, plateau->lo, tol) && rises(rf, plateau->hi, jr, tol);
    if (!shape_ok) continue;
    const double left = thetas[plateau->lo];
    const double right = thetas[plateau->hi];
    if (2.0 * alpha <= kPi) {
      out.diagnostics = fmt::format("{} pattern needs 2 alpha > pi (alpha = {:.6g})", maximum ? "ID" : "DI", alpha);
      return out;
    }
    if (std::abs(right - left - kPi) > 2.0 * spacing) {
      out.diagnostics = fmt::format("interior plateau [{:.6g}, {:.6g}] has width {:.6g}, expected pi", left, right,
                                    right - left);
      return out;
    }
    out.shape = maximum ? FanShape::ID : FanShape::DI;
    out.alpha_left = left;
    out.alpha_right = right;
    return out;
  }
  out.diagnostics = "Rf between the wall plateaus matches no monotone pattern";
  return out;
}

double default_fan_tolerance(const RadialTrace& trace) {
  require(!trace.residual.empty(), "default_fan_tolerance: empty trace");
  std::vector<double> r = trace.residual;
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  double median = *mid;
  if (r.size() % 2 == 0) median = 0.5 * (median + *std::max_element(r.begin(), mid));
  double peak = 0.0;
  for (double v : trace.rf) peak = std::max(peak, std::abs(v));
  return std::max(10.0 * median, 1e-9 * (1.0 + peak));
}

FanMeasurement measure_fans(const RadialTrace& trace, double alpha, std::optional<double> tol) {
  return measure_fans(trace.thetas, trace.rf, alpha, tol ? *tol : default_fan_tolerance(trace));
}

void write_solution_csv(std::ostream& out, const SolutionField& field) {
  out << "r,theta,f\n";
  for (int i = 0; i <= field.mesh.m(); ++i) {
    for (int j = 0; j <= field.mesh.n_theta(); ++j) {
      fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", field.mesh.radii[static_cast<std::size_t>(i)],
                 field.mesh.thetas[static_cast<std::size_t>(j)], field.at(i, j));
    }
  }
}

void write_trace_csv(std::ostream& out, const RadialTrace& trace) {
  out << "theta,Rf,residual\n";
  for (std::size_t j = 0; j < trace.thetas.size(); ++j) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", trace.thetas[j], trace.rf[j], trace.residual[j]);
  }
}

void write_manifest(std::ostream& out, const SolutionField& field,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  const SectorMesh& mesh = field.mesh;
  fmt::print(out, "alpha: {:.17g}\n", mesh.geometry.alpha());
  fmt::print(out, "r_min: {:.17g}\n", mesh.radii.back());
  fmt::print(out, "r_max: {:.17g}\n", mesh.radii.front());
  fmt::print(out, "m: {}\n", mesh.m());
  fmt::print(out, "n_theta: {}\n", mesh.n_theta());
  fmt::print(out, "kappa: {:.17g}\n", field.kappa);
  fmt::print(out, "lambda: {:.17g}\n", field.lambda);
  fmt::print(out, "converged: {}\n", field.converged);
  fmt::print(out, "residual_norm: {:.6e}\n", field.residual_norm);
  fmt::print(out, "newton_iterations: {}\n", field.newton_iterations);
  fmt::print(out, "mean_pinned: {}\n", field.mean_pinned);
  out << "residual_history:";
  for (double r : field.residual_history) fmt::print(out, " {:.6e}", r);
  out << "\n";
  for (const auto& w : field.warnings) fmt::print(out, "warning: {}\n", w);
  for (const auto& [key, value] : extra) fmt::print(out, "{}: {}\n", key, value);
}

}  // namespace wedgecap
