#include "wedgecap/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "wedgecap/blowup_geometry.hpp"
#include "wedgecap/capillary_solver.hpp"
#include "wedgecap/error.hpp"
#include "wedgecap/fan_bounds.hpp"
#include "wedgecap/fan_functionals.hpp"
#include "wedgecap/profile_io.hpp"

namespace wedgecap::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir = ".";
  std::string config;
  bool degrees = false;
  std::optional<double> tol;
  std::optional<double> eps_floor;
  std::optional<double> beta_step;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out_dir, "Output directory (created if missing)");
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_flag("--degrees", c.degrees, "Read every input angle in degrees");
  app->add_option("--tol", c.tol, "Tolerance: lambda checks (bounds, blowup) or Newton residual (solve)");
  app->add_option("--eps-floor", c.eps_floor, "Smallest scale eps in adhesion sweeps (default 1e-10)");
  app->add_option("--beta-step", c.beta_step, "Step of the fan-size scan (default 1e-3)");
}

double to_radians(double value, bool degrees) { return degrees ? value * kPi / 180.0 : value; }

fs::path prepare_out(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir)) {
    fail(ErrorCode::MalformedInput, "cannot create output directory '" + c.out_dir + "'");
  }
  return c.out_dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::MalformedInput, "cannot write '" + path.string() + "'");
  return f;
}

double eps_floor_of(const Common& c) {
  const double v = c.eps_floor.value_or(1e-10);
  require(v > 0.0 && v < 1.0, "--eps-floor must lie in (0, 1)");
  return v;
}

LambdaGridConfig lambda_config(const Common& c) {
  LambdaGridConfig cfg;
  if (c.tol) {
    require(*c.tol >= 0.0 && *c.tol < 1e-2, "--tol must lie in [0, 1e-2)");
    cfg.tolerance = *c.tol;
  }
  return cfg;
}

std::optional<json> load_config(const Common& c) {
  if (c.config.empty()) return std::nullopt;
  return load_json_file(c.config);
}

Side parse_side(const std::string& text) {
  if (text == "+") return Side::Plus;
  if (text == "-") return Side::Minus;
  throw UsageError("side must be '+' or '-', got '" + text + "'");
}

AdhesionSource parse_source(const std::string& text) {
  if (text == "auto") return AdhesionSource::Auto;
  if (text == "sweep") return AdhesionSource::Sweep;
  throw UsageError("method must be 'auto' or 'sweep', got '" + text + "'");
}

FanCase parse_case(const std::string& text) {
  const auto c = parse_fan_case(text);
  if (!c) throw UsageError("case must be one of I, D, ID, DI, got '" + text + "'");
  return *c;
}

// A profile from its own file, or from `key` inside the config. With `wall`
// set, the spec is bound to that wall.
ProfileSpec resolve_profile(const std::string& file, const std::optional<json>& config, const std::string& key,
                            bool degrees, std::optional<Side> wall) {
  json j;
  if (!file.empty()) {
    j = load_json_file(file);
  } else if (config && config->contains(key)) {
    j = config->at(key);
  } else if (config && key == "profile") {
    j = *config;
  } else {
    throw UsageError("no profile given for '" + key + "'");
  }
  ProfileSpec spec = parse_profile_spec(j, degrees);
  if (wall) {
    if (j.is_object() && j.contains("side") && spec.side != *wall) {
      throw UsageError("profile for '" + key + "' is tagged with the other wall");
    }
    spec.side = *wall;
  }
  return spec;
}

std::string describe(const ProfileSpec& spec) {
  const std::string side(to_string(spec.side));
  switch (spec.generator) {
    case ProfileGenerator::Constant:
      return fmt::format("side {} constant gamma={:.17g} s_max={:.17g}", side, spec.gamma1, spec.s_max);
    case ProfileGenerator::Example1:
    case ProfileGenerator::Example2:
      return fmt::format("side {} {} gamma1={:.17g} gamma2={:.17g} depth={}", side,
                         spec.generator == ProfileGenerator::Example1 ? "example1" : "example2", spec.gamma1,
                         spec.gamma2, spec.depth);
    case ProfileGenerator::Segments: break;
  }
  return fmt::format("side {} segments={} s_max={:.17g}", side, spec.gammas.size(), spec.s_max);
}

std::optional<std::pair<AdhesionEstimate, AdhesionEstimate>> exact_pair(const ProfileSpec& spec,
                                                                        const ContactProfile& profile, double b) {
  switch (spec.generator) {
    case ProfileGenerator::Constant: {
      const double v = b * std::cos(spec.gamma1);
      return std::pair{AdhesionEstimate{b, AdhesionKind::I, v, EstimateMethod::LogPeriodicExact, 0.0},
                       AdhesionEstimate{b, AdhesionKind::S, v, EstimateMethod::LogPeriodicExact, 0.0}};
    }
    case ProfileGenerator::Example1: return exact_A_example1(spec.gamma1, spec.gamma2, b);
    case ProfileGenerator::Example2: return exact_A_log_periodic(profile, b, 4.0);
    case ProfileGenerator::Segments: break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

struct ProfileOpts {
  Common common;
  std::string profile;
  double b = 0.5;
  int b_count = 19;
  int ppd = 64;
};

int cmd_profile(const ProfileOpts& o, std::ostream& out) {
  const auto config = load_config(o.common);
  const ProfileSpec spec = resolve_profile(o.profile, config, "profile", o.common.degrees, std::nullopt);
  const ContactProfile profile = spec.build();
  const double eps_floor = eps_floor_of(o.common);
  require(o.b > 0.0 && o.b <= 1.0, "--b must lie in (0, 1]");
  require(o.b_count >= 1 && o.b_count <= 10000, "--b-count must lie in [1, 10000]");
  require(o.ppd >= 8 && o.ppd <= 4096, "--ppd must lie in [8, 4096]");
  const fs::path dir = prepare_out(o.common);

  const SweepConfig sweep = SweepConfig::defaults_for(profile, o.b, eps_floor, o.ppd);
  sweep.validate(profile, o.b);
  auto scales = open_out(dir / "averaged_cos.csv");
  scales << "eps,averaged_cos\n";
  const auto grid = sweep.grid();
  for (double eps : grid) fmt::print(scales, "{:.17g},{:.17g}\n", eps, profile.averaged_cos(eps, o.b));

  const SweepTable table(profile, eps_floor, o.ppd);
  auto curves = open_out(dir / "adhesion.csv");
  curves << "b,A_I,A_S,method,uncertainty\n";
  int rows = 0;
  for (int k = 1; k <= o.b_count; ++k) {
    const double b = static_cast<double>(k) / (o.b_count + 1);
    const auto ai = table.estimate(AdhesionKind::I, b);
    const auto as = table.estimate(AdhesionKind::S, b);
    fmt::print(curves, "{:.17g},{:.17g},{:.17g},{},{:.17g}\n", b, ai.value, as.value, to_string(ai.method),
               ai.uncertainty);
    ++rows;
    if (const auto exact = exact_pair(spec, profile, b)) {
      fmt::print(curves, "{:.17g},{:.17g},{:.17g},{},{:.17g}\n", b, exact->first.value, exact->second.value,
                 to_string(exact->first.method), 0.0);
      ++rows;
    }
  }
  fmt::print(out, "profile: {}\n", describe(spec));
  fmt::print(out, "wrote {} ({} rows) and {} ({} rows)\n", (dir / "averaged_cos.csv").string(), grid.size(),
             (dir / "adhesion.csv").string(), rows);
  return kOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsOpts {
  Common common;
  std::string plus;
  std::string minus;
  std::string case_tag = "all";
  std::string method = "auto";
  int ppd = 64;
};

struct ConditionRow {
  std::optional<FanBoundResult> result;
  std::string adhesion_method;
  EffectiveAngle effective{0.0, 0.0};
  double corollary = 0.0;
};

int cmd_bounds(const BoundsOpts& o, std::ostream& out) {
  std::vector<FanCase> cases;
  if (o.case_tag == "all") {
    cases = {FanCase::I, FanCase::D, FanCase::ID, FanCase::DI};
  } else {
    cases = {parse_case(o.case_tag)};
  }
  const AdhesionSource source = parse_source(o.method);
  const auto config = load_config(o.common);
  const ProfileSpec plus = resolve_profile(o.plus, config, "profile_plus", o.common.degrees, Side::Plus);
  const ProfileSpec minus = resolve_profile(o.minus, config, "profile_minus", o.common.degrees, Side::Minus);
  const double eps_floor = eps_floor_of(o.common);
  FanScanConfig scan;
  scan.beta_step = o.common.beta_step.value_or(1e-3);
  scan.lambda = lambda_config(o.common);
  const fs::path dir = prepare_out(o.common);

  std::map<std::pair<int, int>, ConditionRow> cache;
  const auto row_for = [&](const SideCondition& sc, FanCase fan_case) -> const ConditionRow& {
    const auto key = std::pair{static_cast<int>(sc.side), static_cast<int>(sc.kind)};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const ProfileSpec& spec = sc.side == Side::Plus ? plus : minus;
    const AdhesionKind kind = sc.kind == ConditionKind::Increasing ? AdhesionKind::I : AdhesionKind::S;
    const AdhesionFunction a = adhesion_for(spec, kind, source, eps_floor, o.ppd);
    ConditionRow row;
    row.adhesion_method = std::string(to_string(a.method()));
    try {
      row.result = min_admissible_fan(a, sc.kind, scan, sc.side, fan_case);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleScan) throw;
    }
    row.effective = effective_angle(a, default_b_grid());
    row.corollary = corollary1_bound(row.effective.m, sc.kind == ConditionKind::Increasing ? CorollaryVariant::A
                                                                                            : CorollaryVariant::C);
    return cache.emplace(key, row).first->second;
  };

  auto csv = open_out(dir / "bounds.csv");
  csv << "case,side,condition,condition_number,beta_min,worst_lambda,monotone,method,adhesion_method,effective_m,"
         "effective_sigma,corollary_bound\n";
  bool infeasible = false;
  for (FanCase fan_case : cases) {
    for (const SideCondition& sc : case_condition_map(fan_case)) {
      const ConditionRow& row = row_for(sc, fan_case);
      const std::string beta = row.result ? fmt::format("{:.17g}", row.result->beta_min) : "";
      const std::string worst =
          row.result && row.result->worst_lambda ? fmt::format("{:.17g}", *row.result->worst_lambda) : "";
      const std::string monotone = row.result ? (row.result->monotone_flag ? "true" : "false") : "";
      const std::string method = row.result ? std::string(to_string(row.result->method)) : "infeasible_scan";
      fmt::print(csv, "{},{},{},{},{},{},{},{},{},{:.17g},{:.17g},{:.17g}\n", to_string(fan_case), to_string(sc.side),
                 to_string(sc.kind), sc.number, beta, worst, monotone, method, row.adhesion_method, row.effective.m,
                 row.effective.sigma, row.corollary);
      if (row.result) {
        fmt::print(out, "case {:<2} side {} ({}) {:<10}  beta_min = {:.6f}  sigma = {:.6f}  corollary = {:.6f}\n",
                   to_string(fan_case), to_string(sc.side), sc.number, to_string(sc.kind), row.result->beta_min,
                   row.effective.sigma, row.corollary);
      } else {
        infeasible = true;
        fmt::print(out, "case {:<2} side {} ({}) {:<10}  infeasible_scan: no admissible beta below pi - step\n",
                   to_string(fan_case), to_string(sc.side), sc.number, to_string(sc.kind));
      }
    }
  }
  fmt::print(out, "wrote {}\n", (dir / "bounds.csv").string());
  return infeasible ? kInfeasible : kOk;
}

// ---------------------------------------------------------------------------
// verify-examples
// ---------------------------------------------------------------------------

struct VerifyOpts {
  Common common;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::vector<double> bs{0.25, 0.5, 0.75};
  int ppd = 64;
};

struct Check {
  std::string name;
  double exact_err = 0.0;
  double exact_tol = 0.0;
  double sweep_err = 0.0;        // worst error over the b values
  double sweep_ratio = 0.0;      // worst error / tolerance
  std::string sweep_tol_text;
  bool exact_ok() const { return exact_err <= exact_tol; }
  bool sweep_ok() const { return sweep_ratio <= 1.0; }
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  const double g1 = o.gamma1 ? to_radians(*o.gamma1, o.common.degrees) : kPi / 3.0;
  const double g2 = o.gamma2 ? to_radians(*o.gamma2, o.common.degrees) : 2.0 * kPi / 3.0;
  require(0.0 <= g1 && g1 <= g2 && g2 <= kPi, "verify-examples needs 0 <= gamma1 <= gamma2 <= pi");
  require(!o.bs.empty(), "verify-examples needs at least one b");
  for (double b : o.bs) require(b > 0.0 && b < 1.0, "verify-examples: b must lie in (0, 1)");
  const double eps_floor = eps_floor_of(o.common);
  const fs::path dir = prepare_out(o.common);

  const ContactProfile e1 = example1_profile(g1, g2, kDefaultExample1Depth);
  const ContactProfile e2 = example2_profile(g1, g2, kDefaultExample2Depth);
  const double c1 = std::cos(g1);
  const double c2 = std::cos(g2);

  Check e1_ai{"example1 A_I(b) = b cos(gamma2)", 0, 1e-12, 0, 0, "0.05 b"};
  Check e1_as{"example1 A_S(b) = b cos(gamma1)", 0, 1e-12, 0, 0, "0.05 b"};
  Check e2_ai{"example2 A_I(b) = b (cos(gamma1)/3 + 2 cos(gamma2)/3)", 0, 1e-9, 0, 0, "1e-3"};
  Check e2_as{"example2 A_S(b) = b (2 cos(gamma1)/3 + cos(gamma2)/3)", 0, 1e-9, 0, 0, "1e-3"};
  Check e2_lo{"example2 essliminf gamma = gamma1, A_S(b) <= b cos(essliminf)", 0, 1e-15, 0, 0, "1e-12"};
  Check e2_hi{"example2 esslimsup gamma = gamma2, A_I(b) >= b cos(esslimsup)", 0, 1e-15, 0, 0, "1e-12"};

  const auto track = [](Check& c, double exact_err, double sweep_err, double sweep_tol) {
    c.exact_err = std::max(c.exact_err, exact_err);
    c.sweep_err = std::max(c.sweep_err, sweep_err);
    c.sweep_ratio = std::max(c.sweep_ratio, sweep_err / sweep_tol);
  };

  const EssentialRange ess = essential_range(e2);
  for (double b : o.bs) {
    const auto [x1i, x1s] = exact_A_example1(g1, g2, b);
    const auto s1 = SweepConfig::defaults_for(e1, b, eps_floor, o.ppd);
    const double w1i = estimate_AI(e1, b, s1).value;
    const double w1s = estimate_AS(e1, b, s1).value;
    track(e1_ai, std::abs(x1i.value - b * c2), std::abs(w1i - b * c2), 0.05 * b);
    track(e1_as, std::abs(x1s.value - b * c1), std::abs(w1s - b * c1), 0.05 * b);

    const double want_i = b * (c1 / 3.0 + 2.0 * c2 / 3.0);
    const double want_s = b * (2.0 * c1 / 3.0 + c2 / 3.0);
    const auto [x2i, x2s] = exact_A_log_periodic(e2, b, 4.0);
    const auto s2 = SweepConfig::defaults_for(e2, b, eps_floor, o.ppd);
    const double w2i = estimate_AI(e2, b, s2).value;
    const double w2s = estimate_AS(e2, b, s2).value;
    track(e2_ai, std::abs(x2i.value - want_i), std::abs(w2i - want_i), 1e-3);
    track(e2_as, std::abs(x2s.value - want_s), std::abs(w2s - want_s), 1e-3);

    track(e2_lo, std::abs(ess.ess_liminf - g1), std::max(0.0, w2s - b * std::cos(ess.ess_liminf)), 1e-12);
    track(e2_hi, std::abs(ess.ess_limsup - g2), std::max(0.0, b * std::cos(ess.ess_limsup) - w2i), 1e-12);
  }

  std::ostringstream report;
  fmt::print(report, "gamma1 = {:.17g}, gamma2 = {:.17g}, eps_floor = {:.3g}, points_per_decade = {}\n", g1, g2,
             eps_floor, o.ppd);
  bool all = true;
  for (const Check* c : {&e1_ai, &e1_as, &e2_ai, &e2_as, &e2_lo, &e2_hi}) {
    const bool ok = c->exact_ok() && c->sweep_ok();
    all = all && ok;
    fmt::print(report, "{} {}: exact {} (err {:.3e}, tol {:.0e}); sweep {} (err {:.3e}, tol {})\n",
               ok ? "PASS" : "FAIL", c->name, c->exact_ok() ? "PASS" : "FAIL", c->exact_err, c->exact_tol,
               c->sweep_ok() ? "PASS" : "FAIL", c->sweep_err, c->sweep_tol_text);
  }
  out << report.str();
  auto file = open_out(dir / "verify_examples.txt");
  file << report.str();
  return all ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveOpts {
  Common common;
  std::optional<double> alpha;
  std::optional<double> kappa;
  std::optional<double> lambda;
  std::optional<double> gamma_plus;
  std::optional<double> gamma_minus;
  std::optional<double> r_min;
  std::optional<double> r_max;
  std::optional<double> fan_tol;
  std::optional<int> m;
  std::optional<int> n_theta;
  std::optional<int> max_iter;
  std::optional<int> n_radii;
  bool mms = false;
  std::vector<int> mms_sizes{16, 32, 64, 128};
};

std::optional<double> number_in(const json& block, const char* key) {
  if (!block.contains(key)) return std::nullopt;
  if (!block.at(key).is_number()) fail(ErrorCode::MalformedInput, std::string("config: '") + key + "' must be a number");
  return block.at(key).get<double>();
}

std::optional<int> integer_in(const json& block, const char* key) {
  if (!block.contains(key)) return std::nullopt;
  if (!block.at(key).is_number_integer()) {
    fail(ErrorCode::MalformedInput, std::string("config: '") + key + "' must be an integer");
  }
  return block.at(key).get<int>();
}

template <class T>
T pick(const std::optional<T>& flag, const std::optional<T>& file, T fallback) {
  return flag ? *flag : (file ? *file : fallback);
}

struct PmcModel {
  std::string description;
  HeightFunction h;
  HeightFunction dh;
};

PmcModel parse_pmc(const json& block) {
  if (!block.is_object() || !block.contains("type") || !block.at("type").is_string()) {
    fail(ErrorCode::MalformedInput, "config: 'pmc' must be an object with a string 'type'");
  }
  const auto type = block.at("type").get<std::string>();
  if (type == "linear") {
    const double kappa = number_in(block, "kappa").value_or(0.0);
    const double lambda = number_in(block, "lambda").value_or(0.0);
    require(kappa >= 0.0, "pmc: linear H needs kappa >= 0");
    return {fmt::format("2H = {:.17g} t + {:.17g}", kappa, lambda),
            [kappa, lambda](double, double, double t) { return (kappa * t + lambda) / 2.0; },
            [kappa](double, double, double) { return kappa / 2.0; }};
  }
  if (type == "tanh") {
    const double amplitude = number_in(block, "amplitude").value_or(0.5);
    const double rate = number_in(block, "rate").value_or(1.0);
    require(amplitude >= 0.0 && rate >= 0.0, "pmc: tanh H needs amplitude, rate >= 0");
    return {fmt::format("H = {:.17g} tanh({:.17g} t)", amplitude, rate),
            [amplitude, rate](double, double, double t) { return amplitude * std::tanh(rate * t); },
            [amplitude, rate](double, double, double t) {
              const double th = std::tanh(rate * t);
              return amplitude * rate * (1.0 - th * th);
            }};
  }
  fail(ErrorCode::MalformedInput, "config: unknown pmc type '" + type + "'");
}

int run_mms(const SolveOpts& o, const std::optional<json>& config, double alpha, const SolverConfig& solver,
            const fs::path& dir, std::ostream& out) {
  const json block = config && config->contains("solver") ? config->at("solver") : json::object();
  const double r_min = pick(o.r_min, number_in(block, "r_min"), 0.1);
  const double r_max = pick(o.r_max, number_in(block, "r_max"), 1.0);
  for (int size : o.mms_sizes) require(size >= 16 && size <= 512, "--mms-sizes entries must lie in [16, 512]");
  const ManufacturedStudy study = manufactured_convergence(o.mms_sizes, alpha, r_min, r_max, solver);

  auto csv = open_out(dir / "mms.csv");
  csv << "m,n_theta,max_error,order\n";
  bool converged = true;
  for (std::size_t k = 0; k < study.runs.size(); ++k) {
    const auto& run = study.runs[k];
    converged = converged && run.converged;
    const std::string order = k == 0 ? "" : fmt::format("{:.6f}", study.slopes[k - 1]);
    fmt::print(csv, "{},{},{:.17g},{}\n", run.m, run.n_theta, run.max_error, order);
    fmt::print(out, "m = n_theta = {:<4} max error = {:.3e}  order = {}\n", run.m, run.max_error,
               order.empty() ? "-" : order);
  }
  const bool order_ok = study.fitted_slope >= 1.9;
  fmt::print(out, "fitted order {:.4f} ({})\n", study.fitted_slope, order_ok ? "PASS, >= 1.9" : "FAIL, < 1.9");
  auto manifest = open_out(dir / "manifest.txt");
  fmt::print(manifest, "mode: manufactured solution f = r^2 cos(theta), kappa = 1, lambda = 0\n");
  fmt::print(manifest, "alpha: {:.17g}\nr_min: {:.17g}\nr_max: {:.17g}\n", alpha, r_min, r_max);
  fmt::print(manifest, "tol: {:.3e}\nmax_iter: {}\n", solver.tol, solver.max_iter);
  fmt::print(manifest, "fitted_order: {:.6f}\nmms_check: {}\nconverged: {}\n", study.fitted_slope,
             order_ok ? "PASS" : "FAIL", converged);
  return converged ? kOk : kNotConverged;
}

bool same_profile(const ContactProfile& a, const ContactProfile& b) {
  const auto ea = a.segment_ends();
  const auto eb = b.segment_ends();
  const auto va = a.segment_values();
  const auto vb = b.segment_values();
  return std::equal(ea.begin(), ea.end(), eb.begin(), eb.end()) && std::equal(va.begin(), va.end(), vb.begin(), vb.end());
}

int cmd_solve(const SolveOpts& o, std::ostream& out) {
  const auto config = load_config(o.common);
  const bool deg = o.common.degrees;
  const json block = config && config->contains("solver") ? config->at("solver") : json::object();
  if (!block.is_object()) fail(ErrorCode::MalformedInput, "config: 'solver' must be an object");

  const auto angle_flag = [deg](const std::optional<double>& v) -> std::optional<double> {
    return v ? std::optional<double>(to_radians(*v, deg)) : std::nullopt;
  };
  const auto angle_file = [&](const char* key) -> std::optional<double> {
    if (!config) return std::nullopt;
    const auto v = number_in(*config, key);
    return v ? std::optional<double>(to_radians(*v, deg)) : std::nullopt;
  };
  const double alpha = pick(angle_flag(o.alpha), angle_file("alpha"), kPi / 4.0);
  const WedgeGeometry geometry(alpha);

  SolverConfig solver;
  solver.tol = pick(o.common.tol, number_in(block, "tol"), 1e-10);
  solver.max_iter = pick(o.max_iter, integer_in(block, "max_iter"), 200);
  require(solver.tol > 0.0 && solver.tol < 1.0, "--tol must lie in (0, 1)");
  require(solver.max_iter >= 1 && solver.max_iter <= 10000, "--max-iter must lie in [1, 10000]");
  const fs::path dir = prepare_out(o.common);

  if (o.mms) return run_mms(o, config, alpha, solver, dir, out);

  const double kappa = pick(o.kappa, number_in(block, "kappa"), 1.0);
  const double lambda = pick(o.lambda, number_in(block, "lambda"), 0.0);
  const double r_min = pick(o.r_min, number_in(block, "r_min"), 1e-3);
  const double r_max = pick(o.r_max, number_in(block, "r_max"), 1.0);
  const int m = pick(o.m, integer_in(block, "m"), 32);
  const int n_theta = pick(o.n_theta, integer_in(block, "n_theta"), 32);
  const int n_radii = pick(o.n_radii, integer_in(block, "n_radii"), std::min(6, m));
  require(m >= 16 && n_theta >= 16 && m <= 1024 && n_theta <= 1024, "m and n_theta must lie in [16, 1024]");

  const auto wall_spec = [&](const std::optional<double>& gamma, const char* key, Side side) {
    if (gamma) {
      ProfileSpec spec;
      spec.side = side;
      spec.generator = ProfileGenerator::Constant;
      spec.gamma1 = spec.gamma2 = to_radians(*gamma, deg);
      spec.s_max = r_max;
      return spec;
    }
    if (config && config->contains(key)) return resolve_profile("", config, key, deg, side);
    ProfileSpec spec;
    spec.side = side;
    spec.generator = ProfileGenerator::Constant;
    spec.gamma1 = spec.gamma2 = kPi / 2.0;
    spec.s_max = r_max;
    return spec;
  };
  const ProfileSpec plus_spec = wall_spec(o.gamma_plus, "profile_plus", Side::Plus);
  const ProfileSpec minus_spec = wall_spec(o.gamma_minus, "profile_minus", Side::Minus);
  const ContactProfile plus = plus_spec.build();
  const ContactProfile minus = minus_spec.build();
  const SectorMesh mesh = build_sector_mesh(geometry, r_min, r_max, m, n_theta);

  std::optional<PmcModel> pmc;
  if (config && config->contains("pmc")) pmc = parse_pmc(config->at("pmc"));
  const SolutionField field = pmc ? solve_pmc(mesh, pmc->h, plus, minus, solver, pmc->dh)
                                  : solve_capillary(mesh, kappa, lambda, plus, minus, solver);

  std::vector<std::pair<std::string, std::string>> extra;
  extra.emplace_back("equation", pmc ? "Nf = 2H(x, y, f), " + pmc->description
                                     : fmt::format("Nf = kappa f + lambda"));
  extra.emplace_back("profile_plus", describe(plus_spec));
  extra.emplace_back("profile_minus", describe(minus_spec));
  extra.emplace_back("tol", fmt::format("{:.3e}", solver.tol));
  extra.emplace_back("max_iter", std::to_string(solver.max_iter));

  const auto ep = essential_range(plus);
  const auto em = essential_range(minus);
  extra.emplace_back("theorem1_applicability",
                     std::string(to_string(theorem1_applicability(
                         geometry, {ep.ess_liminf, ep.ess_limsup, em.ess_liminf, em.ess_limsup}))));
  const Bounds bounds = bounds_estimate(field);
  extra.emplace_back("M1", fmt::format("{:.17g}", bounds.m1));
  extra.emplace_back("M2", fmt::format("{:.17g}", bounds.m2));
  extra.emplace_back("torus_minor_radius", fmt::format("{:.17g}", torus_minor_radius(bounds.m2)));

  if (same_profile(plus, minus)) {
    double asym = 0.0;
    for (int i = 0; i <= mesh.m(); ++i) {
      for (int j = 0; j <= mesh.n_theta(); ++j) asym = std::max(asym, std::abs(field.at(i, j) - field.at(i, n_theta - j)));
    }
    extra.emplace_back("symmetry_check", fmt::format("{} (max |f(r,theta) - f(r,-theta)| = {:.3e})",
                                                     asym <= 1e-8 ? "PASS" : "FAIL", asym));
  }

  {
    auto csv = open_out(dir / "solution.csv");
    write_solution_csv(csv, field);
  }
  if (field.converged) {
    const RadialTrace trace = radial_trace(field, n_radii);
    const FanMeasurement fans = measure_fans(trace, alpha, o.fan_tol);
    auto trace_csv = open_out(dir / "trace.csv");
    write_trace_csv(trace_csv, trace);
    auto fans_csv = open_out(dir / "fans.csv");
    fans_csv << "case,alpha1,alpha2,alpha_L,alpha_R,beta_minus,beta_plus,tolerance,diagnostics\n";
    const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
    fmt::print(fans_csv, "{},{:.17g},{:.17g},{},{},{:.17g},{:.17g},{:.17g},\"{}\"\n", to_string(fans.shape),
               fans.alpha1, fans.alpha2, opt(fans.alpha_left), opt(fans.alpha_right), fans.beta_minus, fans.beta_plus,
               fans.tolerance, fans.diagnostics);
    extra.emplace_back("n_radii", std::to_string(n_radii));
    extra.emplace_back("fan_case", std::string(to_string(fans.shape)));
    extra.emplace_back("beta_minus", fmt::format("{:.17g}", fans.beta_minus));
    extra.emplace_back("beta_plus", fmt::format("{:.17g}", fans.beta_plus));
    fmt::print(out, "fan case {} (beta- = {:.6f}, beta+ = {:.6f}, tol = {:.3e})\n", to_string(fans.shape),
               fans.beta_minus, fans.beta_plus, fans.tolerance);
  } else {
    extra.emplace_back("trace", "skipped (solver did not converge)");
  }
  {
    auto manifest = open_out(dir / "manifest.txt");
    write_manifest(manifest, field, extra);
  }
  fmt::print(out, "converged: {} after {} Newton iterations, residual {:.3e}\n", field.converged,
             field.newton_iterations, field.residual_norm);
  for (const auto& w : field.warnings) fmt::print(out, "warning: {}\n", w);
  return field.converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------------------
// blowup
// ---------------------------------------------------------------------------

struct BlowupOpts {
  Common common;
  std::string side;
  std::string case_tag;
  std::string profile;
  std::string method = "auto";
  std::optional<double> beta;
  std::optional<double> gamma;
};

int cmd_blowup(const BlowupOpts& o, std::ostream& out) {
  const Side side = parse_side(o.side);
  const FanCase fan_case = parse_case(o.case_tag);
  const AdhesionSource source = parse_source(o.method);
  if (!o.beta) throw UsageError("--beta is required");
  const double beta = to_radians(*o.beta, o.common.degrees);
  if (!(beta >= 0.0 && beta < kPi)) throw UsageError("--beta must lie in [0, pi)");
  if (o.gamma.has_value() == !o.profile.empty()) throw UsageError("give exactly one of --gamma and --profile");

  const ConditionKind kind = condition_for(fan_case, side);
  const AdhesionKind a_kind = kind == ConditionKind::Increasing ? AdhesionKind::I : AdhesionKind::S;
  const double eps_floor = eps_floor_of(o.common);
  const AdhesionFunction a =
      o.gamma ? AdhesionFunction::constant(a_kind, to_radians(*o.gamma, o.common.degrees))
              : adhesion_for(resolve_profile(o.profile, std::nullopt, "profile", o.common.degrees, side), a_kind,
                             source, eps_floor);
  const LambdaGridConfig grid = lambda_config(o.common);
  const fs::path dir = prepare_out(o.common);

  {
    auto csv = open_out(dir / "blowup.csv");
    write_limit_sweep_csv(csv, a, kind, beta, lambda_grid(beta, grid));
  }
  const auto witness = contradiction_witness(a, fan_case, side, beta, grid);
  std::ostringstream verdict;
  fmt::print(verdict, "case: {}\nside: {}\ncondition: {}\nbeta: {:.17g}\n", to_string(fan_case), to_string(side),
             to_string(kind), beta);
  if (witness) {
    fmt::print(verdict, "verdict: witness\nlambda: {:.17g}\nvalue: {:.17g}\n", witness->lambda, witness->value);
  } else {
    verdict << "verdict: consistent\n";
  }
  out << verdict.str();
  auto file = open_out(dir / "blowup_verdict.txt");
  file << verdict.str();
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return kBadInput;
    case ErrorCode::InfeasibleScan: return kInfeasible;
    case ErrorCode::SolverFailure: return kNotConverged;
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotSelfSimilar:
    case ErrorCode::DegenerateTriangle: return kOutOfRange;
  }
  return kOutOfRange;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contact-angle fans at wedge corners: adhesion functionals, fan bounds, blow-up checks, solver"};
  app.name("wedgecap");
  app.require_subcommand(1, 1);

  ProfileOpts profile_opts;
  auto* profile = app.add_subcommand("profile", "Scale sweeps and adhesion curves for one wall profile");
  add_common(profile, profile_opts.common);
  profile->add_option("--profile", profile_opts.profile, "Profile JSON file (or pass it as --config)");
  profile->add_option("--b", profile_opts.b, "b for the averaged_cos table");
  profile->add_option("--b-count", profile_opts.b_count, "Number of b values k/(N+1) in the adhesion table");
  profile->add_option("--ppd", profile_opts.ppd, "Sweep points per decade");

  BoundsOpts bounds_opts;
  auto* bounds = app.add_subcommand("bounds", "Minimal admissible fan sizes and effective contact angles");
  add_common(bounds, bounds_opts.common);
  bounds->add_option("--plus", bounds_opts.plus, "Profile JSON for the + wall");
  bounds->add_option("--minus", bounds_opts.minus, "Profile JSON for the - wall");
  bounds->add_option("--case", bounds_opts.case_tag, "I, D, ID, DI or all");
  bounds->add_option("--method", bounds_opts.method, "auto (closed forms when known) or sweep");
  bounds->add_option("--ppd", bounds_opts.ppd, "Sweep points per decade");

  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand("verify-examples", "Recompute the closed forms of the two example profiles");
  add_common(verify, verify_opts.common);
  verify->add_option("--gamma1", verify_opts.gamma1, "First contact angle (default pi/3)");
  verify->add_option("--gamma2", verify_opts.gamma2, "Second contact angle (default 2 pi/3)");
  verify->add_option("--b", verify_opts.bs, "b values")->delimiter(',');
  verify->add_option("--ppd", verify_opts.ppd, "Sweep points per decade");

  SolveOpts solve_opts;
  auto* solve = app.add_subcommand("solve", "Solve the capillary problem on a truncated sector");
  add_common(solve, solve_opts.common);
  solve->add_option("--alpha", solve_opts.alpha, "Half-opening angle (default pi/4)");
  solve->add_option("--kappa", solve_opts.kappa, "kappa >= 0 (default 1)");
  solve->add_option("--lambda", solve_opts.lambda, "lambda (default 0)");
  solve->add_option("--gamma-plus", solve_opts.gamma_plus, "Constant contact angle on the + wall");
  solve->add_option("--gamma-minus", solve_opts.gamma_minus, "Constant contact angle on the - wall");
  solve->add_option("--r-min", solve_opts.r_min, "Inner radius (default 1e-3; 0.1 with --mms)");
  solve->add_option("--r-max", solve_opts.r_max, "Outer radius (default 1)");
  solve->add_option("--m", solve_opts.m, "Radial cells (default 32)");
  solve->add_option("--n-theta", solve_opts.n_theta, "Angular cells (default 32)");
  solve->add_option("--max-iter", solve_opts.max_iter, "Newton iteration limit (default 200)");
  solve->add_option("--n-radii", solve_opts.n_radii, "Radii used for the radial limit (default 6)");
  solve->add_option("--fan-tol", solve_opts.fan_tol, "Plateau tolerance for fan measurement");
  solve->add_flag("--mms", solve_opts.mms, "Manufactured-solution convergence study");
  solve->add_option("--mms-sizes", solve_opts.mms_sizes, "Mesh sizes for --mms")->delimiter(',');

  BlowupOpts blowup_opts;
  auto* blowup = app.add_subcommand("blowup", "Limiting functional differences and contradiction witness");
  add_common(blowup, blowup_opts.common);
  blowup->add_option("--side", blowup_opts.side, "+ or -")->required();
  blowup->add_option("--case", blowup_opts.case_tag, "I, D, ID or DI")->required();
  blowup->add_option("--beta", blowup_opts.beta, "Claimed fan size");
  blowup->add_option("--gamma", blowup_opts.gamma, "Constant contact angle as the adhesion source");
  blowup->add_option("--profile", blowup_opts.profile, "Profile JSON as the adhesion source");
  blowup->add_option("--method", blowup_opts.method, "auto or sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (profile->parsed()) return cmd_profile(profile_opts, out);
    if (bounds->parsed()) return cmd_bounds(bounds_opts, out);
    if (verify->parsed()) return cmd_verify(verify_opts, out);
    if (solve->parsed()) return cmd_solve(solve_opts, out);
    if (blowup->parsed()) return cmd_blowup(blowup_opts, out);
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    fmt::print(err, "error: malformed input: {}\n", e.what());
    return kBadInput;
  }
  return kUsage;
}

}  // namespace wedgecap::cli
