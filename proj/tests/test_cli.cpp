#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wedgecap/cli.hpp"
#include "wedgecap/fan_bounds.hpp"
#include "wedgecap/profile_io.hpp"

namespace fs = std::filesystem;
using namespace wedgecap;

namespace {

constexpr double kPi = std::numbers::pi;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wedgecap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "wedgecap_cli_tests" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return path(name);
  }

  static std::string read(const std::string& file) {
    std::ifstream in(file);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::vector<std::string> lines(const std::string& file) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
  }

  fs::path dir_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_F(CliTest, HelpAndUsage) {
  EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"solve", "--m", "abc"}).code, cli::kUsage);
}

TEST_F(CliTest, ProfileConstant) {
  const auto file = write("c.json", R"({"generator": {"type": "constant", "gamma1": 1.0471975511965976}})");
  const auto r = run_cli({"profile", "--profile", file, "--out", path("out"), "--b-count", "3"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = lines(path("out/adhesion.csv"));
  ASSERT_EQ(rows.front(), "b,A_I,A_S,method,uncertainty");
  ASSERT_EQ(rows.size(), 7u);  // 3 b values, sweep and exact rows each
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto cells = split(rows[k]);
    const double b = std::stod(cells[0]);
    EXPECT_NEAR(std::stod(cells[1]), 0.5 * b, 1e-15);
    EXPECT_NEAR(std::stod(cells[2]), 0.5 * b, 1e-15);
  }
  const auto scales = lines(path("out/averaged_cos.csv"));
  EXPECT_EQ(scales.front(), "eps,averaged_cos");
  EXPECT_NEAR(std::stod(split(scales[5])[1]), 0.25, 1e-15);
}

TEST_F(CliTest, ProfileExample1Column) {
  const auto file = write("e1.json", R"({"generator": {"type": "example1", "gamma1": 1.0, "gamma2": 2.0}})");
  ASSERT_EQ(run_cli({"profile", "--profile", file, "--out", path("out")}).code, cli::kOk);
  for (const auto& row : lines(path("out/adhesion.csv"))) {
    const auto cells = split(row);
    if (cells[3] != "sequence_exact") continue;
    EXPECT_NEAR(std::stod(cells[1]), std::stod(cells[0]) * std::cos(2.0), 1e-15);
  }
}

TEST_F(CliTest, ProfileErrors) {
  EXPECT_EQ(run_cli({"profile", "--profile", path("missing.json")}).code, cli::kBadInput);
  const auto bad = write("bad.json", "{ not json");
  EXPECT_EQ(run_cli({"profile", "--profile", bad}).code, cli::kBadInput);
  const auto range = write("range.json", R"({"segments": [{"s_end": 1, "gamma": 5}]})");
  EXPECT_EQ(run_cli({"profile", "--profile", range, "--out", path("o")}).code, cli::kOutOfRange);
  const auto ok = write("ok.json", R"({"segments": [{"s_end": 1, "gamma": 1}]})");
  EXPECT_EQ(run_cli({"profile", "--profile", ok, "--eps-floor", "2", "--out", path("o")}).code, cli::kOutOfRange);
  EXPECT_EQ(run_cli({"profile"}).code, cli::kUsage);
  // Output path blocked by a regular file.
  write("blocker", "x");
  EXPECT_EQ(run_cli({"profile", "--profile", ok, "--out", path("blocker")}).code, cli::kBadInput);
}

TEST_F(CliTest, BoundsConstantNeutral) {
  const auto file = write("n.json", R"({"generator": {"type": "constant", "gamma1": 1.5707963267948966}})");
  const auto r = run_cli({"bounds", "--plus", file, "--minus", file, "--case", "I", "--out", path("out")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = lines(path("out/bounds.csv"));
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto cells = split(rows[k]);
    EXPECT_EQ(cells[0], "I");
    EXPECT_NEAR(std::stod(cells[4]), kPi / 2, 2e-3);
  }
}

TEST_F(CliTest, BoundsMatchLibrary) {
  const auto plus = write("p.json", R"({"generator": {"type": "example2", "gamma1": 0.8, "gamma2": 2.0}})");
  const auto minus = write("m.json", R"({"side": "-", "generator": {"type": "example1", "gamma1": 0.9, "gamma2": 1.9}})");
  ASSERT_EQ(run_cli({"bounds", "--plus", plus, "--minus", minus, "--out", path("out")}).code, cli::kOk);
  const auto rows = lines(path("out/bounds.csv"));
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto cells = split(rows[k]);
    const Side side = cells[1] == "+" ? Side::Plus : Side::Minus;
    const ConditionKind kind = cells[2] == "increasing" ? ConditionKind::Increasing : ConditionKind::Decreasing;
    const auto spec = load_profile_spec(side == Side::Plus ? plus : minus);
    const auto a = adhesion_for(spec, kind == ConditionKind::Increasing ? AdhesionKind::I : AdhesionKind::S);
    const auto direct = min_admissible_fan(a, kind);
    EXPECT_EQ(std::stod(cells[4]), direct.beta_min) << rows[k];
    const auto eff = effective_angle(a, default_b_grid());
    EXPECT_EQ(std::stod(cells[10]), eff.sigma);
  }
  // Example 1 on the + wall in case I: effective sigma is gamma2.
  const auto cells = split(rows[1]);
  EXPECT_EQ(cells[0], "I");
  EXPECT_EQ(cells[1], "+");
}

TEST_F(CliTest, BoundsExample1EffectiveAngle) {
  const auto file = write("e1.json", R"({"generator": {"type": "example1", "gamma1": 1.0, "gamma2": 2.0}})");
  ASSERT_EQ(run_cli({"bounds", "--plus", file, "--minus", file, "--case", "I", "--out", path("out")}).code, cli::kOk);
  const auto cells = split(lines(path("out/bounds.csv"))[1]);
  EXPECT_EQ(cells[1], "+");
  EXPECT_NEAR(std::stod(cells[10]), 2.0, 1e-12);
}

TEST_F(CliTest, BoundsErrors) {
  const auto file = write("n.json", R"({"generator": {"type": "constant", "gamma1": 1.0}})");
  EXPECT_EQ(run_cli({"bounds", "--plus", file, "--minus", file, "--case", "X"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"bounds", "--plus", file, "--minus", file, "--method", "magic"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"bounds", "--plus", file}).code, cli::kUsage);
  const auto dry = write("pi.json", R"({"generator": {"type": "constant", "gamma1": 3.141592653589793}})");
  const auto r = run_cli({"bounds", "--plus", dry, "--minus", file, "--case", "I", "--out", path("out")});
  EXPECT_EQ(r.code, cli::kInfeasible);
  EXPECT_NE(read(path("out/bounds.csv")).find("infeasible_scan"), std::string::npos);
  EXPECT_EQ(run_cli({"bounds", "--plus", file, "--minus", file, "--beta-step", "0.5"}).code, cli::kOutOfRange);
}

TEST_F(CliTest, BoundsFromConfigWithDegrees) {
  const auto cfg = write("cfg.json", R"({"profile_plus": {"generator": {"type": "constant", "gamma1": 60}},
                                          "profile_minus": {"side": "-", "generator": {"type": "constant", "gamma1": 60}}})");
  ASSERT_EQ(run_cli({"bounds", "--config", cfg, "--degrees", "--case", "I", "--out", path("out")}).code, cli::kOk);
  const auto cells = split(lines(path("out/bounds.csv"))[1]);
  EXPECT_NEAR(std::stod(cells[4]), kPi / 3, 2e-3);
  const auto wrong = write("wrong.json", R"({"profile_plus": {"side": "-", "generator": {"type": "constant", "gamma1": 1}},
                                            "profile_minus": {"generator": {"type": "constant", "gamma1": 1}}})");
  EXPECT_EQ(run_cli({"bounds", "--config", wrong, "--out", path("o2")}).code, cli::kUsage);
}

TEST_F(CliTest, VerifyExamples) {
  const auto r = run_cli({"verify-examples", "--out", path("out")});
  EXPECT_EQ(r.code, cli::kOk) << r.out;
  int pass = 0;
  std::istringstream s(r.out);
  for (std::string line; std::getline(s, line);) pass += line.rfind("PASS ", 0) == 0;
  EXPECT_EQ(pass, 6);
  EXPECT_EQ(read(path("out/verify_examples.txt")), r.out);

  const auto degraded = run_cli({"verify-examples", "--eps-floor", "1e-2", "--out", path("out2")});
  EXPECT_EQ(degraded.code, cli::kVerifyFailed);
  std::istringstream d(degraded.out);
  for (std::string line; std::getline(d, line);) {
    if (line.find("example1") == std::string::npos) continue;
    EXPECT_EQ(line.rfind("FAIL", 0), 0u) << line;
    EXPECT_NE(line.find("exact PASS"), std::string::npos);
    EXPECT_NE(line.find("sweep FAIL"), std::string::npos);
  }

  const auto same = run_cli({"verify-examples", "--gamma1", "1.1", "--gamma2", "1.1", "--out", path("out3")});
  EXPECT_EQ(same.code, cli::kOk) << same.out;
  EXPECT_EQ(run_cli({"verify-examples", "--gamma1", "2", "--gamma2", "1"}).code, cli::kOutOfRange);
}

TEST_F(CliTest, SolveNeutral) {
  const auto r = run_cli({"solve", "--lambda", "2", "--kappa", "1", "--alpha", "0.8", "--m", "16", "--n-theta", "16",
                          "--out", path("out")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  for (const auto& row : lines(path("out/trace.csv"))) {
    if (row[0] == 't') continue;
    EXPECT_NEAR(std::stod(split(row)[1]), -2.0, 1e-10);
  }
  EXPECT_EQ(split(lines(path("out/fans.csv"))[1])[0], "constant");
  const auto manifest = read(path("out/manifest.txt"));
  EXPECT_NE(manifest.find("symmetry_check: PASS"), std::string::npos);
  EXPECT_NE(manifest.find("converged: true"), std::string::npos);
  EXPECT_NE(manifest.find("M2: 0"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("out/solution.csv")));
}

TEST_F(CliTest, SolveConfigAndPmc) {
  const auto cfg = write("cfg.json", R"({"alpha": 1.0,
      "profile_plus": {"generator": {"type": "constant", "gamma1": 1.2}},
      "profile_minus": {"generator": {"type": "constant", "gamma1": 1.2}},
      "solver": {"m": 16, "n_theta": 16, "r_min": 0.01},
      "pmc": {"type": "linear", "kappa": 1, "lambda": 0}})");
  ASSERT_EQ(run_cli({"solve", "--config", cfg, "--out", path("pmc")}).code, cli::kOk);
  const auto plain = write("plain.json", R"({"alpha": 1.0,
      "profile_plus": {"generator": {"type": "constant", "gamma1": 1.2}},
      "profile_minus": {"generator": {"type": "constant", "gamma1": 1.2}},
      "solver": {"m": 16, "n_theta": 16, "r_min": 0.01, "kappa": 1, "lambda": 0}})");
  ASSERT_EQ(run_cli({"solve", "--config", plain, "--out", path("cap")}).code, cli::kOk);
  EXPECT_EQ(read(path("pmc/solution.csv")), read(path("cap/solution.csv")));
}

TEST_F(CliTest, SolveNonConvergenceAndRanges) {
  const auto r = run_cli({"solve", "--gamma-plus", "1", "--max-iter", "1", "--m", "16", "--n-theta", "16", "--out",
                          path("out")});
  EXPECT_EQ(r.code, cli::kNotConverged);
  EXPECT_NE(read(path("out/manifest.txt")).find("converged: false"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("out/solution.csv")));
  EXPECT_EQ(run_cli({"solve", "--m", "4", "--out", path("o")}).code, cli::kOutOfRange);
  EXPECT_EQ(run_cli({"solve", "--alpha", "4", "--out", path("o")}).code, cli::kOutOfRange);
  EXPECT_EQ(run_cli({"solve", "--config", path("nope.json")}).code, cli::kBadInput);
}

TEST_F(CliTest, SolveManufactured) {
  const auto r = run_cli({"solve", "--mms", "--mms-sizes", "16,32", "--out", path("out")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = lines(path("out/mms.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GE(std::stod(split(rows[2])[3]), 1.9);
}

TEST_F(CliTest, Blowup) {
  const auto w = run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "0.7853981633974483", "--gamma",
                          "1.5707963267948966", "--out", path("w")});
  ASSERT_EQ(w.code, cli::kOk) << w.err;
  EXPECT_NE(w.out.find("verdict: witness"), std::string::npos);
  const auto at = w.out.find("lambda: ");
  EXPECT_NEAR(std::stod(w.out.substr(at + 8)), kPi / 2, 1e-6);
  EXPECT_EQ(lines(path("w/blowup.csv")).front(), "lambda,b,A,difference");

  const auto c = run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "90", "--degrees", "--gamma", "90",
                          "--out", path("c")});
  EXPECT_NE(c.out.find("verdict: consistent"), std::string::npos);
  const auto z = run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "0", "--gamma", "0", "--out", path("z")});
  EXPECT_NE(z.out.find("verdict: consistent"), std::string::npos);
  EXPECT_EQ(read(path("z/blowup_verdict.txt")), z.out);
}

TEST_F(CliTest, BlowupInvalidCombinations) {
  const auto prof = write("p.json", R"({"generator": {"type": "constant", "gamma1": 1.0}})");
  EXPECT_EQ(run_cli({"blowup", "--side", "x", "--case", "I", "--beta", "1", "--gamma", "1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "Q", "--beta", "1", "--gamma", "1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "4", "--gamma", "1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "I", "--gamma", "1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "1", "--gamma", "1", "--profile", prof}).code,
            cli::kUsage);
  EXPECT_EQ(run_cli({"blowup", "--side", "+", "--case", "I", "--beta", "1", "--profile", prof, "--out", path("o")})
                .code,
            cli::kOk);
}

TEST_F(CliTest, Deterministic) {
  const auto file = write("e2.json", R"({"generator": {"type": "example2", "gamma1": 0.5, "gamma2": 2.5}})");
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run_cli({"profile", "--profile", file, "--out", path(sub)}).code, cli::kOk);
    ASSERT_EQ(run_cli({"bounds", "--plus", file, "--minus", file, "--method", "sweep", "--out", path(sub)}).code,
              cli::kOk);
    ASSERT_EQ(run_cli({"solve", "--gamma-plus", "1.2", "--gamma-minus", "1.9", "--m", "16", "--n-theta", "16",
                       "--out", path(sub)})
                  .code,
              cli::kOk);
  }
  for (const char* f : {"averaged_cos.csv", "adhesion.csv", "bounds.csv", "solution.csv", "trace.csv", "fans.csv",
                        "manifest.txt"}) {
    EXPECT_EQ(read(path(std::string("a/") + f)), read(path(std::string("b/") + f))) << f;
  }
}
