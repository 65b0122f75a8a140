#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "limitlab/cli.hpp"

using namespace limitlab;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "limitlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

std::string write_config(const TempDir& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

const char* kSweepConfig =
    "dimension = 1\n"
    "budget = 2000\n"
    "[operator]\nfamily = \"radial_maximal\"\nprofile = \"indicator\"\n"
    "[measure]\nkind = \"uniform_ball\"\n"
    "[domain]\nrho = 0.5\nouter_radius = 10.0\n"
    "[sweep]\nt = [0.1, 0.01]\nlambda = [1.0]\nstrata = 8\n";

}  // namespace

TEST(Cli, ConstantsOneDimension) {
  const auto r = cli({"constants", "-n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_NEAR(j["unit_ball_volume"].get<double>(), 2.0, 1e-15);
  EXPECT_NEAR(j["poisson_sup_constant"].get<double>(), 1.0 / (2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(j["heat_sup_constant"].get<double>(), 0.24197072451914337, 1e-12);
  EXPECT_NEAR(j["counterexample_bound"].get<double>(), 4.0, 1e-14);
}

TEST(Cli, ConstantsPlaneAndSpace) {
  auto j = cli({"constants", "-n", "2"}).json();
  EXPECT_NEAR(j["unit_ball_volume"].get<double>(), std::numbers::pi, 1e-15);
  EXPECT_NEAR(j["poisson_sup_constant"].get<double>(), 0.061258766157976895, 1e-12);
  EXPECT_NEAR(j["counterexample_bound"].get<double>(), std::numbers::pi * std::numbers::pi / 2.0, 1e-13);
  j = cli({"constants", "-n", "3"}).json();
  EXPECT_NEAR(j["sphere_area"].get<double>(), 4.0 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(j["heat_sup_constant"].get<double>(), 0.07361568484742567, 1e-12);
}

TEST(Cli, EvalDeltaAtOrigin) {
  TempDir dir("limitlab_cli_eval");
  const auto cfg = write_config(dir, "eval.toml",
                                "dimension = 2\n[measure]\nkind = \"atomic\"\npoints = [[0, 0]]\nweights = [1]\n"
                                "[eval]\nx = [2.0, 0.0]\n");
  auto r = cli({"--config", cfg, "eval"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.json();
  EXPECT_EQ(j["status"], "ok");
  EXPECT_DOUBLE_EQ(j["value"].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j["target_value"].get<double>(), 0.25);
  EXPECT_NEAR(j["difference"].get<double>(), 0.0, 1e-15);

  r = cli({"--config", cfg, "eval", "--x", "0,1", "--target-only"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = r.json();
  EXPECT_DOUBLE_EQ(j["target_value"].get<double>(), 1.0);
  EXPECT_FALSE(j.contains("value"));
}

TEST(Cli, EvalAtAtomIsSingularity) {
  TempDir dir("limitlab_cli_sing");
  const auto cfg = write_config(dir, "eval.toml",
                                "dimension = 2\n[measure]\nkind = \"atomic\"\npoints = [[0, 0]]\nweights = [1]\n");
  const auto r = cli({"--config", cfg, "eval", "--x", "0,0"});
  EXPECT_EQ(r.code, kExitSingularity);
  EXPECT_EQ(r.json()["status"], "singularity");
}

TEST(Cli, EvalDilatedBall) {
  // M V_t(x) = |B(0,1)| / t for |x| <= t/2 in one dimension.
  const auto r = cli({"eval", "--x", "0.01", "--t", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.json()["value"].get<double>(), 20.0, 1e-9);
  EXPECT_NEAR(r.json()["target_value"].get<double>(), 200.0, 1e-9);
}

TEST(Cli, UsageAndConfigErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"eval", "--x", "1,2"}).code, kExitUsage);  // dimension 1
  TempDir dir("limitlab_cli_bad");
  const auto cfg = write_config(dir, "bad.toml", "dimension = 1\n\n[operator]\nfamly = \"x\"\n");
  const auto r = cli({"--config", cfg, "constants"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"--config", (dir / "missing.toml").string(), "constants"}).code, kExitFailure);
}

TEST(Cli, SweepWritesFilesDeterministically) {
  TempDir dir("limitlab_cli_sweep");
  const auto cfg = write_config(dir, "sweep.toml", kSweepConfig);
  const auto out1 = (dir / "a").string(), out2 = (dir / "b").string(), out3 = (dir / "c").string();
  auto r = cli({"--config", cfg, "--out", out1, "--threads", "1", "sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["records"], 2);
  ASSERT_EQ(cli({"--config", cfg, "--out", out2, "--threads", "3", "sweep"}).code, 0);
  const std::string csv = slurp(std::filesystem::path(out1) / "sweep.csv");
  EXPECT_EQ(csv, slurp(std::filesystem::path(out2) / "sweep.csv"));
  EXPECT_EQ(slurp(std::filesystem::path(out1) / "sweep.json"), slurp(std::filesystem::path(out2) / "sweep.json"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), SweepReport::csv_header);

  // Another seed gives a statistically consistent type-3 estimate.
  ASSERT_EQ(cli({"--config", cfg, "--out", out3, "--seed", "99", "sweep"}).code, 0);
  const auto a = nlohmann::json::parse(slurp(std::filesystem::path(out1) / "sweep.json"));
  const auto b = nlohmann::json::parse(slurp(std::filesystem::path(out3) / "sweep.json"));
  EXPECT_EQ(b["seed"], 99);
  const auto& ea = a["records"][1]["type3_op"][0];
  const auto& eb = b["records"][1]["type3_op"][0];
  const double diff = std::abs(ea["estimate"].get<double>() - eb["estimate"].get<double>());
  EXPECT_LE(diff, 3.0 * std::hypot(ea["std_error"].get<double>(), eb["std_error"].get<double>()));
}

TEST(Cli, SweepWarnsAboutUnusableT) {
  TempDir dir("limitlab_cli_warn");
  std::string text = kSweepConfig;
  text.replace(text.find("[0.1, 0.01]"), 11, "[0.25, 0.01]");
  const auto cfg = write_config(dir, "sweep.toml", text);
  const auto r = cli({"--config", cfg, "--out", dir.str(), "sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("unusable"), std::string::npos);
}

TEST(Cli, Counterexample) {
  const auto r = cli({"counterexample", "-n", "1", "--t", "0.1", "--grid", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_NEAR(j["product"].get<double>(), 4.0, 1e-14);
  EXPECT_EQ(j["grid_points"], 50);
  EXPECT_TRUE(j["product_exact"].get<bool>());
  EXPECT_EQ(cli({"counterexample", "--t", "1.5"}).code, kExitUsage);
}

TEST(Cli, Hierarchy) {
  const auto r = cli({"--budget", "5000", "hierarchy", "--p", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_TRUE(j["type2_vanishes"].get<bool>());
  EXPECT_EQ(j["limit_value"], 2.0);
  EXPECT_EQ(j["records"].size(), 3u);
}

TEST(Cli, Dini) {
  TempDir dir("limitlab_cli_dini");
  const auto cfg = write_config(dir, "dini.toml",
                                "dimension = 2\n[operator]\nfamily = \"homog_maximal\"\nkernel = \"trig\"\n"
                                "kernel_cos = [0.0, 1.0]\n[dini]\nq = 1.0\ns = 0.0\nlevels = 10\nshift_budget = 24\n");
  const auto r = cli({"--config", cfg, "dini"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_FALSE(j["divergence_suspected"].get<bool>());
  EXPECT_GT(j["integral"].get<double>(), 0.0);
  EXPECT_EQ(j["t"].size(), j["omega_q"].size());
  // The radial family has no homogeneous kernel.
  EXPECT_EQ(cli({"dini"}).code, kExitUsage);
}
