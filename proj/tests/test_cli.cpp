#include "../tools/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using adasmooth::cli::run;

namespace {

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string& tag)
    : path(fs::temp_directory_path() / ("adasmooth_cli_" + tag))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string>
simulate_args(const std::string& out)
{
  return { "simulate", "--setting", "fbm", "--n0", "150", "--n1", "4", "--mu",
           "300", "--sigma2", "0.05", "--seed", "3", "--grid-size", "11",
           "--t0", "0.5", "--out", out };
}

} // namespace

TEST_CASE("simulate writes the four files")
{
  TempDir d("sim");
  REQUIRE(run(simulate_args(d / "data")) == 0);
  for (auto name : { "learning.csv", "online.csv", "learning_truth.csv", "online_truth.csv" }) {
    CHECK(fs::exists(d.path / "data" / name));
  }
  auto online = slurp(d.path / "data" / "online.csv");
  CHECK(online.rfind("curve_id,t,y\n", 0) == 0);
  auto truth = slurp(d.path / "data" / "online_truth.csv");
  CHECK(truth.rfind("curve_id,kind,t,x\n", 0) == 0);
  CHECK(truth.find(",eval,0.5,") != std::string::npos);
  CHECK(truth.find(",grid,") != std::string::npos);

  auto args = simulate_args(d / "json");
  args.push_back("--format");
  args.push_back("json");
  REQUIRE(run(args) == 0);
  CHECK(fs::exists(d.path / "json" / "online.json"));
}

TEST_CASE("usage errors")
{
  TempDir d("usage");
  CHECK(run({ "simulate", "--out", d / "x" }) == adasmooth::cli::exit_usage);
  CHECK(run({ "simulate", "--seed", "1", "--bogus" }) == adasmooth::cli::exit_usage);
  CHECK(run({}) == adasmooth::cli::exit_usage);
  REQUIRE(run(simulate_args(d / "data")) == 0);
  CHECK(run({ "estimate", "--learning", d / "data/learning.csv", "--t0", "1.5" }) ==
        adasmooth::cli::exit_usage);
  CHECK(run({ "estimate", "--learning", d / "data/learning.csv" }) ==
        adasmooth::cli::exit_usage);
  CHECK(run({ "estimate", "--learning", d / "missing.csv", "--t0", "0.5" }) ==
        adasmooth::cli::exit_data);
  CHECK(run({ "simulate", "--seed", "1", "--mu", "3", "--out", d / "y" }) ==
        adasmooth::cli::exit_data);
}

TEST_CASE("config file and flags are equivalent")
{
  TempDir d("config");
  REQUIRE(run(simulate_args(d / "flags")) == 0);
  nlohmann::json cfg = { { "setting", 1 },       { "n_learning", 150 }, { "n_online", 4 },
                         { "mu", 300 },          { "sigma2", 0.05 },    { "seed", 3 },
                         { "grid_size", 11 },    { "t0", { 0.5 } },     { "out", d / "cfg" } };
  std::ofstream(d / "sim.json") << cfg.dump();
  REQUIRE(run({ "simulate", "--config", d / "sim.json" }) == 0);
  for (auto name : { "learning.csv", "online.csv", "online_truth.csv" }) {
    CHECK(slurp(d.path / "flags" / name) == slurp(d.path / "cfg" / name));
  }
  // flags override the file
  REQUIRE(run({ "simulate", "--config", d / "sim.json", "--seed", "4", "--out", d / "other" }) == 0);
  CHECK(slurp(d.path / "flags" / "online.csv") != slurp(d.path / "other" / "online.csv"));
}

TEST_CASE("estimate, smooth and cv")
{
  TempDir d("pipeline");
  REQUIRE(run(simulate_args(d / "data")) == 0);
  REQUIRE(run({ "estimate", "--learning", d / "data/learning.csv", "--t0", "0.3,0.5",
                "--out", d / "est.json" }) == 0);
  auto est = nlohmann::json::parse(slurp(d / "est.json"));
  REQUIRE(est.size() == 2);
  CHECK(est[1]["t0"] == 0.5);
  CHECK(est[0]["d_hat"] == 0);

  REQUIRE(run({ "estimate", "--learning", d / "data/learning.csv", "--t0", "0.5",
                "--known-sigma2", "0.05", "--lag-rule", "theorem", "--out",
                d / "known.json" }) == 0);
  auto known = nlohmann::json::parse(slurp(d / "known.json"));
  CHECK(known[0]["sigma2_hat"] == 0.05);
  CHECK(known[0]["k"] == 2);

  REQUIRE(run({ "smooth", "--online", d / "data/online.csv", "--estimate", d / "est.json",
                "--out", d / "smooth.csv" }) == 0);
  auto sm = slurp(d / "smooth.csv");
  CHECK(sm.rfind("curve_id,t0,estimate,bandwidth,lambda_min,guard\n", 0) == 0);
  CHECK(std::count(sm.begin(), sm.end(), '\n') == 1 + 2 * 4);
  CHECK(run({ "smooth", "--online", d / "data/online.csv", "--estimate", d / "est.json",
              "--degree", "6" }) == adasmooth::cli::exit_data);

  REQUIRE(run({ "cv", "--online", d / "data/online.csv", "--t0", "0.5", "--grid-size", "6",
                "--out", d / "cv.csv", "--scores", d / "scores.json" }) == 0);
  auto scores = nlohmann::json::parse(slurp(d / "scores.json"));
  CHECK(scores.size() == 4);
  CHECK_FALSE(scores[0].contains("seconds"));
  CHECK(scores[0]["bandwidth_grid"].size() == 6);
}

TEST_CASE("benchmark")
{
  TempDir d("bench");
  std::vector<std::string> args{ "benchmark", "--n0", "200", "--n1", "5", "--mu", "300",
                                 "--seed", "2", "--t0", "0.5", "--replications", "2",
                                 "--with-cv", "--cv-grid-size", "5", "--fine-intervals",
                                 "2048", "--no-timing", "--out" };
  auto a = args, b = args;
  a.push_back(d / "a");
  b.push_back(d / "b");
  int code = run(a);
  CHECK((code == 0 || code == adasmooth::cli::exit_numerical));
  CHECK(run(b) == code);
  CHECK(slurp(d.path / "a" / "risk.csv") == slurp(d.path / "b" / "risk.csv"));
  CHECK(slurp(d.path / "a" / "risk_report.json") == slurp(d.path / "b" / "risk_report.json"));
  auto csv = slurp(d.path / "a" / "risk.csv");
  CHECK(csv.find(",cv,") != std::string::npos);
  CHECK(csv.find(",adaptive,") != std::string::npos);
  CHECK(run({ "benchmark", "--seed", "1", "--out", d / "c" }) == adasmooth::cli::exit_usage);
}
