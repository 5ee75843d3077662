#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_util.hpp"
#include "vph/cli.hpp"

using namespace vph;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vphawkes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vph_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, SimulateIsDeterministic) {
  const auto a = run({"--seed", "5", "simulate", "--scenario", "normals"});
  const auto b = run({"--seed", "5", "simulate", "--scenario", "normals"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("# window_end=1000"), std::string::npos);
  const auto c = run({"--seed", "6", "simulate", "--scenario", "normals"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"simulate", "--T", "abc"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"fit", "-i", "/nonexistent/catalog.csv"}).code, kExitDataError);
  EXPECT_EQ(run({"simulate", "--scenario", "gamma"}).code, kExitDataError);
  EXPECT_EQ(run({"productivity", "-i", test::fixture("small_catalog.csv")}).code, kExitUsage);
  EXPECT_EQ(run({"--negative-target", "maybe", "productivity", "-i", test::fixture("small_catalog.csv"),
                 "--mu", "0.1", "--beta", "1"})
                .code,
            kExitUsage);
}

TEST(Cli, FitWritesJson) {
  const auto cat = scratch("hawkes.csv");
  ASSERT_EQ(run({"--seed", "3", "simulate", "--scenario", "hawkes", "--K", "0.5", "--T", "3000",
                 "-o", cat.string()})
                .code,
            kExitOk);
  const auto r = run({"fit", "-i", cat.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["mu"].get<double>(), 0.5, 0.15);
  EXPECT_NEAR(j["K"].get<double>(), 0.5, 0.15);
  EXPECT_NEAR(j["beta"].get<double>(), 0.7, 0.25);
  EXPECT_TRUE(j["converged"].get<bool>());
}

TEST(Cli, ProductivityOnPoissonIsNearZero) {
  const auto cat = scratch("poisson.csv");
  ASSERT_EQ(run({"--seed", "2", "simulate", "--scenario", "poisson", "--mu", "0.5", "-o",
                 cat.string()})
                .code,
            kExitOk);
  const auto out = scratch("poisson_prod.csv");
  const auto r = run({"--negative-target", "zero", "productivity", "-i", cat.string(), "--mu",
                      "0.5", "--beta", "0.7", "-o", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,raw,estimate");
  double total = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const double est = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GE(est, 0.0);
    total += est;
    ++rows;
  }
  ASSERT_GT(rows, 300);
  // Stabilized total equals max(n - mu T, 0): a few dozen at most for Poisson data.
  EXPECT_LT(total / rows, 0.15);
}

TEST(Cli, ConfigFileSetsOptions) {
  const auto cfg = scratch("run.toml");
  {
    std::ofstream f(cfg);
    f << "seed = 5\n";
  }
  const auto a = run({"--config", cfg.string(), "simulate", "--scenario", "renewal"});
  const auto b = run({"--seed", "5", "simulate", "--scenario", "renewal"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, MarkDomainCurve) {
  const auto cat = scratch("etas.csv");
  ASSERT_EQ(run({"--seed", "4", "simulate", "--scenario", "etas", "--mu", "0.1", "--beta", "2.7",
                 "-o", cat.string()})
                .code,
            kExitOk);
  const auto r = run({"--negative-target", "apply", "--pivot-tolerance", "0", "productivity",
                      "-i", cat.string(), "--mu", "0.1", "--beta", "2.7", "--domain", "mark"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "magnitude,productivity,density");
}

TEST(Cli, ResidualsReport) {
  const auto cat = scratch("res.csv");
  ASSERT_EQ(run({"--seed", "8", "simulate", "--scenario", "hawkes", "--K", "0.4", "-o",
                 cat.string()})
                .code,
            kExitOk);
  const auto r = run({"residuals", "-i", cat.string(), "--mu", "0.5", "--K", "0.4", "--beta",
                      "0.7", "--nsim", "200"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.err.find("KS D"), std::string::npos);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t_k,u_k,cumsum,lower,upper,origin");
}

TEST(Cli, CountsInput) {
  const auto r = run({"fit", "-i", test::fixture("weekly_counts.csv"), "--counts"});
  const auto again = run({"fit", "-i", test::fixture("weekly_counts.csv"), "--counts"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, again.out);
}
