#include "hybrid_nav/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace hybrid_nav {
namespace {

namespace fs = std::filesystem;

struct RunResult
{
  int status = -1;
  std::string out;
};

fs::path scratch_dir()
{
  const fs::path dir = fs::temp_directory_path() / "hybrid_nav_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the CLI with `args`; stdout is captured, stderr discarded.
RunResult run_cli(const std::string& args)
{
  const fs::path out = scratch_dir() / "stdout.txt";
  const std::string cmd =
    std::string(CLI_PATH) + " " + args + " > '" + out.string() + "' 2> /dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out);
  return r;
}

std::string scenario(const std::string& name)
{
  return "'" + std::string(SCENARIO_DIR) + "/" + name + "'";
}

std::vector<std::string> split_lines(const std::string& text)
{
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    lines.push_back(line);
  return lines;
}

//==============================================================================
TEST(Cli, FlatMapWithWeightOneGivesOneIteration)
{
  const RunResult r = run_cli("--scenario " + scenario("flat.scn") + " --initial-weight 1");
  ASSERT_EQ(r.status, 0);
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j.at("iterations").size(), 1u);
  EXPECT_EQ(j.at("iterations").at(0).at("weight"), 1.0);
  EXPECT_NEAR(j.at("iterations").at(0).at("cost").get<double>(), 1.8, 1e-9);
  EXPECT_FALSE(j.at("executable").empty());
}

TEST(Cli, UnreachableGoalReportsNoPath)
{
  const RunResult r = run_cli("--scenario " + scenario("unreachable.scn"));
  EXPECT_EQ(r.status, 2);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("error"), "no-path");
  EXPECT_TRUE(j.at("iterations").empty());
}

TEST(Cli, PlatformImprovesWithinBudget)
{
  const RunResult r = run_cli("--scenario " + scenario("platform.scn") + " --budget-s 10");
  ASSERT_EQ(r.status, 0);
  const Json j = Json::parse(r.out);
  const Json& its = j.at("iterations");
  ASSERT_GE(its.size(), 2u);
  for (std::size_t i = 1; i < its.size(); ++i)
  {
    EXPECT_LE(its[i].at("cost").get<double>(), its[i - 1].at("cost").get<double>());
    EXPECT_LT(its[i].at("weight").get<double>(), its[i - 1].at("weight").get<double>());
  }
}

TEST(Cli, JsonRoundTripIsByteIdentical)
{
  const fs::path json = scratch_dir() / "staircase.json";
  const RunResult r =
    run_cli("--scenario " + scenario("staircase.scn") + " --emit-json '" + json.string() + "'");
  ASSERT_EQ(r.status, 0);
  const std::string text = read_file(json);
  EXPECT_EQ(dump_report(parse_report(text)), text);
}

TEST(Cli, SvgIsWritten)
{
  const fs::path json = scratch_dir() / "flat.json";
  const fs::path svg = scratch_dir() / "flat.svg";
  const RunResult r = run_cli("--scenario " + scenario("flat.scn") + " --emit-json '" +
    json.string() + "' --emit-svg '" + svg.string() + "'");
  ASSERT_EQ(r.status, 0);
  const std::string text = read_file(svg);
  EXPECT_EQ(text.rfind("<svg", 0), 0u);
  const Json j = Json::parse(read_file(json));
  const std::size_t n = j.at("iterations").back().at("path").size() - 1;
  std::size_t count = 0;
  for (std::size_t pos = 0; (pos = text.find("class=\"manoeuvre ", pos)) != std::string::npos;
       ++pos)
    ++count;
  EXPECT_EQ(count, n);
}

TEST(Cli, BenchIsDeterministicAcrossReps)
{
  const fs::path csv = scratch_dir() / "bench.csv";
  const RunResult r = run_cli("--bench staircase --reps 3 --budget-s 30 --out '" +
    csv.string() + "'");
  ASSERT_EQ(r.status, 0);
  const auto lines = split_lines(read_file(csv));
  ASSERT_GT(lines.size(), 3u);
  EXPECT_EQ(lines[0], "scenario,rep,weight,wall_ms,expansions,cost");
  // Every column but the rep index and wall time must repeat exactly.
  std::map<int, std::vector<std::string>> per_rep;
  for (std::size_t i = 1; i < lines.size(); ++i)
  {
    std::vector<std::string> cols;
    std::istringstream in(lines[i]);
    for (std::string c; std::getline(in, c, ',');)
      cols.push_back(c);
    ASSERT_EQ(cols.size(), 6u) << lines[i];
    per_rep[std::stoi(cols[1])].push_back(cols[0] + "," + cols[2] + "," + cols[4] + "," + cols[5]);
  }
  ASSERT_EQ(per_rep.size(), 3u);
  EXPECT_EQ(per_rep[0], per_rep[1]);
  EXPECT_EQ(per_rep[0], per_rep[2]);
}

TEST(Cli, UsageErrorsExitOne)
{
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("--map builtin:nowhere --start 0,0,0 --goal 1,1,0").status, 1);
  EXPECT_EQ(run_cli("--scenario " + scenario("flat.scn") + " --neighborhood 12").status, 1);
  EXPECT_EQ(run_cli("--help").status, 0);
}

} // namespace
} // namespace hybrid_nav
