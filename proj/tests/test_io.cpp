#include "hybrid_nav/io.hpp"
#include "hybrid_nav/motiongen.hpp"
#include "hybrid_nav/planner.hpp"
#include "hybrid_nav/scenarios.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <regex>
#include <sstream>

namespace hybrid_nav {
namespace {

std::size_t count_matches(const std::string& text, const std::string& pattern)
{
  const std::regex re(pattern);
  return std::size_t(std::distance(
    std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

std::string error_of(const std::function<void()>& f, std::string* kind = nullptr)
{
  try
  {
    f();
  }
  catch (const Error& e)
  {
    if (kind)
      *kind = e.kind();
    return e.what();
  }
  return {};
}

/// Plans the staircase once and expands the final iteration.
const PlanReport& staircase_report()
{
  static const PlanReport report = [] {
    PlanReport r;
    const BuiltinScenario s = staircase_scenario();
    const CostModel model(s.map, r.params.cost, r.params.geometry);
    const AraStarPlanner planner(model, r.params.planner);
    r.map = "builtin:staircase";
    r.start = s.start;
    r.goal = s.goal;
    r.iterations = planner.plan(make_neutral_pose(model.footprint(), s.start),
      make_neutral_pose(model.footprint(), s.goal), 120.0);
    r.executable = expand_path(r.iterations.back(), model, r.params.motion);
    return r;
  }();
  return report;
}

//==============================================================================
TEST(Params, SetParamByDottedName)
{
  PlannerConfig c;
  set_param(c, "planner.k12", "3");
  set_param(c, "planner.k_back", "1.25");
  set_param(c, "planner.neighborhood", "16");
  set_param(c, "planner.enable_stepping", "false");
  set_param(c, "geometry.com_offset", "0.01, -0.02");
  set_param(c, "cost.foot_radius", "0.1");
  set_param(c, "motion.min_margin", "0.06");
  EXPECT_EQ(c.planner.k12, 3.0);
  EXPECT_EQ(c.planner.k_back, 1.25);
  EXPECT_EQ(c.planner.neighborhood, 16);
  EXPECT_FALSE(c.planner.enable_stepping);
  EXPECT_EQ(c.geometry.com_offset, Eigen::Vector2d(0.01, -0.02));
  EXPECT_EQ(c.cost.foot_radius, 0.1);
  EXPECT_EQ(c.motion.min_margin, 0.06);
  set_param(c, "planner.k_back", "none");
  EXPECT_FALSE(c.planner.k_back);
}

TEST(Params, RejectsUnknownNamesAndBadValues)
{
  PlannerConfig c;
  std::string kind;
  EXPECT_NE(error_of([&] { set_param(c, "planner.k99", "1"); }, &kind), "");
  EXPECT_EQ(kind, "parse");
  EXPECT_NE(error_of([&] { set_param(c, "planner.k12", "abc"); }), "");
  EXPECT_NE(error_of([&] { set_param(c, "planner.neighborhood", "16.5"); }), "");
  EXPECT_NE(error_of([&] { set_param(c, "planner.enable_stepping", "maybe"); }), "");
  EXPECT_NE(error_of([&] { set_param(c, "geometry.com_offset", "0.1"); }), "");
}

TEST(Params, NamesAreUniqueAndGrouped)
{
  const auto names = param_names();
  EXPECT_GT(names.size(), 30u);
  for (const auto& n : names)
    EXPECT_TRUE(std::regex_match(n, std::regex("(cost|planner|geometry|motion)\\.[a-z0-9_]+"))) << n;
  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
}

TEST(Params, JsonRoundTrip)
{
  PlannerConfig c;
  c.planner.k12 = 2.75;
  c.planner.k_back = 1.3;
  c.geometry.com_offset = {0.02, 0.01};
  c.cost.k1 = 50.0;
  const Json j = params_to_json(c);
  EXPECT_EQ(j.at("planner").at("k12"), 2.75);
  const PlannerConfig back = params_from_json(j);
  EXPECT_EQ(params_to_json(back).dump(), j.dump());
  PlannerConfig none;
  EXPECT_TRUE(params_to_json(none).at("planner").at("k_back").is_null());
  EXPECT_FALSE(params_from_json(params_to_json(none)).planner.k_back);
}

TEST(PoseSpecText, ParsesTriples)
{
  const PoseSpec p = parse_pose_spec(" 1.5, -2 ,0.25 ");
  EXPECT_EQ(p.x, 1.5);
  EXPECT_EQ(p.y, -2.0);
  EXPECT_EQ(p.theta, 0.25);
  EXPECT_THROW(parse_pose_spec("1,2"), Error);
  EXPECT_THROW(parse_pose_spec("1,2,x"), Error);
  EXPECT_THROW(parse_pose_spec("1,2,3,4"), Error);
}

//==============================================================================
TEST(ReportJson, TopLevelShape)
{
  const Json j = report_to_json(staircase_report());
  for (const char* key : {"params", "iterations", "executable"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_FALSE(j.contains("error"));
  const Json& it = j.at("iterations").at(0);
  for (const char* key : {"weight", "cost", "expansions", "ms", "path"})
    EXPECT_TRUE(it.contains(key)) << key;
  const Json& path = it.at("path");
  EXPECT_TRUE(path.at(0).at("manoeuvre").is_null());
  EXPECT_TRUE(path.at(1).at("pose").contains("feet"));
  EXPECT_TRUE(path.at(1).at("manoeuvre").contains("kind"));
  EXPECT_EQ(j.at("executable").size(), staircase_report().executable.keyframes.size());
}

TEST(ReportJson, RoundTripIsByteIdentical)
{
  const std::string text = dump_report(staircase_report());
  const PlanReport back = parse_report(text);
  EXPECT_EQ(dump_report(back), text);
  ASSERT_EQ(back.iterations.size(), staircase_report().iterations.size());
  const AbstractPath& a = back.iterations.back();
  const AbstractPath& b = staircase_report().iterations.back();
  EXPECT_EQ(a.poses, b.poses);
  EXPECT_EQ(a.cost, b.cost);
  ASSERT_EQ(a.manoeuvres.size(), b.manoeuvres.size());
  for (std::size_t i = 0; i < a.manoeuvres.size(); ++i)
  {
    EXPECT_EQ(a.manoeuvres[i].kind, b.manoeuvres[i].kind);
    EXPECT_EQ(a.manoeuvres[i].cost, b.manoeuvres[i].cost);
    EXPECT_EQ(a.manoeuvres[i].foot, b.manoeuvres[i].foot);
  }
}

TEST(ReportJson, ErrorReportRoundTrip)
{
  PlanReport r;
  r.map = "x.map";
  r.error = "no-path";
  r.message = "goal unreachable";
  const std::string text = dump_report(r);
  EXPECT_NE(text.find("\"error\": \"no-path\""), std::string::npos);
  EXPECT_EQ(dump_report(parse_report(text)), text);
}

TEST(ReportJson, MalformedDocumentIsParseError)
{
  std::string kind;
  error_of([] { parse_report("{\"params\": {}"); }, &kind);
  EXPECT_EQ(kind, "parse");
  error_of([] { parse_report("{}"); }, &kind);
  EXPECT_EQ(kind, "parse");
}

//==============================================================================
TEST(Svg, OneElementPerManoeuvreWithStepColors)
{
  const AbstractPath& path = staircase_report().iterations.back();
  const BuiltinScenario s = staircase_scenario();
  const CostModel model(s.map);
  std::ostringstream out;
  write_svg(out, model, path);
  const std::string svg = out.str();
  EXPECT_EQ(count_matches(svg, "class=\"manoeuvre "), path.manoeuvres.size());
  for (std::size_t i = 0; i < path.manoeuvres.size(); ++i)
    EXPECT_EQ(count_matches(svg, "data-index=\"" + std::to_string(i) + "\""), 1u) << i;

  std::size_t front = 0, rear = 0;
  for (const auto& m : path.manoeuvres)
    if (m.kind == ManoeuvreKind::kAbstractStep)
      (is_front(m.foot) ? front : rear)++;
  EXPECT_GT(front, 0u);
  EXPECT_GT(rear, 0u);
  EXPECT_EQ(count_matches(svg, "class=\"manoeuvre step front\"[^>]*stroke=\"red\""), front);
  EXPECT_EQ(count_matches(svg, "class=\"manoeuvre step rear\"[^>]*stroke=\"green\""), rear);
  EXPECT_EQ(count_matches(svg, "class=\"foothold\""), front + rear);
  EXPECT_EQ(count_matches(svg, "class=\"center-path\""), 1u);
  EXPECT_EQ(count_matches(svg, "marker-end=\"url\\(#arrow\\)\""), path.poses.size());
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

//==============================================================================
TEST(ScenarioFileParse, KeysOverridesAndComments)
{
  std::istringstream in(
    "# platform run\n"
    "builtin = platform\n"
    "start = 0.8, 1.8, 0   # trailing comment\n"
    "goal = 3.8,0.7,0\n"
    "\n"
    "budget_s = 5\n"
    "planner.k12 = 3\n"
    "emit_json = out.json\n");
  const ScenarioFile s = parse_scenario(in, "p.scn");
  EXPECT_EQ(s.builtin, "platform");
  EXPECT_FALSE(s.map_path);
  ASSERT_TRUE(s.start);
  EXPECT_EQ(s.start->y, 1.8);
  EXPECT_EQ(s.goal->x, 3.8);
  EXPECT_EQ(s.budget_s, 5.0);
  EXPECT_EQ(s.emit_json, "out.json");
  PlannerConfig c;
  s.apply_overrides(c);
  EXPECT_EQ(c.planner.k12, 3.0);
}

TEST(ScenarioFileParse, ErrorsNameTheLine)
{
  struct Case
  {
    std::string text;
    std::string where;
  };
  const std::vector<Case> cases{
    {"builtin = platform\nplanner.k99 = 1\n", "s.scn:2"},
    {"start = 1, 2\n", "s.scn:1"},
    {"# c\n\nno equals sign\n", "s.scn:3"},
    {"budget_s = soon\n", "s.scn:1"},
    {"planner.k12 = x\n", "s.scn:1"},
  };
  for (const auto& c : cases)
  {
    std::istringstream in(c.text);
    std::string kind;
    const std::string what = error_of([&] { parse_scenario(in, "s.scn"); }, &kind);
    EXPECT_EQ(kind, "parse") << c.text;
    EXPECT_NE(what.find(c.where), std::string::npos) << what;
  }
  std::istringstream both("builtin = platform\nmap = a.map\n");
  EXPECT_NE(error_of([&] { parse_scenario(both, "s.scn"); }), "");
}

TEST(ScenarioFileParse, MapPathRelativeToFile)
{
  const auto dir = std::filesystem::temp_directory_path() / "hybrid_nav_io_test";
  std::filesystem::create_directories(dir / "maps");
  {
    std::ofstream f(dir / "run.scn");
    f << "map = maps/flat.map\nstart = 0.5, 0.5, 0\ngoal = 1, 0.5, 0\n";
  }
  const ScenarioFile s = load_scenario((dir / "run.scn").string());
  ASSERT_TRUE(s.map_path);
  EXPECT_EQ(std::filesystem::path(*s.map_path), (dir / "maps" / "flat.map").lexically_normal());
  std::filesystem::remove_all(dir);

  std::string kind;
  error_of([] { load_scenario("/nonexistent/run.scn"); }, &kind);
  EXPECT_EQ(kind, "io");
}

} // namespace
} // namespace hybrid_nav
