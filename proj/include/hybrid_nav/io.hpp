#pragma once

#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/motiongen.hpp"
#include "hybrid_nav/planner.hpp"
#include "hybrid_nav/scenarios.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hybrid_nav {

using Json = nlohmann::ordered_json;

//==============================================================================
/// Every tunable parameter, grouped by the component that consumes it.
struct PlannerConfig
{
  CostModelParams cost;
  PlannerParams planner;
  RobotGeometry geometry;
  MotionParams motion;

  void validate() const
  {
    cost.validate();
    planner.validate();
    geometry.validate();
    motion.validate();
  }
};

/// Calls `visit(name, field)` for every parameter under its dotted name.
/// Works for const and mutable configs.
template<typename Config, typename Visitor>
void visit_params(Config& c, Visitor&& visit)
{
  visit("cost.k1", c.cost.k1);
  visit("cost.k2", c.cost.k2);
  visit("cost.k3", c.cost.k3);
  visit("cost.k4", c.cost.k4);
  visit("cost.k5", c.cost.k5);
  visit("cost.k6", c.cost.k6);
  visit("cost.foot_radius", c.cost.foot_radius);
  visit("cost.neighborhood_radius", c.cost.neighborhood_radius);
  visit("cost.untraversable_height", c.cost.untraversable_height);
  visit("cost.body_circle_radius", c.cost.body_circle_radius);
  visit("cost.body_circle_offsets", c.cost.body_circle_offsets);

  visit("planner.k7", c.planner.k7);
  visit("planner.k8", c.planner.k8);
  visit("planner.k9", c.planner.k9);
  visit("planner.k10", c.planner.k10);
  visit("planner.k11", c.planner.k11);
  visit("planner.k12", c.planner.k12);
  visit("planner.k_back", c.planner.k_back);
  visit("planner.k_rot", c.planner.k_rot);
  visit("planner.step_weight", c.planner.step_weight);
  visit("planner.initial_weight", c.planner.initial_weight);
  visit("planner.weight_decay", c.planner.weight_decay);
  visit("planner.weight_snap", c.planner.weight_snap);
  visit("planner.neighborhood", c.planner.neighborhood);
  visit("planner.max_step_height", c.planner.max_step_height);
  visit("planner.obstacle_proximity", c.planner.obstacle_proximity);
  visit("planner.safe_stand_distance", c.planner.safe_stand_distance);
  visit("planner.enable_stepping", c.planner.enable_stepping);
  visit("planner.max_states", c.planner.max_states);

  visit("geometry.foot_longitudinal", c.geometry.foot_longitudinal);
  visit("geometry.foot_lateral", c.geometry.foot_lateral);
  visit("geometry.footprint_width", c.geometry.footprint_width);
  visit("geometry.max_reach", c.geometry.max_reach);
  visit("geometry.com_offset", c.geometry.com_offset);
  visit("geometry.driving_leg_height", c.geometry.driving_leg_height);
  visit("geometry.stepping_leg_height", c.geometry.stepping_leg_height);
  visit("geometry.max_leg_height", c.geometry.max_leg_height);

  visit("motion.min_margin", c.motion.min_margin);
  visit("motion.swing_clearance", c.motion.swing_clearance);
  visit("motion.pitch_ratio", c.motion.pitch_ratio);
  visit("motion.slope_radius", c.motion.slope_radius);
  visit("motion.leg_height_decrement", c.motion.leg_height_decrement);
}

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep))
    parts.push_back(trim(part));
  if (!s.empty() && s.back() == sep)
    parts.emplace_back();
  return parts;
}

inline double parse_double(const std::string& text, const std::string& what)
{
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try
  {
    v = std::stod(t, &used);
  }
  catch (const std::exception&)
  {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v))
    throw Error("parse", what + ": expected a number, got '" + text + "'");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& text, std::size_t n,
  const std::string& what)
{
  const auto parts = split(text, ',');
  if (parts.size() != n)
    throw Error("parse", what + ": expected " + std::to_string(n) +
      " comma-separated numbers, got '" + text + "'");
  std::vector<double> out;
  for (const auto& p : parts)
    out.push_back(parse_double(p, what));
  return out;
}

inline void parse_value(const std::string& text, const std::string& name, double& out)
{
  out = parse_double(text, name);
}

inline void parse_value(const std::string& text, const std::string& name, int& out)
{
  const double v = parse_double(text, name);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw Error("parse", name + ": expected an integer, got '" + text + "'");
  out = int(v);
}

inline void parse_value(const std::string& text, const std::string& name, std::size_t& out)
{
  const double v = parse_double(text, name);
  if (v != std::floor(v) || v < 0 || v > 1e15)
    throw Error("parse", name + ": expected a non-negative integer, got '" + text + "'");
  out = std::size_t(v);
}

inline void parse_value(const std::string& text, const std::string& name, bool& out)
{
  const std::string t = trim(text);
  if (t == "true" || t == "1")
    out = true;
  else if (t == "false" || t == "0")
    out = false;
  else
    throw Error("parse", name + ": expected true or false, got '" + text + "'");
}

inline void parse_value(const std::string& text, const std::string& name,
  std::optional<double>& out)
{
  const std::string t = trim(text);
  if (t == "none" || t == "null" || t.empty())
    out.reset();
  else
    out = parse_double(t, name);
}

inline void parse_value(const std::string& text, const std::string& name, Eigen::Vector2d& out)
{
  const auto v = parse_doubles(text, 2, name);
  out = {v[0], v[1]};
}

inline void parse_value(const std::string& text, const std::string& name,
  std::array<double, 2>& out)
{
  const auto v = parse_doubles(text, 2, name);
  out = {v[0], v[1]};
}

inline Json value_to_json(double v) { return v; }
inline Json value_to_json(int v) { return v; }
inline Json value_to_json(std::size_t v) { return v; }
inline Json value_to_json(bool v) { return v; }
inline Json value_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }
inline Json value_to_json(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }
inline Json value_to_json(const std::array<double, 2>& v) { return Json::array({v[0], v[1]}); }

inline void value_from_json(const Json& j, double& out) { out = j.get<double>(); }
inline void value_from_json(const Json& j, int& out) { out = j.get<int>(); }
inline void value_from_json(const Json& j, std::size_t& out) { out = j.get<std::size_t>(); }
inline void value_from_json(const Json& j, bool& out) { out = j.get<bool>(); }
inline void value_from_json(const Json& j, std::optional<double>& out)
{
  if (j.is_null())
    out.reset();
  else
    out = j.get<double>();
}
inline void value_from_json(const Json& j, Eigen::Vector2d& out)
{
  out = {j.at(0).get<double>(), j.at(1).get<double>()};
}
inline void value_from_json(const Json& j, std::array<double, 2>& out)
{
  out = {j.at(0).get<double>(), j.at(1).get<double>()};
}

} // namespace detail

/// Sets one parameter from its text form. Vectors are comma-separated; the
/// optional backward factor accepts "none".
inline void set_param(PlannerConfig& config, const std::string& name, const std::string& value)
{
  bool found = false;
  visit_params(config, [&](const char* key, auto& field) {
    if (name == key)
    {
      detail::parse_value(value, name, field);
      found = true;
    }
  });
  if (!found)
    throw Error("parse", "unknown parameter '" + name + "'");
}

inline std::vector<std::string> param_names()
{
  std::vector<std::string> names;
  const PlannerConfig config;
  visit_params(config, [&](const char* key, const auto&) { names.emplace_back(key); });
  return names;
}

/// Parameters as one object per group: {"cost": {...}, "planner": {...}, ...}.
inline Json params_to_json(const PlannerConfig& config)
{
  Json out = Json::object();
  visit_params(config, [&](const std::string& key, const auto& field) {
    const auto dot = key.find('.');
    out[key.substr(0, dot)][key.substr(dot + 1)] = detail::value_to_json(field);
  });
  return out;
}

inline PlannerConfig params_from_json(const Json& j)
{
  PlannerConfig config;
  visit_params(config, [&](const std::string& key, auto& field) {
    const auto dot = key.find('.');
    const auto group = j.find(key.substr(0, dot));
    if (group == j.end())
      return;
    const auto value = group->find(key.substr(dot + 1));
    if (value != group->end())
      detail::value_from_json(*value, field);
  });
  return config;
}

//==============================================================================
inline PoseSpec parse_pose_spec(const std::string& text, const std::string& what = "pose")
{
  const auto v = detail::parse_doubles(text, 3, what);
  return {v[0], v[1], v[2]};
}

inline Json cell_to_json(const Cell& c) { return Json::array({c.x, c.y}); }

inline Cell cell_from_json(const Json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

inline Json vec_to_json(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }

inline Json vec_to_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Eigen::Vector2d vec2_from_json(const Json& j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline Eigen::Vector3d vec3_from_json(const Json& j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

/// Grid pose plus its metric base position and heading.
inline Json pose_to_json(const RobotPose& p, double resolution)
{
  Json j = Json::object();
  j["x"] = p.base.x * resolution;
  j["y"] = p.base.y * resolution;
  j["theta"] = orientation_angle(p.orientation);
  j["base"] = cell_to_json(p.base);
  j["orientation"] = p.orientation;
  Json feet = Json::array();
  for (const auto& f : p.feet)
    feet.push_back(cell_to_json(f));
  j["feet"] = feet;
  return j;
}

inline RobotPose pose_from_json(const Json& j)
{
  RobotPose p;
  p.base = cell_from_json(j.at("base"));
  p.orientation = j.at("orientation").get<int>();
  const Json& feet = j.at("feet");
  if (!feet.is_array() || feet.size() != 4)
    throw Error("parse", "pose needs four feet");
  for (std::size_t k = 0; k < 4; ++k)
    p.feet[k] = cell_from_json(feet[k]);
  return p;
}

inline Json manoeuvre_to_json(const Manoeuvre& m)
{
  Json j = Json::object();
  j["kind"] = to_string(m.kind);
  j["cost"] = m.cost;
  j["length"] = m.length;
  if (m.foot >= 0)
    j["foot"] = m.foot;
  if (m.kind == ManoeuvreKind::kAbstractStep)
  {
    j["foothold"] = cell_to_json(m.foothold);
    j["height_change"] = m.height_change;
  }
  return j;
}

inline Manoeuvre manoeuvre_from_json(const Json& j, const RobotPose& from, const RobotPose& to)
{
  Manoeuvre m;
  m.kind = manoeuvre_kind_from_string(j.at("kind").get<std::string>());
  m.from = from;
  m.to = to;
  m.cost = j.at("cost").get<double>();
  m.length = j.at("length").get<double>();
  if (j.contains("foot"))
    m.foot = j.at("foot").get<int>();
  if (j.contains("foothold"))
    m.foothold = cell_from_json(j.at("foothold"));
  if (j.contains("height_change"))
    m.height_change = j.at("height_change").get<double>();
  return m;
}

/// Iteration with its path as {pose, manoeuvre} entries; the manoeuvre of an
/// entry leads into its pose and is null for the start pose.
inline Json iteration_to_json(const AbstractPath& path, double resolution)
{
  Json j = Json::object();
  j["weight"] = path.weight;
  j["cost"] = path.cost;
  j["expansions"] = path.stats.expansions;
  j["ms"] = path.stats.wall_ms;
  Json entries = Json::array();
  for (std::size_t i = 0; i < path.poses.size(); ++i)
  {
    Json e = Json::object();
    e["pose"] = pose_to_json(path.poses[i], resolution);
    e["manoeuvre"] = i == 0 ? Json() : manoeuvre_to_json(path.manoeuvres[i - 1]);
    entries.push_back(e);
  }
  j["path"] = entries;
  return j;
}

inline AbstractPath iteration_from_json(const Json& j)
{
  AbstractPath path;
  path.weight = j.at("weight").get<double>();
  path.cost = j.at("cost").get<double>();
  path.stats.weight = path.weight;
  path.stats.cost = path.cost;
  path.stats.expansions = j.at("expansions").get<std::size_t>();
  path.stats.wall_ms = j.at("ms").get<double>();
  for (const Json& e : j.at("path"))
  {
    const RobotPose pose = pose_from_json(e.at("pose"));
    if (!path.poses.empty())
    {
      if (e.at("manoeuvre").is_null())
        throw Error("parse", "path entry after the start lacks a manoeuvre");
      path.manoeuvres.push_back(manoeuvre_from_json(e.at("manoeuvre"), path.poses.back(), pose));
    }
    path.poses.push_back(pose);
  }
  return path;
}

inline Json keyframe_to_json(const Keyframe& k, double resolution)
{
  Json j = Json::object();
  j["primitive"] = to_string(k.primitive);
  j["manoeuvre"] = k.manoeuvre;
  j["pose"] = pose_to_json(k.pose, resolution);
  j["base"] = vec_to_json(k.base);
  j["z"] = k.z;
  j["theta"] = k.theta;
  j["roll"] = k.roll;
  j["pitch"] = k.pitch;
  Json feet = Json::array(), contact = Json::array(), legs = Json::array();
  for (std::size_t f = 0; f < 4; ++f)
  {
    feet.push_back(vec_to_json(k.feet[f]));
    contact.push_back(bool(k.contact[f]));
    legs.push_back(k.leg_heights[f]);
  }
  j["feet"] = feet;
  j["contact"] = contact;
  j["leg_heights"] = legs;
  j["com"] = vec_to_json(k.com);
  j["leg_delta"] = k.leg_delta;
  if (k.roll_geometry)
  {
    const RollGeometry& g = *k.roll_geometry;
    j["roll_geometry"] = Json{{"rotation_center", vec_to_json(g.rotation_center)},
      {"com", vec_to_json(g.com)}, {"com_target_y", g.com_target_y},
      {"footprint_width", g.footprint_width}};
  }
  return j;
}

inline Keyframe keyframe_from_json(const Json& j)
{
  Keyframe k;
  k.primitive = primitive_from_string(j.at("primitive").get<std::string>());
  k.manoeuvre = j.at("manoeuvre").get<int>();
  k.pose = pose_from_json(j.at("pose"));
  k.base = vec2_from_json(j.at("base"));
  k.z = j.at("z").get<double>();
  k.theta = j.at("theta").get<double>();
  k.roll = j.at("roll").get<double>();
  k.pitch = j.at("pitch").get<double>();
  for (std::size_t f = 0; f < 4; ++f)
  {
    k.feet[f] = vec3_from_json(j.at("feet").at(f));
    k.contact[f] = j.at("contact").at(f).get<bool>();
    k.leg_heights[f] = j.at("leg_heights").at(f).get<double>();
  }
  k.com = vec2_from_json(j.at("com"));
  k.leg_delta = j.at("leg_delta").get<double>();
  if (j.contains("roll_geometry"))
  {
    const Json& g = j.at("roll_geometry");
    k.roll_geometry = RollGeometry{vec2_from_json(g.at("rotation_center")),
      vec2_from_json(g.at("com")), g.at("com_target_y").get<double>(),
      g.at("footprint_width").get<double>()};
  }
  return k;
}

//==============================================================================
/// Everything a planning run reports. `error` is empty on success.
struct PlanReport
{
  PlannerConfig params;
  std::string map;
  double resolution = 0.025;
  PoseSpec start;
  PoseSpec goal;
  std::vector<AbstractPath> iterations;
  ExecutablePath executable;
  std::string error;
  std::string message;
};

inline Json pose_spec_to_json(const PoseSpec& p) { return Json::array({p.x, p.y, p.theta}); }

inline PoseSpec pose_spec_from_json(const Json& j)
{
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Json report_to_json(const PlanReport& r)
{
  Json j = Json::object();
  j["params"] = params_to_json(r.params);
  j["map"] = r.map;
  j["resolution"] = r.resolution;
  j["start"] = pose_spec_to_json(r.start);
  j["goal"] = pose_spec_to_json(r.goal);
  if (!r.error.empty())
  {
    j["error"] = r.error;
    j["message"] = r.message;
  }
  Json iterations = Json::array();
  for (const auto& it : r.iterations)
    iterations.push_back(iteration_to_json(it, r.resolution));
  j["iterations"] = iterations;
  Json keyframes = Json::array();
  for (const auto& k : r.executable.keyframes)
    keyframes.push_back(keyframe_to_json(k, r.resolution));
  j["executable"] = keyframes;
  return j;
}

inline PlanReport report_from_json(const Json& j)
{
  PlanReport r;
  r.params = params_from_json(j.at("params"));
  r.map = j.at("map").get<std::string>();
  r.resolution = j.at("resolution").get<double>();
  r.start = pose_spec_from_json(j.at("start"));
  r.goal = pose_spec_from_json(j.at("goal"));
  if (j.contains("error"))
  {
    r.error = j.at("error").get<std::string>();
    r.message = j.value("message", std::string());
  }
  for (const Json& it : j.at("iterations"))
    r.iterations.push_back(iteration_from_json(it));
  for (const Json& k : j.at("executable"))
    r.executable.keyframes.push_back(keyframe_from_json(k));
  return r;
}

inline std::string dump_report(const PlanReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline PlanReport parse_report(const std::string& text)
{
  try
  {
    return report_from_json(Json::parse(text));
  }
  catch (const Json::exception& e)
  {
    throw Error("parse", std::string("invalid path document: ") + e.what());
  }
}

//==============================================================================
namespace detail {

inline std::string svg_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// Heat color for a finite foot cost >= 1 on a log scale up to `top`.
inline std::string heat_color(double cost, double top)
{
  const double t = std::clamp(std::log(std::max(cost, 1.0)) / std::log(top), 0.0, 1.0);
  const int r = int(std::lround(250 - 30 * t));
  const int g = int(std::lround(250 - 200 * t));
  const int b = int(std::lround(245 - 215 * t));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

} // namespace detail

/// Renders a path over the foot-cost map. Every manoeuvre is drawn by exactly
/// one element of class "manoeuvre"; front steps are red, rear steps green.
inline void write_svg(std::ostream& out, const CostModel& model, const AbstractPath& path)
{
  using detail::svg_number;
  const auto& map = model.map();
  const double res = map.resolution();
  const double s = 4.0; // pixels per cell
  const int w = map.width(), h = map.height();
  auto px = [&](double mx) { return (mx / res + 0.5) * s; };
  auto py = [&](double my) { return (h - my / res - 0.5) * s; };
  auto cx = [&](const Cell& c) { return svg_number(px(c.x * res)); };
  auto cy = [&](const Cell& c) { return svg_number(py(c.y * res)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * s << "\" height=\""
      << h * s << "\" viewBox=\"0 0 " << w * s << ' ' << h * s << "\">\n";
  out << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" "
         "markerWidth=\"4\" markerHeight=\"4\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" "
         "fill=\"#1f3b73\"/></marker></defs>\n";

  // Foot-cost heatmap, horizontal runs of equal color.
  const double top = model.params().k1 + 1.0;
  out << "<g class=\"heatmap\">\n";
  for (int y = 0; y < h; ++y)
  {
    int x = 0;
    while (x < w)
    {
      auto color_at = [&](int xx) {
        const Cell c{xx, y};
        if (!map.known(c))
          return std::string("#9aa0a6");
        const double v = model.foot_cost(c);
        return std::isfinite(v) ? detail::heat_color(v, top) : std::string("#262626");
      };
      const std::string color = color_at(x);
      int end = x + 1;
      while (end < w && color_at(end) == color)
        ++end;
      out << "<rect x=\"" << x * s << "\" y=\"" << (h - 1 - y) * s << "\" width=\""
          << (end - x) * s << "\" height=\"" << s << "\" fill=\"" << color << "\"/>\n";
      x = end;
    }
  }
  out << "</g>\n";

  // Robot center polyline with orientation arrows.
  out << "<polyline class=\"center-path\" fill=\"none\" stroke=\"#1f3b73\" stroke-width=\"1.5\" "
         "points=\"";
  for (std::size_t i = 0; i < path.poses.size(); ++i)
    out << (i ? " " : "") << cx(path.poses[i].base) << ',' << cy(path.poses[i].base);
  out << "\"/>\n<g class=\"headings\">\n";
  for (const auto& p : path.poses)
  {
    const Eigen::Vector2d u = Footprint::heading(p.orientation) * 0.08;
    const double x0 = p.base.x * res, y0 = p.base.y * res;
    out << "<line x1=\"" << svg_number(px(x0)) << "\" y1=\"" << svg_number(py(y0))
        << "\" x2=\"" << svg_number(px(x0 + u.x())) << "\" y2=\"" << svg_number(py(y0 + u.y()))
        << "\" stroke=\"#1f3b73\" stroke-width=\"0.8\" marker-end=\"url(#arrow)\"/>\n";
  }
  out << "</g>\n";

  // Manoeuvres and foothold rectangles.
  out << "<g class=\"manoeuvres\">\n";
  for (std::size_t i = 0; i < path.manoeuvres.size(); ++i)
  {
    const Manoeuvre& m = path.manoeuvres[i];
    const std::string tag = " data-index=\"" + std::to_string(i) + "\"";
    auto line = [&](const std::string& cls, const Cell& a, const Cell& b,
                  const std::string& color, double width) {
      out << "<line class=\"manoeuvre " << cls << "\"" << tag << " x1=\"" << cx(a) << "\" y1=\""
          << cy(a) << "\" x2=\"" << cx(b) << "\" y2=\"" << cy(b) << "\" stroke=\"" << color
          << "\" stroke-width=\"" << width << "\"/>\n";
    };
    switch (m.kind)
    {
      case ManoeuvreKind::kDrive:
        line("drive", m.from.base, m.to.base, "#1f3b73", 1.0);
        break;
      case ManoeuvreKind::kRotate:
        out << "<circle class=\"manoeuvre rotate\"" << tag << " cx=\"" << cx(m.from.base)
            << "\" cy=\"" << cy(m.from.base) << "\" r=\"2\" fill=\"none\" stroke=\"#7b3fa0\"/>\n";
        break;
      case ManoeuvreKind::kAbstractStep:
      {
        const bool front = is_front(m.foot);
        line(front ? "step front" : "step rear", m.from.feet[std::size_t(m.foot)], m.foothold,
          front ? "red" : "green", 2.0);
        break;
      }
      case ManoeuvreKind::kBaseShift:
        line("base_shift", m.from.base, m.to.base, "#1a9fd6", 1.5);
        break;
      case ManoeuvreKind::kWheelMove:
        line("wheel_move", m.from.feet[std::size_t(m.foot)], m.to.feet[std::size_t(m.foot)],
          "#e08a00", 1.5);
        break;
    }
  }
  for (const Manoeuvre& m : path.manoeuvres)
  {
    if (m.kind != ManoeuvreKind::kAbstractStep)
      continue;
    const double half = 0.05 / res * s;
    out << "<rect class=\"foothold\" x=\"" << svg_number(px(m.foothold.x * res) - half)
        << "\" y=\"" << svg_number(py(m.foothold.y * res) - half) << "\" width=\""
        << svg_number(2 * half) << "\" height=\"" << svg_number(2 * half)
        << "\" fill=\"none\" stroke=\"" << (is_front(m.foot) ? "red" : "green")
        << "\" stroke-width=\"1\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

//==============================================================================
/// Key-value scenario file:
///
///   # comment
///   builtin = platform        (or: map = relative/or/absolute/path.map)
///   start = 0.8, 1.8, 0
///   goal = 3.8, 0.7, 0
///   budget_s = 10
///   emit_json = out/platform.json
///   planner.k12 = 2.0         (any parameter name from visit_params)
///
/// Map paths are resolved relative to the scenario file; output paths are
/// used as given.
struct ScenarioFile
{
  std::string source;
  std::optional<std::string> builtin;
  std::optional<std::string> map_path;
  std::optional<PoseSpec> start;
  std::optional<PoseSpec> goal;
  std::optional<double> budget_s;
  std::optional<std::string> emit_json;
  std::optional<std::string> emit_svg;
  std::vector<std::pair<std::string, std::string>> overrides;

  void apply_overrides(PlannerConfig& config) const
  {
    for (const auto& [key, value] : overrides)
    {
      try
      {
        set_param(config, key, value);
      }
      catch (const Error& e)
      {
        throw Error(e.kind(), source + ": " + e.what());
      }
    }
  }
};

inline ScenarioFile parse_scenario(std::istream& in, const std::string& source = "<stream>",
  const std::filesystem::path& base_dir = {})
{
  ScenarioFile s;
  s.source = source;
  const auto names = param_names();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    const std::string text = detail::trim(line.substr(0, hash));
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error("parse", where + ": expected key = value");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    try
    {
      if (key == "builtin")
        s.builtin = value;
      else if (key == "map")
        s.map_path = (base_dir / value).lexically_normal().string();
      else if (key == "start")
        s.start = parse_pose_spec(value, "start");
      else if (key == "goal")
        s.goal = parse_pose_spec(value, "goal");
      else if (key == "budget_s")
        s.budget_s = detail::parse_double(value, "budget_s");
      else if (key == "emit_json")
        s.emit_json = value;
      else if (key == "emit_svg")
        s.emit_svg = value;
      else if (std::find(names.begin(), names.end(), key) != names.end())
      {
        PlannerConfig probe;
        set_param(probe, key, value);
        s.overrides.emplace_back(key, value);
      }
      else
        throw Error("parse", "unknown key '" + key + "'");
    }
    catch (const Error& e)
    {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  if (s.builtin && s.map_path)
    throw Error("parse", source + ": 'builtin' and 'map' are mutually exclusive");
  return s;
}

inline ScenarioFile load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("io", "cannot open scenario file '" + path + "'");
  return parse_scenario(in, path, std::filesystem::path(path).parent_path());
}

} // namespace hybrid_nav
