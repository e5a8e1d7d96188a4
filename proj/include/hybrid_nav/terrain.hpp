#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybrid_nav {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

//==============================================================================
/// Raised for every recoverable failure. `kind()` is a short stable token
/// (e.g. "no-path") that front ends can report verbatim.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string& what)
  : std::runtime_error(what), kind_(std::move(kind))
  {
  }

  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

//==============================================================================
struct Cell
{
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;

  Cell operator+(const Cell& o) const { return {x + o.x, y + o.y}; }
  Cell operator-(const Cell& o) const { return {x - o.x, y - o.y}; }
};

/// Euclidean distance between two cell centers in cells.
inline double cell_distance(const Cell& a, const Cell& b)
{
  return std::hypot(double(a.x - b.x), double(a.y - b.y));
}

//==============================================================================
/// Regular grid of terrain heights. Cell (x, y) has its center at world
/// coordinates (x * resolution, y * resolution); row 0 is the minimum-y edge.
class HeightMap
{
public:
  HeightMap() = default;

  HeightMap(int width, int height, double resolution, double fill = 0.0)
  : width_(width), height_(height), resolution_(resolution),
    heights_(std::size_t(width) * std::size_t(height), fill),
    known_(std::size_t(width) * std::size_t(height), 1)
  {
    validate();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return heights_.size(); }

  bool contains(const Cell& c) const
  {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  std::size_t index(const Cell& c) const
  {
    return std::size_t(c.y) * std::size_t(width_) + std::size_t(c.x);
  }

  bool known(const Cell& c) const { return contains(c) && known_[index(c)]; }
  double at(const Cell& c) const { return heights_[index(c)]; }

  void set(const Cell& c, double h)
  {
    heights_[index(c)] = h;
    known_[index(c)] = 1;
  }

  void set_unknown(const Cell& c)
  {
    heights_[index(c)] = 0.0;
    known_[index(c)] = 0;
  }

  Cell cell_at(double wx, double wy) const
  {
    return {int(std::lround(wx / resolution_)), int(std::lround(wy / resolution_))};
  }

  double world_x(const Cell& c) const { return c.x * resolution_; }
  double world_y(const Cell& c) const { return c.y * resolution_; }

  void validate() const
  {
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_))
      throw Error("validation", "height map resolution must be positive");
    if (width_ < 1 || height_ < 1)
      throw Error("validation", "height map must have at least one cell");
    for (std::size_t i = 0; i < heights_.size(); ++i)
    {
      if (known_[i] && !std::isfinite(heights_[i]))
        throw Error("validation", "known cell with non-finite height");
    }
  }

private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.025;
  std::vector<double> heights_;
  std::vector<std::uint8_t> known_;
};

//==============================================================================
/// Parses the text map format:
///
///   resolution <meters> width <int> height <int>
///   <row 0: width entries, each a height in meters or '?'>
///   ...
///
/// Rows or trailing entries missing from the file are left unknown.
inline HeightMap parse_height_map(std::istream& in, const std::string& source = "<stream>")
{
  auto fail = [&](std::size_t line, std::size_t offset, const std::string& msg) -> Error {
    return Error("parse", source + ":" + std::to_string(line) + ":" +
      std::to_string(offset) + ": " + msg);
  };

  std::string line;
  std::size_t line_no = 0;
  // Header, skipping blank and comment lines.
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
      continue;
    break;
  }
  if (line_no == 0 || line.empty())
    throw fail(line_no, 0, "missing header line");

  std::istringstream header(line);
  std::string k1, k2, k3;
  double resolution = 0.0;
  long width = 0, height = 0;
  if (!(header >> k1 >> resolution >> k2 >> width >> k3 >> height) ||
      k1 != "resolution" || k2 != "width" || k3 != "height")
    throw fail(line_no, 0, "expected 'resolution <m> width <int> height <int>'");
  if (!(resolution > 0.0))
    throw Error("validation", source + ":" + std::to_string(line_no) +
      ": resolution must be positive");
  if (width < 1 || height < 1 || width > 100000 || height > 100000)
    throw Error("validation", source + ":" + std::to_string(line_no) +
      ": width and height must be in [1, 100000]");

  HeightMap map(int(width), int(height), resolution);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      map.set_unknown({x, y});

  int row = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (line[0] == '#')
      continue;
    if (row >= height)
      throw fail(line_no, 0, "more than " + std::to_string(height) + " rows");

    std::size_t pos = 0;
    int col = 0;
    while (true)
    {
      pos = line.find_first_not_of(" \t\r", pos);
      if (pos == std::string::npos)
        break;
      const std::size_t end = line.find_first_of(" \t\r", pos);
      const std::string token = line.substr(pos, end == std::string::npos ? end : end - pos);
      if (col >= width)
        throw fail(line_no, pos + 1, "more than " + std::to_string(width) + " entries");
      if (token != "?")
      {
        std::size_t used = 0;
        double value = 0.0;
        try
        {
          value = std::stod(token, &used);
        }
        catch (const std::exception&)
        {
          used = 0;
        }
        if (used != token.size() || !std::isfinite(value))
          throw fail(line_no, pos + 1, "invalid height '" + token + "'");
        map.set({col, row}, value);
      }
      ++col;
      if (end == std::string::npos)
        break;
      pos = end;
    }
    ++row;
  }
  return map;
}

inline HeightMap load_height_map(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("io", "cannot open map file '" + path + "'");
  return parse_height_map(in, path);
}

inline void write_height_map(std::ostream& out, const HeightMap& map)
{
  out << "resolution " << map.resolution() << " width " << map.width()
      << " height " << map.height() << "\n";
  std::ostringstream value;
  value.precision(10);
  for (int y = 0; y < map.height(); ++y)
  {
    for (int x = 0; x < map.width(); ++x)
    {
      if (x)
        out << ' ';
      if (!map.known({x, y}))
      {
        out << '?';
        continue;
      }
      value.str("");
      value << map.at({x, y});
      out << value.str();
    }
    out << "\n";
  }
}

//==============================================================================
/// Unsigned local height differences. Cells that touch unknown terrain or the
/// map border carry no value.
class HeightDiffField
{
public:
  HeightDiffField() = default;
  HeightDiffField(int width, int height, double resolution)
  : width_(width), height_(height), resolution_(resolution),
    values_(std::size_t(width) * std::size_t(height), 0.0),
    known_(std::size_t(width) * std::size_t(height), 0)
  {
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool contains(const Cell& c) const
  {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  std::size_t index(const Cell& c) const
  {
    return std::size_t(c.y) * std::size_t(width_) + std::size_t(c.x);
  }

  bool known(const Cell& c) const { return contains(c) && known_[index(c)]; }
  double at(const Cell& c) const { return values_[index(c)]; }

  void set(const Cell& c, double v)
  {
    values_[index(c)] = v;
    known_[index(c)] = 1;
  }

private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.025;
  std::vector<double> values_;
  std::vector<std::uint8_t> known_;
};

/// Max absolute height difference to the 8-neighborhood.
inline HeightDiffField height_diff_field(const HeightMap& map)
{
  HeightDiffField diff(map.width(), map.height(), map.resolution());
  for (int y = 1; y + 1 < map.height(); ++y)
  {
    for (int x = 1; x + 1 < map.width(); ++x)
    {
      const Cell c{x, y};
      if (!map.known(c))
        continue;
      const double h = map.at(c);
      double max_diff = 0.0;
      bool complete = true;
      for (int dy = -1; dy <= 1 && complete; ++dy)
      {
        for (int dx = -1; dx <= 1; ++dx)
        {
          const Cell n{x + dx, y + dy};
          if (!map.known(n))
          {
            complete = false;
            break;
          }
          max_diff = std::max(max_diff, std::abs(h - map.at(n)));
        }
      }
      if (complete)
        diff.set(c, max_diff);
    }
  }
  return diff;
}

//==============================================================================
/// Least-squares plane z = a*x + b*y + c through the known heights in a disc.
struct PlaneFit
{
  double slope_x = 0.0;
  double slope_y = 0.0;
  double offset = 0.0;

  /// Inclination of the plane against the horizontal.
  double inclination() const { return std::atan(std::hypot(slope_x, slope_y)); }

  /// Signed inclination along a heading (positive when rising ahead).
  double inclination_along(double heading) const
  {
    return std::atan(slope_x * std::cos(heading) + slope_y * std::sin(heading));
  }
};

inline PlaneFit fit_ground_plane(const HeightMap& map, const Cell& center, double radius)
{
  const int r = int(std::floor(radius / map.resolution()));
  const double r2 = (radius / map.resolution()) * (radius / map.resolution()) + 1e-9;
  // Centered coordinates keep the normal equations well conditioned.
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  int count = 0;
  for (int dy = -r; dy <= r; ++dy)
  {
    for (int dx = -r; dx <= r; ++dx)
    {
      if (double(dx * dx + dy * dy) > r2)
        continue;
      const Cell c{center.x + dx, center.y + dy};
      if (!map.known(c))
        continue;
      const Eigen::Vector3d row(dx * map.resolution(), dy * map.resolution(), 1.0);
      ata += row * row.transpose();
      atb += row * map.at(c);
      ++count;
    }
  }
  if (count < 3)
    throw Error("degenerate-terrain", "fewer than 3 known cells for plane fit");

  Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
  if (lu.rank() < 3)
    throw Error("degenerate-terrain", "known cells are collinear");
  const Eigen::Vector3d sol = lu.solve(atb);
  return {sol.x(), sol.y(), sol.z()};
}

/// Inclination of the least-squares ground plane within `radius` of `center`.
inline double ground_slope(const HeightMap& map, const Cell& center, double radius = 0.5)
{
  return fit_ground_plane(map, center, radius).inclination();
}

} // namespace hybrid_nav
