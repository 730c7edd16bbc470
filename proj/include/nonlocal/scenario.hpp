#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nonlocal/envelopes.hpp"
#include "nonlocal/exact_sets.hpp"
#include "nonlocal/grid.hpp"

namespace nonlocal {

using json = nlohmann::ordered_json;

// A scenario bundles the ingredients of one integrand: the target set K, the
// norm and exponent of the distance penalty, and the sampling grid.
struct Scenario {
  std::string name = "custom";
  ExactSet k = PointList{{{0.0, 0.0}}};
  Norm q = Norm::l1;
  double p = 2.0;
  ScalarGrid grid = ScalarGrid{};
  double omega = 1.0;
};

inline const char* norm_name(Norm q) {
  switch (q) {
    case Norm::l1: return "1";
    case Norm::l2: return "2";
    case Norm::linf: return "inf";
  }
  return "?";
}

inline Norm parse_norm(const json& j) {
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v == 1) return Norm::l1;
    if (v == 2) return Norm::l2;
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "1") return Norm::l1;
    if (s == "2") return Norm::l2;
    if (s == "inf" || s == "Inf" || s == "INF") return Norm::linf;
  }
  throw std::invalid_argument("scenario: \"q\" must be 1, 2, or \"inf\", got " + j.dump());
}

namespace detail {

inline double json_number(const json& j, const char* where) {
  if (!j.is_number())
    throw std::invalid_argument(std::string("scenario: ") + where + " must be a number, got " +
                                j.dump());
  return j.get<double>();
}

inline Point json_point(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument(std::string("scenario: ") + where +
                                " must be a two-element array, got " + j.dump());
  return Point{json_number(j[0], where), json_number(j[1], where)};
}

inline ExactSet parse_set(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("scenario: \"K\" must be an object with a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "points") {
    PointList out;
    for (const auto& pt : j.at("points")) out.points.push_back(json_point(pt, "K.points[i]"));
    if (out.points.empty()) throw std::invalid_argument("scenario: K.points is empty");
    return out;
  }
  if (type == "norm_sphere") {
    const double r = json_number(j.at("radius"), "K.radius");
    if (!(r > 0.0)) throw std::invalid_argument("scenario: K.radius must be positive");
    return norm_sphere_l1(r);
  }
  if (type == "cartesian") {
    ProductPoints out;
    for (const auto& v : j.at("values")) out.values.push_back(json_number(v, "K.values[i]"));
    if (out.values.empty()) throw std::invalid_argument("scenario: K.values is empty");
    std::sort(out.values.begin(), out.values.end());
    out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
    return out;
  }
  if (type == "interval") {
    ProductInterval out{json_number(j.at("lo"), "K.lo"), json_number(j.at("hi"), "K.hi")};
    if (!(out.lo <= out.hi)) throw std::invalid_argument("scenario: K.lo must not exceed K.hi");
    return out;
  }
  if (type == "segments") {
    SegmentList out;
    for (const auto& seg : j.at("segments")) {
      if (!seg.is_array() || seg.size() != 2)
        throw std::invalid_argument("scenario: K.segments[i] must be a pair of points");
      out.segments.push_back(
          Segment{json_point(seg[0], "K.segments[i][0]"), json_point(seg[1], "K.segments[i][1]")});
    }
    if (out.segments.empty()) throw std::invalid_argument("scenario: K.segments is empty");
    return out;
  }
  if (type == "polygon") {
    ConvexPolygon out;
    for (const auto& pt : j.at("vertices")) out.vertices.push_back(json_point(pt, "K.vertices[i]"));
    if (out.vertices.empty()) throw std::invalid_argument("scenario: K.vertices is empty");
    return out;
  }
  throw std::invalid_argument("scenario: unknown K.type \"" + type + "\"");
}

inline json set_to_json(const ExactSet& k) {
  json out;
  std::visit(
      [&out](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointList>) {
          out["type"] = "points";
          auto& arr = out["points"] = json::array();
          for (const auto& pt : s.points) arr.push_back({pt.x, pt.y});
        } else if constexpr (std::is_same_v<T, SegmentList>) {
          out["type"] = "segments";
          auto& arr = out["segments"] = json::array();
          for (const auto& seg : s.segments)
            arr.push_back({{seg.a.x, seg.a.y}, {seg.b.x, seg.b.y}});
        } else if constexpr (std::is_same_v<T, ProductPoints>) {
          out["type"] = "cartesian";
          out["values"] = s.values;
        } else if constexpr (std::is_same_v<T, ProductInterval>) {
          out["type"] = "interval";
          out["lo"] = s.lo;
          out["hi"] = s.hi;
        } else {
          out["type"] = "polygon";
          auto& arr = out["vertices"] = json::array();
          for (const auto& pt : s.vertices) arr.push_back({pt.x, pt.y});
        }
      },
      k);
  return out;
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
  Scenario s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (!j.contains("K")) throw std::invalid_argument("scenario: missing \"K\"");
  s.k = detail::parse_set(j.at("K"));
  if (j.contains("q")) s.q = parse_norm(j.at("q"));
  if (j.contains("p")) {
    s.p = detail::json_number(j.at("p"), "\"p\"");
    if (!(s.p >= 1.0)) throw std::invalid_argument("scenario: \"p\" must be >= 1");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const double lo = g.contains("lo") ? detail::json_number(g.at("lo"), "grid.lo") : -3.0;
    const double hi = g.contains("hi") ? detail::json_number(g.at("hi"), "grid.hi") : 3.0;
    std::size_t n = 241;
    if (g.contains("n")) {
      if (!g.at("n").is_number_integer() || g.at("n").get<long long>() < 2)
        throw std::invalid_argument("scenario: grid.n must be an integer >= 2");
      n = g.at("n").get<std::size_t>();
    }
    s.grid = ScalarGrid{lo, hi, n};
  }
  if (j.contains("omega")) {
    s.omega = detail::json_number(j.at("omega"), "\"omega\"");
    if (!(s.omega > 0.0) || !std::isfinite(s.omega))
      throw std::invalid_argument("scenario: \"omega\" must be positive and finite");
  }
  return s;
}

inline json scenario_to_json(const Scenario& s) {
  json out;
  out["name"] = s.name;
  out["K"] = detail::set_to_json(s.k);
  out["q"] = s.q == Norm::linf ? json("inf") : json(s.q == Norm::l1 ? 1 : 2);
  out["p"] = s.p;
  out["grid"] = {{"lo", s.grid.lo}, {"hi", s.grid.hi}, {"n", s.grid.n}};
  out["omega"] = s.omega;
  return out;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("scenario: " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

inline std::vector<std::string> preset_names() {
  return {"four-well", "diamond-boundary", "five-point", "cartesian", "indicator"};
}

// Built-in scenarios on a dyadic grid, spacing 2^-5 over [-3,3].  The
// four-well set and its five-point variant drive the counterexample
// diagnostics, the diamond boundary and the Cartesian pair the positive
// ones; "indicator" reuses the diamond boundary for membership experiments.
inline Scenario preset_scenario(std::string_view name) {
  Scenario s;
  s.grid = ScalarGrid{-3.0, 3.0, 193};
  s.q = Norm::l1;
  if (name == "four-well") {
    s.name = "four-well";
    s.k = PointList{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
    s.p = 2.0;
    return s;
  }
  if (name == "diamond-boundary") {
    s.name = "diamond-boundary";
    s.k = norm_sphere_l1(1.0);
    s.p = 1.0;
    return s;
  }
  if (name == "five-point") {
    s.name = "five-point";
    s.k = PointList{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {2.0, 2.0}}};
    s.p = 2.0;
    return s;
  }
  if (name == "cartesian") {
    s.name = "cartesian";
    s.k = ProductPoints{{-1.0, 1.0}};
    s.p = 2.0;
    return s;
  }
  if (name == "indicator") {
    s.name = "indicator";
    s.k = norm_sphere_l1(1.0);
    s.p = 1.0;
    return s;
  }
  throw std::invalid_argument("unknown preset \"" + std::string(name) +
                              "\"; available: four-well, diamond-boundary, five-point, "
                              "cartesian, indicator");
}

inline GridFunction scenario_integrand(const Scenario& s) {
  return distance_integrand(s.grid, s.k, s.q, s.p);
}

// Grid nodes lying on K itself (distance within the level tolerance).
inline GridSet scenario_zero_set(const Scenario& s) {
  GridSet out(s.grid);
  const double eps = default_level_eps(0.0);
  for (std::size_t i = 0; i < s.grid.n; ++i)
    for (std::size_t j = 0; j < s.grid.n; ++j)
      if (distance(s.k, s.grid.coord(i), s.grid.coord(j), s.q) <= eps) out.set(i, j);
  return out;
}

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace detail

// Long-form CSV, one node per row, row-major in xi.  %.17g keeps the values
// bit-exact through a round trip.
inline void write_grid_csv(std::ostream& os, const GridFunction& w) {
  std::string line = "xi,zeta,value\n";
  os << line;
  for (std::size_t i = 0; i < w.grid.n; ++i)
    for (std::size_t j = 0; j < w.grid.n; ++j) {
      line.clear();
      detail::append_double(line, w.grid.coord(i));
      line += ',';
      detail::append_double(line, w.grid.coord(j));
      line += ',';
      detail::append_double(line, w.at(i, j));
      line += '\n';
      os << line;
    }
}

inline void write_mask_csv(std::ostream& os, const ScalarGrid& grid, const GridSet& set) {
  std::string line = "xi,zeta,value\n";
  os << line;
  for (std::size_t i = 0; i < grid.n; ++i)
    for (std::size_t j = 0; j < grid.n; ++j) {
      line.clear();
      detail::append_double(line, grid.coord(i));
      line += ',';
      detail::append_double(line, grid.coord(j));
      line += set.test(i, j) ? ",1\n" : ",0\n";
      os << line;
    }
}

struct PlotRecord {
  double xi = 0.0, zeta = 0.0, value = 0.0;
};

inline std::vector<PlotRecord> read_long_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  auto strip = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    const auto end = s.find_last_not_of(" \t\r");
    s.erase(end == std::string::npos ? 0 : end + 1);
    return s;
  };
  if (strip(line) != "xi,zeta,value")
    throw std::invalid_argument("csv: expected header \"xi,zeta,value\", got \"" + strip(line) +
                                "\"");
  std::vector<PlotRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    std::istringstream row(line);
    PlotRecord rec;
    char c1 = 0, c2 = 0;
    if (!(row >> rec.xi >> c1 >> rec.zeta >> c2 >> rec.value) || c1 != ',' || c2 != ',')
      throw std::invalid_argument("csv: malformed row at line " + std::to_string(lineno) + ": " +
                                  line);
    out.push_back(rec);
  }
  if (out.empty()) throw std::invalid_argument("csv: no data rows");
  return out;
}

// Gnuplot "splot"-ready blocks: space separated columns, rows grouped by xi
// with a blank line between groups.  Records are sorted to make the output
// independent of the input row order.
inline void write_gnuplot_blocks(std::ostream& os, std::vector<PlotRecord> records) {
  std::sort(records.begin(), records.end(), [](const PlotRecord& a, const PlotRecord& b) {
    if (a.xi != b.xi) return a.xi < b.xi;
    return a.zeta < b.zeta;
  });
  std::string line;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (k > 0 && records[k].xi != records[k - 1].xi) os << '\n';
    line.clear();
    detail::append_double(line, records[k].xi);
    line += ' ';
    detail::append_double(line, records[k].zeta);
    line += ' ';
    detail::append_double(line, records[k].value);
    line += '\n';
    os << line;
  }
}

}  // namespace nonlocal
