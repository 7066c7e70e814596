#pragma once

// Street network model: JSON Lines ingestion, road-class filtering,
// border normalization and per-cell subnetworks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gridskg/error.hpp"
#include "gridskg/geometry.hpp"
#include "gridskg/grid.hpp"

namespace gridskg {

enum class RoadClass { motorway, trunk, primary, secondary, other };

inline constexpr RoadClass kAllRoadClasses[] = {RoadClass::motorway, RoadClass::trunk, RoadClass::primary,
                                                RoadClass::secondary, RoadClass::other};

inline const std::set<RoadClass>& major_road_classes() {
  static const std::set<RoadClass> classes{RoadClass::motorway, RoadClass::trunk, RoadClass::primary,
                                           RoadClass::secondary};
  return classes;
}

inline std::string_view to_string(RoadClass c) {
  switch (c) {
    case RoadClass::motorway: return "motorway";
    case RoadClass::trunk: return "trunk";
    case RoadClass::primary: return "primary";
    case RoadClass::secondary: return "secondary";
    case RoadClass::other: return "other";
  }
  return "other";
}

/// Unknown class names map to `other`.
inline RoadClass parse_road_class(std::string_view s) {
  for (RoadClass c : kAllRoadClasses)
    if (to_string(c) == s) return c;
  return RoadClass::other;
}

/// Strict variant for user-supplied class lists.
inline std::optional<RoadClass> road_class_from_name(std::string_view s) {
  for (RoadClass c : kAllRoadClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

struct StreetNode {
  std::string id;
  double x = 0;
  double y = 0;

  Point pos() const { return {x, y}; }
  friend bool operator==(const StreetNode&, const StreetNode&) = default;
};

/// Directed segment. A two-way street is two segments.
struct StreetSegment {
  std::string id;
  std::string from;
  std::string to;
  double length = 0;   // meters, arc length of the shape
  double bearing = 0;  // degrees clockwise from grid north, [0, 360)
  int lanes = 1;
  std::optional<double> maxspeed;  // km/h
  RoadClass road_class = RoadClass::other;
  // Full polyline including both endpoints; empty for a straight segment.
  std::vector<Point> geometry;
  // Edge record this segment was expanded from and whether it runs against
  // the record's from->to order. Split nodes are shared between both directions.
  std::string source_edge;
  bool reversed = false;

  friend bool operator==(const StreetSegment&, const StreetSegment&) = default;
};

struct StreetNetwork {
  std::map<std::string, StreetNode> nodes;
  std::map<std::string, StreetSegment> segments;

  const StreetNode& node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw IntegrityError("unknown node '" + id + "'");
    return it->second;
  }

  /// Shape from tail to head, endpoints included.
  std::vector<Point> shape(const StreetSegment& s) const {
    if (!s.geometry.empty()) return s.geometry;
    return {node(s.from).pos(), node(s.to).pos()};
  }

  double total_length() const {
    double sum = 0;
    for (const auto& [id, s] : segments) sum += s.length;
    return sum;
  }

  friend bool operator==(const StreetNetwork&, const StreetNetwork&) = default;
};

/// Compass bearing of from->to: 0 = grid north, 90 = east.
inline double segment_bearing(const Point& from, const Point& to) {
  const double dx = to.x - from.x, dy = to.y - from.y;
  if (dx == 0 && dy == 0) throw InvalidInputError("bearing of coincident points is undefined");
  double deg = std::atan2(dx, dy) * 180.0 / std::numbers::pi;
  if (deg < 0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

namespace detail {

// Bearing of a shape from its endpoints; closed loops fall back to the
// direction towards the shape's halfway point.
inline double shape_bearing(const std::vector<Point>& shape) {
  if (!(shape.front() == shape.back())) return segment_bearing(shape.front(), shape.back());
  return segment_bearing(shape.front(), point_along(shape, 0.5));
}

inline void finish_segment(StreetSegment& s, std::vector<Point> shape) {
  s.length = polyline_length(shape);
  s.bearing = s.length > 0 ? shape_bearing(shape) : 0.0;
  if (shape.size() > 2) s.geometry = std::move(shape);
  else s.geometry.clear();
}

inline bool near(const Point& a, const Point& b) { return std::fabs(a.x - b.x) <= 1e-9 && std::fabs(a.y - b.y) <= 1e-9; }

}  // namespace detail

/// Reads the canonical JSON Lines street format. Edges may precede the nodes
/// they reference. Two-way edges become `id` and `id:r`.
inline StreetNetwork load_network(std::istream& in) {
  using nlohmann::json;
  struct PendingEdge {
    std::size_t line;
    StreetSegment seg;
    bool oneway;
    std::vector<Point> geometry;
  };
  StreetNetwork net;
  std::vector<PendingEdge> edges;
  std::string text;
  std::size_t line_no = 0;

  auto get_string = [](const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ParseError(line, std::string("missing string field '") + key + "'");
    return it->get<std::string>();
  };
  auto get_number = [](const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw ParseError(line, std::string("missing numeric field '") + key + "'");
    return it->get<double>();
  };

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_no, "record is not a JSON object");
    const std::string type = get_string(rec, "type", line_no);
    if (type == "node") {
      StreetNode n{get_string(rec, "id", line_no), get_number(rec, "x", line_no), get_number(rec, "y", line_no)};
      if (!std::isfinite(n.x) || !std::isfinite(n.y)) throw ParseError(line_no, "non-finite node coordinate");
      const std::string id = n.id;
      if (!net.nodes.emplace(id, std::move(n)).second) throw ParseError(line_no, "duplicate node id '" + id + "'");
    } else if (type == "edge") {
      PendingEdge e{line_no, {}, true, {}};
      e.seg.id = get_string(rec, "id", line_no);
      e.seg.from = get_string(rec, "from", line_no);
      e.seg.to = get_string(rec, "to", line_no);
      e.seg.road_class = parse_road_class(get_string(rec, "class", line_no));
      auto ow = rec.find("oneway");
      if (ow == rec.end() || !ow->is_boolean()) throw ParseError(line_no, "missing boolean field 'oneway'");
      e.oneway = ow->get<bool>();
      if (auto it = rec.find("lanes"); it != rec.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<std::int64_t>() < 1) throw ParseError(line_no, "lanes must be a positive integer");
        e.seg.lanes = static_cast<int>(it->get<std::int64_t>());
      }
      if (auto it = rec.find("maxspeed"); it != rec.end() && !it->is_null()) {
        if (!it->is_number() || !(it->get<double>() > 0)) throw ParseError(line_no, "maxspeed must be a positive number");
        e.seg.maxspeed = it->get<double>();
      }
      if (auto it = rec.find("geometry"); it != rec.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError(line_no, "geometry must be an array of [x,y]");
        for (const auto& pt : *it) {
          if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
            throw ParseError(line_no, "geometry must be an array of [x,y]");
          Point p{pt[0].get<double>(), pt[1].get<double>()};
          if (!is_finite(p)) throw ParseError(line_no, "non-finite geometry coordinate");
          e.geometry.push_back(p);
        }
      }
      edges.push_back(std::move(e));
    } else {
      throw ParseError(line_no, "unknown record type '" + type + "'");
    }
  }

  for (auto& e : edges) {
    for (const auto* end : {&e.seg.from, &e.seg.to})
      if (!net.nodes.count(*end))
        throw IntegrityError("line " + std::to_string(e.line) + ": edge '" + e.seg.id + "' references missing node '" +
                             *end + "'");
    // Geometry may list only shape points or the whole polyline.
    std::vector<Point> shape = std::move(e.geometry);
    const Point a = net.nodes.at(e.seg.from).pos(), b = net.nodes.at(e.seg.to).pos();
    if (shape.empty() || !detail::near(shape.front(), a)) shape.insert(shape.begin(), a);
    else shape.front() = a;
    if (shape.size() < 2 || !detail::near(shape.back(), b)) shape.push_back(b);
    else shape.back() = b;

    StreetSegment fwd = std::move(e.seg);
    fwd.source_edge = fwd.id;
    detail::finish_segment(fwd, shape);
    if (!(fwd.length > 0)) throw ParseError(e.line, "zero-length edge '" + fwd.id + "'");
    std::optional<StreetSegment> rev;
    if (!e.oneway) {
      rev = fwd;
      rev->id = fwd.id + ":r";
      std::swap(rev->from, rev->to);
      rev->reversed = true;
      std::reverse(shape.begin(), shape.end());
      detail::finish_segment(*rev, shape);
    }
    const std::string fid = fwd.id;
    if (!net.segments.emplace(fid, std::move(fwd)).second)
      throw ParseError(e.line, "duplicate edge id '" + fid + "'");
    if (rev) {
      const std::string rid = rev->id;
      if (!net.segments.emplace(rid, std::move(*rev)).second)
        throw ParseError(e.line, "duplicate edge id '" + rid + "'");
    }
  }
  return net;
}

/// Writes every directed segment as a one-way edge record; nodes first,
/// both sorted by id. Output reloads into an equal network.
inline void write_network(const StreetNetwork& net, std::ostream& out) {
  using nlohmann::json;
  for (const auto& [id, n] : net.nodes) {
    json j = {{"type", "node"}, {"id", n.id}, {"x", n.x}, {"y", n.y}};
    out << j.dump() << '\n';
  }
  for (const auto& [id, s] : net.segments) {
    json j = {{"type", "edge"}, {"id", s.id}, {"from", s.from}, {"to", s.to}, {"class", to_string(s.road_class)},
              {"lanes", s.lanes}, {"oneway", true}};
    if (s.maxspeed) j["maxspeed"] = *s.maxspeed;
    if (!s.geometry.empty()) {
      json g = json::array();
      for (const auto& p : s.geometry) g.push_back({p.x, p.y});
      j["geometry"] = std::move(g);
    }
    out << j.dump() << '\n';
  }
}

/// Keeps segments whose class is in `classes`. Nodes that lose their last
/// incident segment are dropped; nodes that never had one are kept.
inline StreetNetwork filter_by_class(const StreetNetwork& net, const std::set<RoadClass>& classes) {
  StreetNetwork out;
  std::set<std::string> had_segment, keeps_segment;
  for (const auto& [id, s] : net.segments) {
    had_segment.insert(s.from);
    had_segment.insert(s.to);
    if (!classes.count(s.road_class)) continue;
    keeps_segment.insert(s.from);
    keeps_segment.insert(s.to);
    out.segments.emplace(id, s);
  }
  for (const auto& [id, n] : net.nodes)
    if (keeps_segment.count(id) || !had_segment.count(id)) out.nodes.emplace(id, n);
  return out;
}

namespace detail {

struct SplitPoint {
  std::size_t leg;  // shape leg index the point lies on
  double t;         // parameter along the leg, in (0,1]; 1 means the leg's end vertex
  Point p;
};

inline bool on_grid_line(double v, double origin, double edge) {
  const double q = std::floor((v - origin) / edge);
  for (double k : {q - 1, q, q + 1})
    if (origin + k * edge == v) return true;
  return false;
}

// Points where the shape crosses or touches a grid line strictly between its
// two ends, in order along the shape.
inline std::vector<SplitPoint> border_points(const std::vector<Point>& shape, const GridConfig& cfg, int level) {
  const double edge = cfg.edge_length(level);
  std::vector<SplitPoint> out;
  auto push = [&](SplitPoint sp) {
    if (sp.p == shape.front() || sp.p == shape.back()) return;
    if (!out.empty() && (out.back().p == sp.p || distance(out.back().p, sp.p) < 1e-9)) return;
    out.push_back(sp);
  };
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) {
    const Point a = shape[i], b = shape[i + 1];
    std::vector<SplitPoint> leg;
    auto scan = [&](double av, double bv, double origin, bool vertical_lines) {
      if (av == bv) return;
      const double lo = std::min(av, bv), hi = std::max(av, bv);
      auto k = static_cast<std::int64_t>(std::floor((lo - origin) / edge));
      for (;; ++k) {
        const double line = origin + static_cast<double>(k) * edge;
        if (line <= lo) continue;
        if (line >= hi) break;
        const double t = (line - av) / (bv - av);
        Point p = vertical_lines ? Point{line, a.y + t * (b.y - a.y)} : Point{a.x + t * (b.x - a.x), line};
        leg.push_back({i, t, p});
      }
    };
    scan(a.x, b.x, cfg.origin_x, true);
    scan(a.y, b.y, cfg.origin_y, false);
    std::sort(leg.begin(), leg.end(), [](const SplitPoint& l, const SplitPoint& r) { return l.t < r.t; });
    // Corner crossings show up once per axis; keep the exact corner point.
    for (std::size_t j = 0; j < leg.size(); ++j) {
      if (j + 1 < leg.size() && std::fabs(leg[j + 1].t - leg[j].t) < 1e-12) {
        SplitPoint corner = leg[j];
        corner.p = {on_grid_line(leg[j].p.x, cfg.origin_x, edge) ? leg[j].p.x : leg[j + 1].p.x,
                    on_grid_line(leg[j].p.y, cfg.origin_y, edge) ? leg[j].p.y : leg[j + 1].p.y};
        push(corner);
        ++j;
      } else {
        push(leg[j]);
      }
    }
    if (i + 2 < shape.size() &&
        (on_grid_line(b.x, cfg.origin_x, edge) || on_grid_line(b.y, cfg.origin_y, edge)))
      push({i, 1.0, b});
  }
  return out;
}

}  // namespace detail

/// Number of grid borders crossed or touched strictly inside the segment's shape.
inline std::size_t border_crossings(const StreetNetwork& net, const StreetSegment& s, const GridConfig& cfg,
                                    int level) {
  return detail::border_points(net.shape(s), cfg, level).size();
}

/// Splits every segment at each point where its shape meets a cell border at
/// `level`. Inserted nodes are named "split/{edge}/{k}", k counted from 1
/// along the edge record's own direction, and are shared by both directions
/// of a two-way street. Pieces are named "{segment}#{k}".
inline StreetNetwork normalize(const StreetNetwork& net, const GridConfig& cfg, int level) {
  cfg.validate();
  StreetNetwork out;
  out.nodes = net.nodes;
  for (const auto& [id, n] : net.nodes) (void)cell_of_point(n.pos(), level, cfg);

  for (const auto& [id, seg] : net.segments) {
    std::vector<Point> shape = net.shape(seg);
    // Work in the edge record's orientation so both directions split identically.
    if (seg.reversed) std::reverse(shape.begin(), shape.end());
    const auto splits = detail::border_points(shape, cfg, level);
    if (splits.empty()) {
      out.segments.emplace(id, seg);
      continue;
    }
    std::vector<std::string> node_ids;
    std::vector<std::vector<Point>> pieces(1, std::vector<Point>{shape.front()});
    std::size_t next_vertex = 1;
    for (std::size_t k = 0; k < splits.size(); ++k) {
      const auto& sp = splits[k];
      for (; next_vertex <= sp.leg; ++next_vertex) pieces.back().push_back(shape[next_vertex]);
      if (sp.t >= 1.0) ++next_vertex;  // split is the vertex itself
      pieces.back().push_back(sp.p);
      pieces.push_back({sp.p});
      std::string nid = "split/" + seg.source_edge + "/" + std::to_string(k + 1);
      auto [it, inserted] = out.nodes.emplace(nid, StreetNode{nid, sp.p.x, sp.p.y});
      if (!inserted && !(it->second.pos() == sp.p))
        throw IntegrityError("split node id '" + nid + "' collides with an existing node");
      node_ids.push_back(nid);
    }
    for (; next_vertex < shape.size(); ++next_vertex) pieces.back().push_back(shape[next_vertex]);

    if (seg.reversed) {
      std::reverse(pieces.begin(), pieces.end());
      for (auto& p : pieces) std::reverse(p.begin(), p.end());
      std::reverse(node_ids.begin(), node_ids.end());
    }
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      StreetSegment piece = seg;
      piece.id = seg.id + "#" + std::to_string(k);
      piece.from = k == 0 ? seg.from : node_ids[k - 1];
      piece.to = k + 1 == pieces.size() ? seg.to : node_ids[k];
      detail::finish_segment(piece, std::move(pieces[k]));
      const std::string pid = piece.id;
      if (!out.segments.emplace(pid, std::move(piece)).second)
        throw IntegrityError("piece id '" + pid + "' collides with an existing segment");
    }
  }
  return out;
}

/// Nodes inside one cell and the segments leaving them.
struct CellSubnetwork {
  CellId cell;
  std::vector<StreetNode> nodes;        // sorted by id
  std::vector<StreetSegment> segments;  // tail inside the cell, sorted by id
};

/// A network bound to a grid level, with node-to-cell membership and per-cell
/// buckets precomputed. Pointers into the owned network stay valid across moves.
class PartitionedNetwork {
 public:
  struct Bucket {
    std::vector<const StreetNode*> nodes;                     // sorted by id
    std::vector<const StreetSegment*> outgoing;               // tail in cell, sorted by id
    std::vector<const StreetSegment*> incoming_crossings;     // head in cell, tail elsewhere
  };

  PartitionedNetwork(StreetNetwork net, GridConfig cfg, int level)
      : net_(std::move(net)), cfg_(std::move(cfg)), level_(level) {
    cfg_.validate();
    node_cell_.reserve(net_.nodes.size());
    for (const auto& [id, n] : net_.nodes) {
      const CellId c = cell_of_point(n.pos(), level_, cfg_);
      node_cell_.emplace(id, c);
      buckets_[c].nodes.push_back(&n);
    }
    for (const auto& [id, s] : net_.segments) {
      const CellId& tail = cell_of(s.from);
      const CellId& head = cell_of(s.to);
      if (std::max(std::llabs(tail.row - head.row), std::llabs(tail.col - head.col)) > 1)
        throw IntegrityError("segment '" + id + "' joins non-adjacent cells " + tail.str() + " and " + head.str() +
                             "; normalize the network at this level first");
      buckets_[tail].outgoing.push_back(&s);
      if (tail != head) buckets_[head].incoming_crossings.push_back(&s);
    }
  }

  PartitionedNetwork(const PartitionedNetwork&) = delete;
  PartitionedNetwork& operator=(const PartitionedNetwork&) = delete;
  PartitionedNetwork(PartitionedNetwork&&) = default;
  PartitionedNetwork& operator=(PartitionedNetwork&&) = default;

  const StreetNetwork& network() const { return net_; }
  const GridConfig& grid() const { return cfg_; }
  int level() const { return level_; }

  const CellId& cell_of(const std::string& node_id) const {
    auto it = node_cell_.find(node_id);
    if (it == node_cell_.end()) throw IntegrityError("unknown node '" + node_id + "'");
    return it->second;
  }

  /// Cells holding at least one node, ascending.
  std::vector<CellId> cells() const {
    std::vector<CellId> out;
    out.reserve(buckets_.size());
    for (const auto& [c, b] : buckets_)
      if (!b.nodes.empty()) out.push_back(c);
    return out;
  }

  const Bucket& bucket(const CellId& c) const {
    static const Bucket kEmpty;
    auto it = buckets_.find(c);
    return it == buckets_.end() ? kEmpty : it->second;
  }

  CellSubnetwork subnetwork(const CellId& c) const {
    CellSubnetwork sub{c, {}, {}};
    const Bucket& b = bucket(c);
    for (const auto* n : b.nodes) sub.nodes.push_back(*n);
    for (const auto* s : b.outgoing) sub.segments.push_back(*s);
    return sub;
  }

 private:
  StreetNetwork net_;
  GridConfig cfg_;
  int level_;
  std::unordered_map<std::string, CellId> node_cell_;
  std::map<CellId, Bucket> buckets_;
};

/// One-off extraction without building a partition.
inline CellSubnetwork subnetwork(const StreetNetwork& net, const CellId& cell, const GridConfig& cfg) {
  CellSubnetwork sub{cell, {}, {}};
  for (const auto& [id, n] : net.nodes)
    if (cell_of_point(n.pos(), cell.level, cfg) == cell) sub.nodes.push_back(n);
  for (const auto& [id, s] : net.segments)
    if (cell_of_point(net.node(s.from).pos(), cell.level, cfg) == cell) sub.segments.push_back(s);
  return sub;
}

}  // namespace gridskg
