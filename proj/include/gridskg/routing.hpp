#pragma once

// A* over the simplified network between two cells.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gridskg/error.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/orientation.hpp"
#include "gridskg/simplify.hpp"

namespace gridskg {

enum class CostModel { euclidean, orientation_raw, orientation_inverse };

inline std::string_view to_string(CostModel m) {
  switch (m) {
    case CostModel::euclidean: return "euclidean";
    case CostModel::orientation_raw: return "orientation-raw";
    case CostModel::orientation_inverse: return "orientation-inverse";
  }
  return "euclidean";
}

inline std::optional<CostModel> parse_cost_model(std::string_view s) {
  for (CostModel m : {CostModel::euclidean, CostModel::orientation_raw, CostModel::orientation_inverse})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// Per-cell indicators; absent cells read as zero.
class OrientationIndex {
 public:
  OrientationIndex() = default;
  explicit OrientationIndex(std::map<CellId, OrientationVector> cells) : cells_(std::move(cells)) {}

  const OrientationVector& at(const CellId& c) const {
    static const OrientationVector kZero;
    auto it = cells_.find(c);
    return it == cells_.end() ? kZero : it->second;
  }
  void set(const CellId& c, const OrientationVector& v) { cells_[c] = v; }
  std::size_t size() const { return cells_.size(); }

 private:
  std::map<CellId, OrientationVector> cells_;
};

/// Directions of travel from `from` to `to`, in N, S, E, W order.
inline std::vector<Direction> direction_components(const CellId& from, const CellId& to) {
  if (from.level != to.level) throw InvalidInputError("cells " + from.str() + " and " + to.str() + " differ in level");
  std::vector<Direction> out;
  if (to.row > from.row) out.push_back(Direction::N);
  if (to.row < from.row) out.push_back(Direction::S);
  if (to.col > from.col) out.push_back(Direction::E);
  if (to.col < from.col) out.push_back(Direction::W);
  return out;
}

/// raw: indicators along the travel directions summed over the bounding
/// range of the two cells. inverse: Chebyshev distance in meters, discounted
/// by the mean of that sum per cell.
inline double orientation_cost(const OrientationIndex& idx, const CellId& from, const CellId& to, CostModel mode,
                               const GridConfig& cfg) {
  const auto dirs = direction_components(from, to);
  if (dirs.empty()) return 0;
  const CellRange r = CellRange::spanning(from, to);
  double raw = 0;
  for (auto row = r.row_min; row <= r.row_max; ++row)
    for (auto col = r.col_min; col <= r.col_max; ++col) {
      const auto& o = idx.at(CellId{from.level, row, col});
      for (Direction d : dirs) raw += o.component(d);
    }
  if (mode == CostModel::orientation_raw) return raw;
  if (mode == CostModel::orientation_inverse) {
    const auto cheb = std::max(std::llabs(to.row - from.row), std::llabs(to.col - from.col));
    return static_cast<double>(cheb) * cfg.edge_length(from.level) / (1.0 + raw / static_cast<double>(r.cell_count()));
  }
  throw InvalidInputError("orientation_cost needs an orientation cost model");
}

struct RouteNode {
  std::string id;
  double x = 0;
  double y = 0;

  friend bool operator==(const RouteNode&, const RouteNode&) = default;
};

struct Route {
  std::vector<RouteNode> nodes;
  std::vector<CellLink> links;
  std::vector<CellId> cells;  // node cells, consecutive repeats removed
  double total_weight = 0;    // meters
  double total_cost = 0;      // cost-model units
  std::size_t explored_cells = 0;

  friend bool operator==(const Route& a, const Route& b) {
    return a.nodes == b.nodes && a.links == b.links && a.cells == b.cells && a.total_weight == b.total_weight &&
           a.total_cost == b.total_cost;
  }
};

namespace detail {

inline Route make_route(const SimplifiedNetwork& sn, std::size_t start, const std::vector<std::size_t>& link_path) {
  Route r;
  auto push_node = [&](std::size_t i) {
    const auto& p = sn.node_pos(i);
    r.nodes.push_back({sn.node_id(i), p.x, p.y});
    if (r.cells.empty() || r.cells.back() != sn.node_cell(i)) r.cells.push_back(sn.node_cell(i));
  };
  push_node(start);
  for (std::size_t li : link_path) {
    const CellLink& l = sn.links()[li];
    push_node(sn.index_of(l.to));
    r.links.push_back(l);
    r.total_weight += l.weight;
  }
  return r;
}

}  // namespace detail

/// Best route from any terminal node of `origin` to any terminal node of
/// `target`. Ties go to the smaller heuristic, then the smaller node id.
/// The euclidean model is exact; the orientation models rank nodes by
/// origin->cell plus cell->target orientation cost.
inline Route astar(const SimplifiedNetwork& sn, const CellId& origin, const CellId& target, CostModel cost,
                   const OrientationIndex* idx = nullptr, const GridConfig& cfg = {}) {
  if (cost != CostModel::euclidean && !idx) throw InvalidInputError("orientation cost model needs an orientation index");
  if (origin.level != target.level) throw InvalidInputError("origin and target cells differ in level");
  const auto sources = sn.nodes_in(origin);
  const auto targets = sn.nodes_in(target);
  if (sources.empty()) throw NoEndpointError("no terminal node in origin cell " + origin.str());
  if (targets.empty()) throw NoEndpointError("no terminal node in target cell " + target.str());

  if (origin == target) {
    Route r = detail::make_route(sn, sources.front(), {});
    r.explored_cells = 1;
    return r;
  }

  const std::size_t n = sn.node_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> via(n, kNone);  // link reaching the node
  std::vector<char> closed(n, 0);

  std::unordered_map<CellId, std::pair<double, double>, CellIdHash> cell_fh;
  auto orient_fh = [&](std::size_t i) {
    const CellId& c = sn.node_cell(i);
    auto it = cell_fh.find(c);
    if (it == cell_fh.end()) {
      const double h = orientation_cost(*idx, c, target, cost, cfg);
      it = cell_fh.emplace(c, std::pair{orientation_cost(*idx, origin, c, cost, cfg) + h, h}).first;
    }
    return it->second;
  };
  auto euclid_h = [&](std::size_t i) {
    double best = kInf;
    const Point& p = sn.node_pos(i);
    for (std::size_t t : targets) best = std::min(best, distance(p, sn.node_pos(t)));
    return best;
  };
  std::vector<double> h_cache(n, -1);
  auto heuristic = [&](std::size_t i) {
    if (h_cache[i] < 0) h_cache[i] = euclid_h(i);
    return h_cache[i];
  };

  using Item = std::tuple<double, double, std::size_t>;  // (f, h, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  auto push = [&](std::size_t i) {
    if (cost == CostModel::euclidean) {
      const double h = heuristic(i);
      open.push({g[i] + h, h, i});
    } else {
      const auto [f, h] = orient_fh(i);
      open.push({f, h, i});
    }
  };
  for (std::size_t s : sources) {
    g[s] = 0;
    push(s);
  }

  std::set<CellId> explored;
  std::optional<std::size_t> reached;
  while (!open.empty()) {
    const auto [f, h, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    explored.insert(sn.node_cell(u));
    if (sn.node_cell(u) == target) {
      reached = u;
      break;
    }
    for (const auto& arc : sn.arcs_from(u)) {
      if (closed[arc.to]) continue;
      const double cand = g[u] + arc.weight;
      if (cost == CostModel::euclidean) {
        if (cand < g[arc.to]) {
          g[arc.to] = cand;
          via[arc.to] = arc.link;
          push(arc.to);
        }
      } else if (g[arc.to] == kInf) {
        g[arc.to] = cand;
        via[arc.to] = arc.link;
        push(arc.to);
      }
    }
  }
  if (!reached)
    throw UnreachableError("cell " + target.str() + " is unreachable from " + origin.str(), explored.size());

  std::vector<std::size_t> path;
  std::size_t cur = *reached;
  while (via[cur] != kNone) {
    path.push_back(via[cur]);
    cur = sn.index_of(sn.links()[via[cur]].from);
  }
  std::reverse(path.begin(), path.end());
  Route r = detail::make_route(sn, cur, path);
  r.explored_cells = explored.size();
  if (cost == CostModel::euclidean) {
    r.total_cost = r.total_weight;
  } else {
    for (std::size_t i = 0; i + 1 < r.cells.size(); ++i)
      r.total_cost += orientation_cost(*idx, r.cells[i], r.cells[i + 1], cost, cfg);
  }
  return r;
}

/// FeatureCollection: the route as a LineString plus one Polygon per
/// traversed cell; a route without links is a single Point.
inline std::string route_to_geojson(const Route& r, const GridConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json features = ordered_json::array();
  if (r.links.empty()) {
    const auto& n = r.nodes.front();
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {n.x, n.y}}}},
                        {"properties", {{"node", n.id}, {"cell", r.cells.front().str()}, {"total_weight", 0.0}}}});
  } else {
    ordered_json coords = ordered_json::array();
    for (const auto& n : r.nodes) coords.push_back({n.x, n.y});
    ordered_json types = ordered_json::array(), weights = ordered_json::array();
    for (const auto& l : r.links) {
      types.push_back(std::string(to_string(l.type)));
      weights.push_back(l.weight);
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties",
                         {{"total_weight", r.total_weight},
                          {"total_cost", r.total_cost},
                          {"link_types", types},
                          {"link_weights", weights}}}});
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
      const auto b = cell_bounds(r.cells[i], cfg);
      ordered_json ring = {{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y},
                           {b.min_x, b.min_y}};
      features.push_back({{"type", "Feature"},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", ordered_json::array({ring})}}},
                          {"properties", {{"cell", r.cells[i].str()}, {"order", i}}}});
    }
  }
  ordered_json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

}  // namespace gridskg
