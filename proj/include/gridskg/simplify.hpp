#pragma once

// Terminal-node simplification: every cell is replaced by a "puzzle piece"
// of links between the nodes where streets enter and leave it.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridskg/error.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/streetnet.hpp"

namespace gridskg {

enum class LinkType { intra, cross_N, cross_S, cross_E, cross_W };

inline std::string_view to_string(LinkType t) {
  switch (t) {
    case LinkType::intra: return "intra";
    case LinkType::cross_N: return "cross-N";
    case LinkType::cross_S: return "cross-S";
    case LinkType::cross_E: return "cross-E";
    case LinkType::cross_W: return "cross-W";
  }
  return "intra";
}

inline std::optional<LinkType> parse_link_type(std::string_view s) {
  for (LinkType t : {LinkType::intra, LinkType::cross_N, LinkType::cross_S, LinkType::cross_E, LinkType::cross_W})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline LinkType cross_link_type(Direction d) {
  switch (d) {
    case Direction::N: return LinkType::cross_N;
    case Direction::S: return LinkType::cross_S;
    case Direction::E: return LinkType::cross_E;
    case Direction::W: return LinkType::cross_W;
  }
  return LinkType::cross_N;
}

/// Border crossed going from `tail` to an adjacent `head` cell. A crossing
/// through a cell corner reports its north/south component.
inline Direction crossing_direction(const CellId& tail, const CellId& head) {
  if (head.row > tail.row) return Direction::N;
  if (head.row < tail.row) return Direction::S;
  if (head.col > tail.col) return Direction::E;
  if (head.col < tail.col) return Direction::W;
  throw InvalidInputError("cells " + tail.str() + " and " + head.str() + " are identical");
}

/// Segment whose tail is inside the cell and whose head is not.
struct TerminalEdge {
  std::string segment_id;
  std::string tail;
  std::string head;
  Direction direction = Direction::N;
  double length = 0;

  friend bool operator==(const TerminalEdge&, const TerminalEdge&) = default;
};

struct TerminalNode {
  std::string id;
  CellId cell;
  bool exit = false;   // tail of a terminal edge of its cell
  bool entry = false;  // head of a neighbouring cell's terminal edge
  double x = 0;
  double y = 0;

  Point pos() const { return {x, y}; }
  friend bool operator==(const TerminalNode&, const TerminalNode&) = default;
};

struct CellLink {
  std::string from;
  std::string to;
  LinkType type = LinkType::intra;
  double weight = 0;  // meters
  CellId via_cell;

  auto key() const { return std::tie(via_cell, from, to); }
  friend bool operator==(const CellLink&, const CellLink&) = default;
};

inline std::vector<TerminalEdge> terminal_edges(const PartitionedNetwork& pn, const CellId& cell) {
  std::vector<TerminalEdge> out;
  for (const StreetSegment* s : pn.bucket(cell).outgoing) {
    const CellId& head = pn.cell_of(s->to);
    if (head == cell) continue;
    out.push_back({s->id, s->from, s->to, crossing_direction(cell, head), s->length});
  }
  return out;
}

inline std::vector<TerminalNode> terminal_nodes(const PartitionedNetwork& pn, const CellId& cell) {
  std::map<std::string, TerminalNode> found;
  auto touch = [&](const std::string& id) -> TerminalNode& {
    auto [it, inserted] = found.try_emplace(id);
    if (inserted) {
      const StreetNode& n = pn.network().node(id);
      it->second = TerminalNode{id, cell, false, false, n.x, n.y};
    }
    return it->second;
  };
  const auto& b = pn.bucket(cell);
  for (const StreetSegment* s : b.outgoing)
    if (pn.cell_of(s->to) != cell) touch(s->from).exit = true;
  for (const StreetSegment* s : b.incoming_crossings) touch(s->to).entry = true;
  std::vector<TerminalNode> out;
  out.reserve(found.size());
  for (auto& [id, t] : found) out.push_back(std::move(t));
  return out;
}

/// One link per (entry, exit) pair connected inside the cell, weighted by
/// the shortest in-cell path. An entry that is also an exit gets a 0 link.
inline std::vector<CellLink> intra_cell_links(const PartitionedNetwork& pn, const CellId& cell) {
  const auto terminals = terminal_nodes(pn, cell);
  if (terminals.empty()) return {};
  const auto& b = pn.bucket(cell);
  std::unordered_map<std::string_view, std::size_t> local;
  local.reserve(b.nodes.size());
  for (std::size_t i = 0; i < b.nodes.size(); ++i) local.emplace(b.nodes[i]->id, i);

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(b.nodes.size());
  for (const StreetSegment* s : b.outgoing) {
    auto head = local.find(s->to);
    if (head == local.end()) continue;  // terminal edge
    adj[local.at(s->from)].push_back({head->second, s->length});
  }

  std::vector<CellLink> out;
  std::vector<double> dist(b.nodes.size());
  using Item = std::pair<double, std::size_t>;
  for (const auto& src : terminals) {
    if (!src.entry) continue;
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    const std::size_t s = local.at(src.id);
    dist[s] = 0;
    open.push({0, s});
    while (!open.empty()) {
      auto [d, u] = open.top();
      open.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : adj[u])
        if (d + w < dist[v]) {
          dist[v] = d + w;
          open.push({dist[v], v});
        }
    }
    for (const auto& dst : terminals) {
      if (!dst.exit) continue;
      const double d = dist[local.at(dst.id)];
      if (d < std::numeric_limits<double>::infinity()) out.push_back({src.id, dst.id, LinkType::intra, d, cell});
    }
  }
  return out;
}

/// One link per terminal edge of the cell.
inline std::vector<CellLink> cross_links(const PartitionedNetwork& pn, const CellId& cell) {
  std::vector<CellLink> out;
  for (const auto& e : terminal_edges(pn, cell))
    out.push_back({e.tail, e.head, cross_link_type(e.direction), e.length, cell});
  return out;
}

/// Terminal nodes and links of a set of cells. Immutable once built; carries
/// a compact adjacency used by the router.
class SimplifiedNetwork {
 public:
  SimplifiedNetwork() = default;

  /// Links sharing (via_cell, from, to) are parallel streets; the shortest is kept.
  SimplifiedNetwork(std::map<std::string, TerminalNode> nodes, std::vector<CellLink> links)
      : nodes_(std::move(nodes)) {
    std::sort(links.begin(), links.end(), [](const CellLink& a, const CellLink& b) {
      return a.key() < b.key() || (a.key() == b.key() && a.weight < b.weight);
    });
    for (auto& l : links) {
      if (!links_.empty() && links_.back().key() == l.key()) {
        if (links_.back().type != l.type)
          throw IntegrityError("conflicting link types for " + l.from + " -> " + l.to + " via " + l.via_cell.str());
        continue;
      }
      if (!(l.weight >= 0)) throw IntegrityError("negative link weight " + l.from + " -> " + l.to);
      for (const auto* end : {&l.from, &l.to})
        if (!nodes_.count(*end)) throw IntegrityError("link endpoint '" + *end + "' is not a terminal node");
      links_.push_back(std::move(l));
    }
    index();
  }

  const std::map<std::string, TerminalNode>& nodes() const { return nodes_; }
  const std::vector<CellLink>& links() const { return links_; }

  /// Links owned by `cell`, as positions into links().
  std::span<const std::size_t> links_of(const CellId& cell) const {
    auto it = cell_links_.find(cell);
    if (it == cell_links_.end()) return {};
    return it->second;
  }

  /// Cells that own at least one link or terminal node, ascending.
  std::vector<CellId> cells() const {
    std::set<CellId> out;
    for (const auto& [c, l] : cell_links_) out.insert(c);
    for (const auto& [c, n] : cell_nodes_) out.insert(c);
    return {out.begin(), out.end()};
  }

  // Dense view: node i is the i-th node id in ascending order.
  std::size_t node_count() const { return ids_.size(); }
  const std::string& node_id(std::size_t i) const { return ids_[i]; }
  const Point& node_pos(std::size_t i) const { return pos_[i]; }
  const CellId& node_cell(std::size_t i) const { return cell_[i]; }
  std::size_t index_of(const std::string& id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) throw IntegrityError("unknown terminal node '" + id + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }
  /// Node indexes located in `cell`, ascending.
  std::span<const std::size_t> nodes_in(const CellId& cell) const {
    auto it = cell_nodes_.find(cell);
    if (it == cell_nodes_.end()) return {};
    return it->second;
  }
  struct Arc {
    std::size_t to;
    std::size_t link;  // position in links()
    double weight;
  };
  std::span<const Arc> arcs_from(std::size_t node) const {
    return std::span<const Arc>(arcs_).subspan(offsets_[node], offsets_[node + 1] - offsets_[node]);
  }

  friend bool operator==(const SimplifiedNetwork& a, const SimplifiedNetwork& b) {
    return a.nodes_ == b.nodes_ && a.links_ == b.links_;
  }

 private:
  void index() {
    for (const auto& [id, n] : nodes_) {
      ids_.push_back(id);
      pos_.push_back(n.pos());
      cell_.push_back(n.cell);
      cell_nodes_[n.cell].push_back(ids_.size() - 1);
    }
    std::vector<std::size_t> degree(ids_.size() + 1, 0);
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    ends.reserve(links_.size());
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const auto f = index_of(links_[i].from), t = index_of(links_[i].to);
      ends.push_back({f, t});
      ++degree[f + 1];
      cell_links_[links_[i].via_cell].push_back(i);
    }
    offsets_.assign(ids_.size() + 1, 0);
    for (std::size_t i = 0; i < ids_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i + 1];
    arcs_.resize(links_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < links_.size(); ++i)
      arcs_[fill[ends[i].first]++] = Arc{ends[i].second, i, links_[i].weight};
  }

  std::map<std::string, TerminalNode> nodes_;
  std::vector<CellLink> links_;  // sorted by (via_cell, from, to)
  std::map<CellId, std::vector<std::size_t>> cell_links_;
  std::map<CellId, std::vector<std::size_t>> cell_nodes_;
  std::vector<std::string> ids_;
  std::vector<Point> pos_;
  std::vector<CellId> cell_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Arc> arcs_;
};

namespace detail {

struct CellPiece {
  std::vector<TerminalNode> nodes;
  std::vector<CellLink> links;
};

inline CellPiece build_piece(const PartitionedNetwork& pn, const CellId& cell, const std::set<CellId>& cells) {
  CellPiece piece{terminal_nodes(pn, cell), intra_cell_links(pn, cell)};
  for (auto& l : cross_links(pn, cell))
    if (cells.count(pn.cell_of(l.to))) piece.links.push_back(std::move(l));
  return piece;
}

}  // namespace detail

/// Joins the puzzle pieces of `cells`. Cross links leaving the set are
/// dropped. `threads` > 1 builds pieces concurrently; the result is identical.
inline SimplifiedNetwork build_simplified_network(const PartitionedNetwork& pn, const std::set<CellId>& cells,
                                                  unsigned threads = 1) {
  std::vector<CellId> order(cells.begin(), cells.end());
  std::vector<detail::CellPiece> pieces(order.size());
  if (threads <= 1 || order.size() < 2) {
    for (std::size_t i = 0; i < order.size(); ++i) pieces[i] = detail::build_piece(pn, order[i], cells);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < order.size(); i += threads) pieces[i] = detail::build_piece(pn, order[i], cells);
      });
  }
  std::map<std::string, TerminalNode> nodes;
  std::vector<CellLink> links;
  for (auto& p : pieces) {
    for (auto& n : p.nodes) {
      const std::string id = n.id;
      nodes.emplace(id, std::move(n));
    }
    std::move(p.links.begin(), p.links.end(), std::back_inserter(links));
  }
  return SimplifiedNetwork(std::move(nodes), std::move(links));
}

/// Every cell that holds a node.
inline SimplifiedNetwork build_simplified_network(const PartitionedNetwork& pn, unsigned threads = 1) {
  const auto cells = pn.cells();
  return build_simplified_network(pn, std::set<CellId>(cells.begin(), cells.end()), threads);
}

/// Drops the cells: their links, their terminal nodes, links entering them,
/// and nodes elsewhere left without any link. Returns a new network.
inline SimplifiedNetwork remove_cells(const SimplifiedNetwork& sn, const std::set<CellId>& cells) {
  if (cells.empty()) return sn;
  std::map<std::string, TerminalNode> nodes;
  for (const auto& [id, n] : sn.nodes())
    if (!cells.count(n.cell)) nodes.emplace(id, n);
  std::set<std::string> linked_before, linked_after;
  std::vector<CellLink> links;
  for (const auto& l : sn.links()) {
    linked_before.insert(l.from);
    linked_before.insert(l.to);
    if (cells.count(l.via_cell) || !nodes.count(l.from) || !nodes.count(l.to)) continue;
    linked_after.insert(l.from);
    linked_after.insert(l.to);
    links.push_back(l);
  }
  for (auto it = nodes.begin(); it != nodes.end();) {
    if (linked_before.count(it->first) && !linked_after.count(it->first)) it = nodes.erase(it);
    else ++it;
  }
  return SimplifiedNetwork(std::move(nodes), std::move(links));
}

}  // namespace gridskg
