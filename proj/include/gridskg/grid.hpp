#pragma once

// Square grid coordinate system: cell identity, level hierarchy and
// row/column range queries. All functions are pure.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridskg/error.hpp"
#include "gridskg/format.hpp"
#include "gridskg/geometry.hpp"

namespace gridskg {

struct GridConfig {
  double origin_x = 0;
  double origin_y = 0;
  double cell_size = 1000;  // level-1 edge length
  int level_factor = 10;    // edge-length multiplier per level
  std::string crs_label;    // metadata only

  void validate() const {
    if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw InvalidInputError("grid origin must be finite");
    if (!(cell_size > 0) || !std::isfinite(cell_size)) throw InvalidInputError("cell_size must be > 0");
    if (level_factor < 2) throw InvalidInputError("level_factor must be >= 2");
  }

  /// Edge length of a cell at `level` (level 1 == cell_size).
  double edge_length(int level) const {
    if (level < 1) throw InvalidInputError("level must be >= 1");
    double edge = cell_size;
    for (int l = 1; l < level; ++l) edge *= level_factor;
    return edge;
  }
};

/// Cell address, canonical text form "L{level}.{row}.{col}".
struct CellId {
  int level = 1;
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend auto operator<=>(const CellId&, const CellId&) = default;

  std::string str() const { return "L" + std::to_string(level) + "." + std::to_string(row) + "." + std::to_string(col); }

  static CellId parse(std::string_view s) {
    auto fail = [&]() -> CellId { throw InvalidInputError("malformed cell id '" + std::string(s) + "'"); };
    if (s.size() < 6 || s.front() != 'L') return fail();
    std::string_view rest = s.substr(1);
    std::int64_t parts[3];
    for (int i = 0; i < 3; ++i) {
      const auto dot = i < 2 ? rest.find('.') : rest.size();
      if (dot == std::string_view::npos || dot == 0) return fail();
      std::string_view tok = rest.substr(0, dot);
      if (!std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) return fail();
      auto v = fmt::parse_int(tok);
      if (!v) return fail();
      parts[i] = *v;
      rest = i < 2 ? rest.substr(dot + 1) : std::string_view{};
    }
    if (parts[0] < 1 || parts[0] > 64) return fail();
    return CellId{static_cast<int>(parts[0]), parts[1], parts[2]};
  }
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(c.row);
    h ^= std::hash<std::int64_t>{}(c.col) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(c.level) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

/// Half-open square [min_x, max_x) x [min_y, max_y).
struct CellBounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool contains(const Point& p) const { return p.x >= min_x && p.x < max_x && p.y >= min_y && p.y < max_y; }
  friend bool operator==(const CellBounds&, const CellBounds&) = default;
};

/// Inclusive row/column rectangle.
struct CellRange {
  std::int64_t row_min = 0, row_max = 0, col_min = 0, col_max = 0;

  void validate() const {
    if (row_min > row_max || col_min > col_max) throw InvalidInputError("empty cell range");
  }
  bool contains(std::int64_t row, std::int64_t col) const {
    return row >= row_min && row <= row_max && col >= col_min && col <= col_max;
  }
  std::int64_t cell_count() const { return (row_max - row_min + 1) * (col_max - col_min + 1); }

  /// Smallest range covering both cells.
  static CellRange spanning(const CellId& a, const CellId& b) {
    return {std::min(a.row, b.row), std::max(a.row, b.row), std::min(a.col, b.col), std::max(a.col, b.col)};
  }
};

enum class Direction { N, S, E, W };

inline char to_char(Direction d) {
  switch (d) {
    case Direction::N: return 'N';
    case Direction::S: return 'S';
    case Direction::E: return 'E';
    case Direction::W: return 'W';
  }
  return '?';
}

inline CellBounds cell_bounds(const CellId& id, const GridConfig& cfg) {
  const double edge = cfg.edge_length(id.level);
  return {cfg.origin_x + static_cast<double>(id.col) * edge, cfg.origin_y + static_cast<double>(id.row) * edge,
          cfg.origin_x + static_cast<double>(id.col + 1) * edge, cfg.origin_y + static_cast<double>(id.row + 1) * edge};
}

inline Point cell_center(const CellId& id, const GridConfig& cfg) {
  const double edge = cfg.edge_length(id.level);
  return {cfg.origin_x + (static_cast<double>(id.col) + 0.5) * edge,
          cfg.origin_y + (static_cast<double>(id.row) + 0.5) * edge};
}

namespace detail {

// floor((v - origin) / edge), nudged so the result agrees bit-for-bit with
// the half-open bounds produced by cell_bounds().
inline std::int64_t grid_index(double v, double origin, double edge) {
  constexpr double kLimit = 9.0e15;
  const double q = std::floor((v - origin) / edge);
  if (!(std::fabs(q) < kLimit)) throw InvalidInputError("coordinate outside representable grid");
  auto i = static_cast<std::int64_t>(q);
  if (v < origin + static_cast<double>(i) * edge) --i;
  else if (v >= origin + static_cast<double>(i + 1) * edge) ++i;
  return i;
}

}  // namespace detail

/// Cell containing `p` at `level`. Points south or west of the grid origin
/// are outside the grid and rejected.
inline CellId cell_of_point(const Point& p, int level, const GridConfig& cfg) {
  if (!is_finite(p)) throw InvalidInputError("non-finite coordinate");
  const double edge = cfg.edge_length(level);
  const auto col = detail::grid_index(p.x, cfg.origin_x, edge);
  const auto row = detail::grid_index(p.y, cfg.origin_y, edge);
  if (row < 0 || col < 0) {
    throw InvalidInputError("point (" + fmt::format_double(p.x) + ", " + fmt::format_double(p.y) +
                            ") lies outside the grid (south or west of origin)");
  }
  return {level, row, col};
}

/// Row-major enumeration of the range.
inline std::vector<CellId> cells_in_range(const CellRange& r, int level) {
  r.validate();
  std::vector<CellId> out;
  out.reserve(static_cast<std::size_t>(r.cell_count()));
  for (auto row = r.row_min; row <= r.row_max; ++row)
    for (auto col = r.col_min; col <= r.col_max; ++col) out.push_back({level, row, col});
  return out;
}

/// N/S/E/W neighbours in that order; neighbours with negative indexes are omitted.
inline std::vector<std::pair<Direction, CellId>> neighbors4(const CellId& id) {
  std::vector<std::pair<Direction, CellId>> out;
  out.push_back({Direction::N, {id.level, id.row + 1, id.col}});
  if (id.row > 0) out.push_back({Direction::S, {id.level, id.row - 1, id.col}});
  out.push_back({Direction::E, {id.level, id.row, id.col + 1}});
  if (id.col > 0) out.push_back({Direction::W, {id.level, id.row, id.col - 1}});
  return out;
}

inline CellId parent_cell(const CellId& id, const GridConfig& cfg) {
  return {id.level + 1, id.row / cfg.level_factor, id.col / cfg.level_factor};
}

/// The level_factor^2 cells one level down that tile `id`, row-major.
inline std::vector<CellId> child_cells(const CellId& id, const GridConfig& cfg) {
  if (id.level < 2) throw InvalidInputError("level-1 cells have no children");
  const std::int64_t f = cfg.level_factor;
  return cells_in_range({id.row * f, id.row * f + f - 1, id.col * f, id.col * f + f - 1}, id.level - 1);
}

/// Cells whose center lies inside the polygon.
inline std::vector<CellId> cells_covering(const Polygon& poly, int level, const GridConfig& cfg) {
  std::vector<Point> ring;
  for (const auto& p : poly) {
    if (!is_finite(p)) throw InvalidInputError("non-finite polygon vertex");
    if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  std::vector<Point> distinct = ring;
  std::sort(distinct.begin(), distinct.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw InvalidInputError("degenerate polygon: fewer than 3 distinct vertices");

  double min_x = ring[0].x, max_x = ring[0].x, min_y = ring[0].y, max_y = ring[0].y;
  for (const auto& p : ring) {
    min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y), max_y = std::max(max_y, p.y);
  }
  const double edge = cfg.edge_length(level);
  const auto col_lo = std::max<std::int64_t>(0, detail::grid_index(min_x, cfg.origin_x, edge));
  const auto col_hi = detail::grid_index(max_x, cfg.origin_x, edge);
  const auto row_lo = std::max<std::int64_t>(0, detail::grid_index(min_y, cfg.origin_y, edge));
  const auto row_hi = detail::grid_index(max_y, cfg.origin_y, edge);

  std::vector<CellId> out;
  for (auto row = row_lo; row <= row_hi; ++row)
    for (auto col = col_lo; col <= col_hi; ++col) {
      CellId id{level, row, col};
      if (point_in_polygon(cell_center(id, cfg), ring)) out.push_back(id);
    }
  return out;
}

}  // namespace gridskg

template <>
struct std::hash<gridskg::CellId> : gridskg::CellIdHash {};
