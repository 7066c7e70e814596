#pragma once

// Network orientation indicator: lane-meters of directed street capacity
// per compass direction, additive over cells.

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <utility>

#include "gridskg/error.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/streetnet.hpp"

namespace gridskg {

struct OrientationVector {
  double east = 0;
  double west = 0;
  double north = 0;
  double south = 0;

  OrientationVector& operator+=(const OrientationVector& o) {
    east += o.east;
    west += o.west;
    north += o.north;
    south += o.south;
    return *this;
  }
  friend OrientationVector operator+(OrientationVector a, const OrientationVector& b) { return a += b; }
  friend bool operator==(const OrientationVector&, const OrientationVector&) = default;

  double component(Direction d) const {
    switch (d) {
      case Direction::N: return north;
      case Direction::S: return south;
      case Direction::E: return east;
      case Direction::W: return west;
    }
    return 0;
  }
};

struct OrientationWeights {
  bool use_speed_factor = false;
  double reference_speed = 50;  // km/h

  void validate() const {
    if (!(reference_speed > 0)) throw InvalidInputError("reference_speed must be > 0");
  }
};

namespace detail {

// (sin, cos) of a compass bearing in degrees, exact on the four axes.
inline std::pair<double, double> sincos_deg(double deg) {
  if (deg == 0) return {0, 1};
  if (deg == 90) return {1, 0};
  if (deg == 180) return {0, -1};
  if (deg == 270) return {-1, 0};
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

}  // namespace detail

/// Capacity weight of a segment: lanes, optionally scaled by maxspeed.
inline double segment_weight(const StreetSegment& s, const OrientationWeights& w) {
  double weight = s.lanes;
  if (w.use_speed_factor && s.maxspeed) weight *= *s.maxspeed / w.reference_speed;
  return weight;
}

/// Splits L*W along the bearing into its east/west and north/south parts;
/// the sign of sin picks east or west, the sign of cos north or south.
inline OrientationVector segment_orientation(const StreetSegment& s, const OrientationWeights& w) {
  const double lw = s.length * segment_weight(s, w);
  const auto [sn, cs] = detail::sincos_deg(s.bearing);
  OrientationVector o;
  if (sn > 0) o.east = lw * sn;
  else if (sn < 0) o.west = -lw * sn;
  if (cs > 0) o.north = lw * cs;
  else if (cs < 0) o.south = -lw * cs;
  return o;
}

/// Sum over the given segments, in the order given.
inline OrientationVector cell_orientation(std::span<const StreetSegment> segments, const OrientationWeights& w) {
  OrientationVector sum;
  for (const auto& s : segments) sum += segment_orientation(s, w);
  return sum;
}

inline OrientationVector cell_orientation(const CellSubnetwork& sub, const OrientationWeights& w) {
  return cell_orientation(std::span<const StreetSegment>(sub.segments), w);
}

inline OrientationVector aggregate_orientation(std::span<const OrientationVector> cells) {
  OrientationVector sum;
  for (const auto& c : cells) sum += c;
  return sum;
}

/// Cell a segment's capacity is credited to: the cell holding the midpoint of
/// its shape. For a normalized piece this is the cell the piece runs through,
/// which differs from its tail cell when the piece starts on a west or south border.
inline CellId orientation_cell(const StreetNetwork& net, const StreetSegment& s, const GridConfig& cfg, int level) {
  const auto shape = net.shape(s);
  return cell_of_point(point_along(shape, 0.5), level, cfg);
}

/// Indicator of every cell at `level` that has street capacity, summed in
/// ascending segment-id order. Rejects segments that cross more than one border.
inline std::map<CellId, OrientationVector> orientation_by_cell(const StreetNetwork& net, const GridConfig& cfg,
                                                               int level, const OrientationWeights& w) {
  cfg.validate();
  w.validate();
  std::map<CellId, OrientationVector> out;
  for (const auto& [id, s] : net.segments) {
    if (border_crossings(net, s, cfg, level) > 1)
      throw IntegrityError("segment '" + id + "' crosses several cell borders; normalize the network first");
    out[orientation_cell(net, s, cfg, level)] += segment_orientation(s, w);
  }
  return out;
}

/// Rolls per-cell indicators up to `target_level` by summing children.
inline std::map<CellId, OrientationVector> aggregate_to_level(const std::map<CellId, OrientationVector>& cells,
                                                              const GridConfig& cfg, int target_level) {
  std::map<CellId, OrientationVector> current = cells;
  for (const auto& [c, v] : current)
    if (c.level > target_level) throw InvalidInputError("cannot aggregate " + c.str() + " down to a finer level");
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<CellId, OrientationVector> next;
    for (const auto& [c, v] : current) {
      if (c.level < target_level) {
        next[parent_cell(c, cfg)] += v;
        changed = true;
      } else {
        next[c] += v;
      }
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace gridskg
