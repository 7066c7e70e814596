#pragma once

// CSV and GeoJSON views of orientation values and the simplified network.

#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gridskg/format.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/orientation.hpp"
#include "gridskg/simplify.hpp"

namespace gridskg {

inline void write_orientation_csv(const std::map<CellId, OrientationVector>& cells, std::ostream& out) {
  out << "cell_id,east,north,west,south\n";
  for (const auto& [c, o] : cells)
    out << c.str() << ',' << fmt::format_double(o.east) << ',' << fmt::format_double(o.north) << ','
        << fmt::format_double(o.west) << ',' << fmt::format_double(o.south) << '\n';
}

inline void write_links_csv(const SimplifiedNetwork& sn, std::ostream& out) {
  out << "from,to,link_type,weight,via_cell\n";
  for (const auto& l : sn.links())
    out << fmt::csv_field(l.from) << ',' << fmt::csv_field(l.to) << ',' << to_string(l.type) << ','
        << fmt::format_double(l.weight) << ',' << l.via_cell.str() << '\n';
}

/// Terminal nodes as Points and links as two-point LineStrings.
inline std::string simplified_network_to_geojson(const SimplifiedNetwork& sn) {
  using nlohmann::ordered_json;
  ordered_json features = ordered_json::array();
  for (const auto& [id, n] : sn.nodes())
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {n.x, n.y}}}},
                        {"properties", {{"node", id}, {"cell", n.cell.str()}, {"exit", n.exit}, {"entry", n.entry}}}});
  for (const auto& l : sn.links()) {
    const auto& a = sn.nodes().at(l.from);
    const auto& b = sn.nodes().at(l.to);
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", {{a.x, a.y}, {b.x, b.y}}}}},
                        {"properties",
                         {{"from", l.from},
                          {"to", l.to},
                          {"link_type", std::string(to_string(l.type))},
                          {"weight", l.weight},
                          {"via_cell", l.via_cell.str()}}}});
  }
  ordered_json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

}  // namespace gridskg
