#pragma once

// Encoding of cells, observations, entities, regions and the simplified
// network as triples, and the reverse mapping back to a SimplifiedNetwork.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridskg/error.hpp"
#include "gridskg/format.hpp"
#include "gridskg/grid.hpp"
#include "gridskg/kg_graph.hpp"
#include "gridskg/kg_io.hpp"
#include "gridskg/orientation.hpp"
#include "gridskg/simplify.hpp"

namespace gridskg::kg {

/// Percent-encodes everything outside the unreserved set and the path
/// characters allowed verbatim. Extra bytes in `also` are encoded too.
inline std::string encode_iri_part(std::string_view s, std::string_view also = {}) {
  static constexpr std::string_view kAllowed = "-._~/:@!$&'()*+,;=";
  std::string out;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if ((std::isalnum(c) && c < 0x80) || (kAllowed.find(ch) != std::string_view::npos && also.find(ch) == std::string_view::npos)) {
      out += ch;
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned>(c));
      out += buf;
    }
  }
  return out;
}

inline std::string decode_iri_part(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && detail::is_hex(s[i + 1]) && detail::is_hex(s[i + 2])) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

/// IRIs minted by this library. Everything lives under `base`; the
/// vocabulary namespace is {base}vocab/.
struct Vocabulary {
  std::string base = "http://example.org/gridskg/";

  std::string vocab(std::string_view local) const { return base + "vocab/" + std::string(local); }
  Term term(std::string_view local) const { return Term{Term::Kind::iri, vocab(local), {}}; }

  // Classes.
  std::string Cell() const { return vocab("Cell"); }
  std::string TerminalNode() const { return vocab("TerminalNode"); }
  std::string Link() const { return vocab("Link"); }
  // Cell properties.
  std::string rowOrder() const { return vocab("rowOrder"); }
  std::string colOrder() const { return vocab("colOrder"); }
  std::string level() const { return vocab("level"); }
  std::string centerX() const { return vocab("centerX"); }
  std::string centerY() const { return vocab("centerY"); }
  std::string orientation(Direction d) const {
    switch (d) {
      case Direction::E: return vocab("orientationEast");
      case Direction::N: return vocab("orientationNorth");
      case Direction::W: return vocab("orientationWest");
      case Direction::S: return vocab("orientationSouth");
    }
    return {};
  }
  std::string locatedInCell() const { return vocab("locatedInCell"); }
  // Simplified network.
  std::string linkFrom() const { return vocab("linkFrom"); }
  std::string linkTo() const { return vocab("linkTo"); }
  std::string linkType() const { return vocab("linkType"); }
  std::string weight() const { return vocab("weight"); }
  std::string viaCell() const { return vocab("viaCell"); }
  std::string x() const { return vocab("x"); }
  std::string y() const { return vocab("y"); }
  std::string inCell() const { return vocab("inCell"); }
  std::string terminalRole() const { return vocab("terminalRole"); }
  // External vocabularies.
  static std::string sosa(std::string_view local) { return std::string(ns::sosa) + std::string(local); }
  static std::string geo(std::string_view local) { return std::string(ns::geo) + std::string(local); }

  std::string cell_iri(const CellId& c) const { return base + "id/cell/" + c.str(); }
  std::string node_iri(std::string_view node_id) const { return base + "id/node/" + encode_iri_part(node_id); }
  std::string observation_iri(std::string_view id) const { return base + "id/observation/" + encode_iri_part(id); }
  std::string link_iri(const CellLink& l) const {
    return base + "id/link/" + encode_iri_part(l.from, "-") + "-" + encode_iri_part(l.to, "-") + "-" +
           l.via_cell.str();
  }

  std::optional<CellId> cell_from_iri(std::string_view iri) const {
    const std::string prefix = base + "id/cell/";
    if (!iri.starts_with(prefix)) return std::nullopt;
    try {
      return CellId::parse(iri.substr(prefix.size()));
    } catch (const InvalidInputError&) {
      return std::nullopt;
    }
  }
  std::optional<std::string> node_from_iri(std::string_view iri) const {
    const std::string prefix = base + "id/node/";
    if (!iri.starts_with(prefix)) return std::nullopt;
    return decode_iri_part(iri.substr(prefix.size()));
  }

  IndexPredicates index_predicates() const { return {rowOrder(), colOrder(), level()}; }

  /// Prefix table for Turtle output.
  std::map<std::string, std::string> prefixes() const {
    return {{"rdf", std::string(ns::rdf)}, {"xsd", std::string(ns::xsd)}, {"sosa", std::string(ns::sosa)},
            {"geo", std::string(ns::geo)}, {"v", base + "vocab/"}};
  }
};

inline TripleGraph make_graph(const Vocabulary& v = {}) { return TripleGraph(v.index_predicates()); }

namespace detail {
inline Term iri(std::string s) { return Term{Term::Kind::iri, std::move(s), {}}; }
}  // namespace detail

/// Closed counterclockwise ring of the cell square.
inline std::string cell_wkt(const CellId& c, const GridConfig& cfg) {
  const auto b = cell_bounds(c, cfg);
  auto pt = [](double x, double y) { return fmt::format_double(x) + " " + fmt::format_double(y); };
  return "POLYGON((" + pt(b.min_x, b.min_y) + "," + pt(b.max_x, b.min_y) + "," + pt(b.max_x, b.max_y) + "," +
         pt(b.min_x, b.max_y) + "," + pt(b.min_x, b.min_y) + "))";
}

inline std::vector<Triple> cell_to_triples(const CellId& c, const GridConfig& cfg,
                                           const std::optional<OrientationVector>& orientation,
                                           const Vocabulary& v = {}) {
  using detail::iri;
  const Term s = iri(v.cell_iri(c));
  const Point center = cell_center(c, cfg);
  std::vector<Triple> out{
      {s, iri(rdf_type()), iri(v.Cell())},
      {s, iri(v.rowOrder()), Term::integer(c.row)},
      {s, iri(v.colOrder()), Term::integer(c.col)},
      {s, iri(v.level()), Term::integer(c.level)},
      {s, iri(v.centerX()), Term::dbl(center.x)},
      {s, iri(v.centerY()), Term::dbl(center.y)},
      {s, iri(Vocabulary::geo("asWKT")), Term::literal(cell_wkt(c, cfg), Vocabulary::geo("wktLiteral"))},
  };
  if (orientation) {
    for (Direction d : {Direction::E, Direction::N, Direction::W, Direction::S})
      out.push_back({s, iri(v.orientation(d)), Term::dbl(orientation->component(d))});
  }
  return out;
}

/// Validates an xsd:dateTime lexical form (YYYY-MM-DDThh:mm:ss[.f][Z|+hh:mm]).
inline bool is_iso8601_datetime(std::string_view s) {
  static const std::regex re(R"(^(-?\d{4,})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.\d+)?(Z|[+-](\d{2}):(\d{2}))?$)");
  std::cmatch m;
  if (!std::regex_match(s.data(), s.data() + s.size(), m, re)) return false;
  const long year = std::stol(m[1].str());
  const int month = std::stoi(m[2].str()), day = std::stoi(m[3].str());
  const int hour = std::stoi(m[4].str()), minute = std::stoi(m[5].str()), second = std::stoi(m[6].str());
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (day > kDays[month - 1] + (month == 2 && leap ? 1 : 0)) return false;
  if (hour > 23 || minute > 59 || second > 59) return false;
  if (m[9].matched && (std::stoi(m[9].str()) > 14 || std::stoi(m[10].str()) > 59)) return false;
  return true;
}

struct Observation {
  std::string id;  // appended to {base}id/observation/
  CellId cell;
  std::string property;  // observed property IRI
  std::variant<double, std::string> value;
  std::string time;  // xsd:dateTime lexical form
};

inline std::vector<Triple> observation_to_triples(const Observation& o, const Vocabulary& v = {}) {
  using detail::iri;
  if (!is_iso8601_datetime(o.time)) throw InvalidInputError("invalid ISO-8601 timestamp '" + o.time + "'");
  if (!is_absolute_iri(o.property)) throw InvalidInputError("observed property is not an absolute IRI: '" + o.property + "'");
  const Term s = iri(v.observation_iri(o.id));
  const Term result = std::holds_alternative<double>(o.value) ? Term::dbl(std::get<double>(o.value))
                                                              : Term::plain(std::get<std::string>(o.value));
  return {
      {s, iri(rdf_type()), iri(Vocabulary::sosa("Observation"))},
      {s, iri(Vocabulary::sosa("hasFeatureOfInterest")), iri(v.cell_iri(o.cell))},
      {s, iri(Vocabulary::sosa("observedProperty")), iri(o.property)},
      {s, iri(Vocabulary::sosa("hasSimpleResult")), result},
      {s, iri(Vocabulary::sosa("resultTime")), Term::literal(o.time, xsd_datetime())},
  };
}

/// Observation id for a CSV row, which carries no id column.
inline std::string derive_observation_id(const CellId& cell, std::string_view property, std::string_view time) {
  std::uint32_t h = 2166136261u;
  for (char c : property) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  char hex[9];
  std::snprintf(hex, sizeof(hex), "%08x", h);
  return cell.str() + "/" + std::string(time) + "/" + hex;
}

struct ObservationRow {
  std::size_t line = 0;
  Observation observation;
};

/// Rows of cell_id,property_iri,value,timestamp. A header row is optional;
/// numeric values become doubles, anything else a plain string.
inline std::vector<ObservationRow> parse_observations_csv(std::istream& in) {
  std::vector<ObservationRow> out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (fmt::trim(text).empty()) continue;
    auto fields = fmt::split_csv_line(text);
    if (!fields || fields->size() != 4) throw ParseError(line_no, "expected 4 CSV fields");
    auto& f = *fields;
    if (out.empty() && line_no == 1 && f[0] == "cell_id") continue;
    Observation o;
    try {
      o.cell = CellId::parse(fmt::trim(f[0]));
    } catch (const InvalidInputError& e) {
      throw ParseError(line_no, e.what());
    }
    o.property = std::string(fmt::trim(f[1]));
    if (!is_absolute_iri(o.property)) throw ParseError(line_no, "property is not an absolute IRI");
    if (auto num = fmt::parse_double(fmt::trim(f[2])); num && std::isfinite(*num)) o.value = *num;
    else o.value = f[2];
    o.time = std::string(fmt::trim(f[3]));
    if (!is_iso8601_datetime(o.time)) throw ParseError(line_no, "invalid timestamp '" + o.time + "'");
    o.id = derive_observation_id(o.cell, o.property, o.time);
    out.push_back({line_no, std::move(o)});
  }
  return out;
}

inline std::vector<Triple> entity_to_triples(const std::string& entity_iri, const Point& location, int level,
                                             const GridConfig& cfg, const Vocabulary& v = {}) {
  return {{Term::iri(entity_iri), detail::iri(v.locatedInCell()), detail::iri(v.cell_iri(cell_of_point(location, level, cfg)))}};
}

inline std::vector<Triple> region_to_triples(const std::string& region_iri, std::span<const CellId> cells,
                                             const Vocabulary& v = {}) {
  const Term region = Term::iri(region_iri);
  std::vector<Triple> out;
  for (const auto& c : cells) out.push_back({detail::iri(v.cell_iri(c)), detail::iri(Vocabulary::geo("sfWithin")), region});
  return out;
}

inline std::vector<Triple> link_to_triples(const CellLink& l, const Vocabulary& v = {}) {
  using detail::iri;
  const Term s = iri(v.link_iri(l));
  return {
      {s, iri(rdf_type()), iri(v.Link())},
      {s, iri(v.linkFrom()), iri(v.node_iri(l.from))},
      {s, iri(v.linkTo()), iri(v.node_iri(l.to))},
      {s, iri(v.linkType()), Term::plain(std::string(to_string(l.type)))},
      {s, iri(v.weight()), Term::dbl(l.weight)},
      {s, iri(v.viaCell()), iri(v.cell_iri(l.via_cell))},
  };
}

inline std::vector<Triple> terminal_node_to_triples(const TerminalNode& n, const Vocabulary& v = {}) {
  using detail::iri;
  const Term s = iri(v.node_iri(n.id));
  std::vector<Triple> out{
      {s, iri(rdf_type()), iri(v.TerminalNode())},
      {s, iri(v.x()), Term::dbl(n.x)},
      {s, iri(v.y()), Term::dbl(n.y)},
      {s, iri(v.inCell()), iri(v.cell_iri(n.cell))},
  };
  if (n.exit) out.push_back({s, iri(v.terminalRole()), Term::plain("exit")});
  if (n.entry) out.push_back({s, iri(v.terminalRole()), Term::plain("entry")});
  return out;
}

/// Cells, terminal nodes and links of a simplified network.
inline void add_simplified_network(TripleGraph& g, const SimplifiedNetwork& sn, const GridConfig& cfg,
                                   const Vocabulary& v = {}) {
  for (const auto& c : sn.cells()) g.add_all(cell_to_triples(c, cfg, std::nullopt, v));
  for (const auto& [id, n] : sn.nodes()) g.add_all(terminal_node_to_triples(n, v));
  for (const auto& l : sn.links()) g.add_all(link_to_triples(l, v));
}

namespace detail {

inline const Term& single(const TripleGraph& g, const std::string& subject, const std::string& predicate,
                          std::vector<Term>& scratch) {
  scratch = g.objects(subject, predicate);
  if (scratch.empty()) throw IntegrityError("subject <" + subject + "> lacks required property <" + predicate + ">");
  if (scratch.size() > 1) throw IntegrityError("subject <" + subject + "> has several values for <" + predicate + ">");
  return scratch.front();
}

inline double single_double(const TripleGraph& g, const std::string& s, const std::string& p) {
  std::vector<Term> scratch;
  const auto v = single(g, s, p, scratch).as_double();
  if (!v) throw IntegrityError("subject <" + s + "> has a non-numeric <" + p + ">");
  return *v;
}

}  // namespace detail

/// Rebuilds the simplified network stored by add_simplified_network.
inline SimplifiedNetwork load_simplified_network(const TripleGraph& g, const Vocabulary& v = {}) {
  const Term type = detail::iri(rdf_type());
  std::vector<Term> scratch;
  std::map<std::string, TerminalNode> nodes;
  for (const auto& s : g.subjects(type.value, detail::iri(v.TerminalNode()))) {
    auto id = v.node_from_iri(s);
    if (!id) throw IntegrityError("terminal node <" + s + "> is outside " + v.base + "id/node/");
    TerminalNode n;
    n.id = *id;
    n.x = detail::single_double(g, s, v.x());
    n.y = detail::single_double(g, s, v.y());
    const Term& cell = detail::single(g, s, v.inCell(), scratch);
    auto c = v.cell_from_iri(cell.value);
    if (!cell.is_iri() || !c) throw IntegrityError("terminal node <" + s + "> has a malformed cell");
    n.cell = *c;
    for (const auto& role : g.objects(s, v.terminalRole())) {
      if (role.value == "exit") n.exit = true;
      else if (role.value == "entry") n.entry = true;
      else throw IntegrityError("terminal node <" + s + "> has unknown role '" + role.value + "'");
    }
    nodes.emplace(n.id, std::move(n));
  }
  std::vector<CellLink> links;
  for (const auto& s : g.subjects(type.value, detail::iri(v.Link()))) {
    CellLink l;
    auto endpoint = [&](const std::string& pred) {
      const Term& t = detail::single(g, s, pred, scratch);
      auto id = t.is_iri() ? v.node_from_iri(t.value) : std::nullopt;
      if (!id) throw IntegrityError("link <" + s + "> has a malformed endpoint");
      if (!nodes.count(*id)) throw IntegrityError("link <" + s + "> references undeclared terminal node '" + *id + "'");
      return *id;
    };
    l.from = endpoint(v.linkFrom());
    l.to = endpoint(v.linkTo());
    auto type_lit = parse_link_type(detail::single(g, s, v.linkType(), scratch).value);
    if (!type_lit) throw IntegrityError("link <" + s + "> has an unknown link type");
    l.type = *type_lit;
    l.weight = detail::single_double(g, s, v.weight());
    auto via = v.cell_from_iri(detail::single(g, s, v.viaCell(), scratch).value);
    if (!via) throw IntegrityError("link <" + s + "> has a malformed viaCell");
    l.via_cell = *via;
    links.push_back(std::move(l));
  }
  return SimplifiedNetwork(std::move(nodes), std::move(links));
}

/// Orientation values stored on cell subjects; cells without any are skipped.
inline std::map<CellId, OrientationVector> load_orientation(const TripleGraph& g, const Vocabulary& v = {}) {
  std::map<CellId, OrientationVector> out;
  for (const auto& s : g.subjects(rdf_type(), detail::iri(v.Cell()))) {
    auto c = v.cell_from_iri(s);
    if (!c) continue;
    bool any = false;
    OrientationVector o;
    for (Direction d : {Direction::E, Direction::N, Direction::W, Direction::S}) {
      auto vals = g.objects(s, v.orientation(d));
      if (vals.empty()) continue;
      auto num = vals.front().as_double();
      if (!num) throw IntegrityError("cell <" + s + "> has a non-numeric orientation value");
      any = true;
      (d == Direction::E ? o.east : d == Direction::N ? o.north : d == Direction::W ? o.west : o.south) = *num;
    }
    if (any) out[*c] = o;
  }
  return out;
}

}  // namespace gridskg::kg
