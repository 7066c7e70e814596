// gridskg: batch front end for ingest, orientation, simplification,
// observation loading, routing and KG statistics.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridskg/gridskg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace gridskg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitUnreachable = 3;

struct RunConfig {
  GridConfig grid;
  std::set<RoadClass> classes = major_road_classes();
  OrientationWeights orientation;
  int level = 1;
  std::string base_iri = kg::Vocabulary{}.base;
  unsigned threads = 1;
};

struct Flags {
  std::string config;
  std::optional<int> level;
  std::string classes;
  std::string kg;
  std::string out;
};

std::set<RoadClass> parse_classes(const std::string& list) {
  std::set<RoadClass> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto name = fmt::trim(item);
    if (name.empty()) continue;
    const auto c = road_class_from_name(name);
    if (!c) throw InvalidInputError("unknown road class '" + std::string(name) + "'");
    out.insert(*c);
  }
  if (out.empty()) throw InvalidInputError("empty road class list");
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InvalidInputError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw InvalidInputError(std::string(what) + " '" + path + "' does not exist");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path + "'");
  out << data;
  if (!out) throw InvalidInputError("write to '" + path + "' failed");
}

RunConfig load_config(const Flags& f) {
  RunConfig rc;
  if (!f.config.empty()) {
    require_file(f.config, "config file");
    json j;
    try {
      j = json::parse(read_file(f.config));
    } catch (const json::parse_error& e) {
      throw InvalidInputError("config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw InvalidInputError("config: top level must be an object");
    try {
      const json& g = j.contains("grid") ? j.at("grid") : j;
      rc.grid.origin_x = g.value("origin_x", rc.grid.origin_x);
      rc.grid.origin_y = g.value("origin_y", rc.grid.origin_y);
      rc.grid.cell_size = g.value("cell_size", rc.grid.cell_size);
      rc.grid.level_factor = g.value("level_factor", rc.grid.level_factor);
      rc.grid.crs_label = g.value("crs_label", rc.grid.crs_label);
      rc.level = j.value("level", rc.level);
      if (j.contains("classes")) {
        const auto& c = j.at("classes");
        std::string list;
        if (c.is_string()) {
          list = c.get<std::string>();
        } else {
          for (const auto& item : c) list += item.get<std::string>() + ",";
        }
        rc.classes = parse_classes(list);
      }
      rc.orientation.use_speed_factor = j.value("use_speed_factor", rc.orientation.use_speed_factor);
      rc.orientation.reference_speed = j.value("reference_speed", rc.orientation.reference_speed);
      rc.base_iri = j.value("base_iri", rc.base_iri);
      rc.threads = j.value("threads", rc.threads);
    } catch (const json::exception& e) {
      throw InvalidInputError("config: " + std::string(e.what()));
    }
  }
  if (f.level) rc.level = *f.level;
  if (!f.classes.empty()) rc.classes = parse_classes(f.classes);
  rc.grid.validate();
  rc.orientation.validate();
  if (rc.level < 1) throw InvalidInputError("level must be >= 1");
  if (!kg::is_absolute_iri(rc.base_iri)) throw InvalidInputError("base_iri must be an absolute IRI");
  if (rc.threads == 0) rc.threads = 1;
  return rc;
}

kg::Format kg_format(const std::string& path) {
  return fs::path(path).extension() == ".ttl" ? kg::Format::turtle : kg::Format::ntriples;
}

kg::TripleGraph read_kg(const std::string& path, const kg::Vocabulary& v) {
  return kg::parse(read_file(path), kg_format(path), v.index_predicates());
}

void write_kg(const std::string& path, const kg::TripleGraph& g, const kg::Vocabulary& v) {
  write_file(path, kg::serialize(g, kg_format(path), v.prefixes()));
}

StreetNetwork read_network(const std::string& path, const RunConfig& rc) {
  require_file(path, "network file");
  std::ifstream in(path, std::ios::binary);
  return filter_by_class(load_network(in), rc.classes);
}

void print(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_ingest(const Flags& f, const std::string& input) {
  const RunConfig rc = load_config(f);
  if (f.out.empty()) throw InvalidInputError("ingest needs --out");
  require_file(input, "network file");
  std::ifstream in(input, std::ios::binary);
  const StreetNetwork raw = load_network(in);
  const StreetNetwork filtered = filter_by_class(raw, rc.classes);
  const StreetNetwork norm = normalize(filtered, rc.grid, rc.level);
  std::ostringstream out;
  write_network(norm, out);
  write_file(f.out, out.str());
  std::cerr << "ingest: wrote " << norm.segments.size() << " segments to " << f.out << "\n";
  print({{"input_nodes", raw.nodes.size()},
         {"input_segments", raw.segments.size()},
         {"directed_segments", filtered.segments.size()},
         {"nodes", norm.nodes.size()},
         {"segments", norm.segments.size()},
         {"split_nodes", norm.nodes.size() - filtered.nodes.size()},
         {"level", rc.level}});
  return kExitOk;
}

int cmd_orient(const Flags& f, const std::string& input, bool emit_kg) {
  const RunConfig rc = load_config(f);
  if (f.out.empty()) throw InvalidInputError("orient needs --out");
  const StreetNetwork net = read_network(input, rc);
  const auto per_cell = aggregate_to_level(orientation_by_cell(net, rc.grid, 1, rc.orientation), rc.grid, rc.level);
  std::ostringstream csv;
  write_orientation_csv(per_cell, csv);
  write_file(f.out, csv.str());
  std::size_t added = 0;
  if (emit_kg) {
    if (f.kg.empty()) throw InvalidInputError("--emit-kg needs --kg");
    const kg::Vocabulary v{rc.base_iri};
    auto g = fs::exists(f.kg) ? read_kg(f.kg, v) : kg::make_graph(v);
    for (const auto& [c, o] : per_cell) added += g.add_all(kg::cell_to_triples(c, rc.grid, o, v));
    write_kg(f.kg, g, v);
  }
  std::cerr << "orient: " << per_cell.size() << " cells at level " << rc.level << "\n";
  print({{"cells", per_cell.size()}, {"level", rc.level}, {"kg_triples_added", added}});
  return kExitOk;
}

int cmd_simplify(const Flags& f, const std::string& input, const std::string& geojson) {
  const RunConfig rc = load_config(f);
  if (f.kg.empty()) throw InvalidInputError("simplify needs --kg");
  PartitionedNetwork pn(read_network(input, rc), rc.grid, rc.level);
  const SimplifiedNetwork sn = build_simplified_network(pn, rc.threads);
  const kg::Vocabulary v{rc.base_iri};
  auto g = kg::make_graph(v);
  kg::add_simplified_network(g, sn, rc.grid, v);
  write_kg(f.kg, g, v);
  if (!f.out.empty()) {
    std::ostringstream csv;
    write_links_csv(sn, csv);
    write_file(f.out, csv.str());
  }
  if (!geojson.empty()) write_file(geojson, simplified_network_to_geojson(sn));
  ordered_json per_cell = ordered_json::array();
  for (const auto& c : sn.cells())
    per_cell.push_back({{"cell", c.str()}, {"terminal_nodes", sn.nodes_in(c).size()}, {"links", sn.links_of(c).size()}});
  std::cerr << "simplify: " << sn.nodes().size() << " terminal nodes, " << sn.links().size() << " links\n";
  print({{"cells", sn.cells().size()},
         {"terminal_nodes", sn.nodes().size()},
         {"links", sn.links().size()},
         {"triples", g.size()},
         {"per_cell", per_cell}});
  return kExitOk;
}

int cmd_observe(const Flags& f, const std::string& input) {
  const RunConfig rc = load_config(f);
  if (f.kg.empty()) throw InvalidInputError("observe needs --kg");
  require_file(input, "observation file");
  std::ifstream in(input, std::ios::binary);
  const auto rows = kg::parse_observations_csv(in);
  if (rows.empty()) {
    print({{"observations", 0}, {"triples_added", 0}});
    return kExitOk;
  }
  const kg::Vocabulary v{rc.base_iri};
  auto g = fs::exists(f.kg) ? read_kg(f.kg, v) : kg::make_graph(v);
  std::set<std::string> seen;
  std::size_t added = 0;
  for (const auto& row : rows) {
    const std::string subject = v.observation_iri(row.observation.id);
    if (!seen.insert(subject).second || g.has_subject(subject))
      throw ParseError(row.line, "duplicate observation <" + subject + ">");
    added += g.add_all(kg::observation_to_triples(row.observation, v));
  }
  write_kg(f.kg, g, v);
  print({{"observations", rows.size()}, {"triples_added", added}});
  return kExitOk;
}

struct RouteArgs {
  std::string from, to, cost = "euclidean", exclude;
};

int cmd_route(const Flags& f, const RouteArgs& a) {
  const RunConfig rc = load_config(f);
  require_file(f.kg, "KG file");
  const auto model = parse_cost_model(a.cost);
  if (!model) throw InvalidInputError("unknown cost model '" + a.cost + "'");
  const CellId from = CellId::parse(a.from), to = CellId::parse(a.to);
  std::set<CellId> excluded;
  std::stringstream ss(a.exclude);
  for (std::string item; std::getline(ss, item, ',');)
    if (!fmt::trim(item).empty()) excluded.insert(CellId::parse(fmt::trim(item)));

  const kg::Vocabulary v{rc.base_iri};
  const auto started = std::chrono::steady_clock::now();
  const auto g = read_kg(f.kg, v);
  const SimplifiedNetwork sn = remove_cells(kg::load_simplified_network(g, v), excluded);
  OrientationIndex idx;
  if (*model != CostModel::euclidean) idx = OrientationIndex(kg::load_orientation(g, v));
  ordered_json summary = {{"from", from.str()}, {"to", to.str()}, {"cost", a.cost}, {"excluded", excluded.size()}};
  try {
    const Route r = astar(sn, from, to, *model, &idx, rc.grid);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (!f.out.empty()) write_file(f.out, route_to_geojson(r, rc.grid));
    ordered_json cells = ordered_json::array();
    for (const auto& c : r.cells) cells.push_back(c.str());
    summary["reachable"] = true;
    summary["total_weight"] = r.total_weight;
    summary["total_cost"] = r.total_cost;
    summary["links"] = r.links.size();
    summary["cells_visited"] = cells;
    summary["explored_cells"] = r.explored_cells;
    summary["wall_time_ms"] = ms;
    print(summary);
    return kExitOk;
  } catch (const UnreachableError& e) {
    summary["reachable"] = false;
    summary["explored_cells"] = e.explored_cells();
    print(summary);
    std::cerr << "route: " << e.what() << "\n";
    return kExitUnreachable;
  }
}

int cmd_stats(const Flags& f) {
  const RunConfig rc = load_config(f);
  require_file(f.kg, "KG file");
  const kg::Vocabulary v{rc.base_iri};
  const auto g = read_kg(f.kg, v);
  const std::string type = kg::rdf_type();
  auto count = [&](const std::string& cls) { return g.subjects(type, kg::Term{kg::Term::Kind::iri, cls, {}}).size(); };
  std::set<kg::TermId> subjects;
  for (const auto& t : g.triple_ids()) subjects.insert(t.s);
  print({{"triples", g.size()},
         {"subjects", subjects.size()},
         {"cells", count(v.Cell())},
         {"terminal_nodes", count(v.TerminalNode())},
         {"links", count(v.Link())},
         {"observations", count(kg::Vocabulary::sosa("Observation"))},
         {"cells_with_orientation", kg::load_orientation(g, v).size()}});
  return kExitOk;
}

void add_shared(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--level", f.level, "Grid level");
  cmd->add_option("--classes", f.classes, "Comma-separated road classes");
  cmd->add_option("--kg", f.kg, "Knowledge graph file (.nt or .ttl)");
  cmd->add_option("--out", f.out, "Output file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid cell spatial knowledge graph toolkit"};
  app.require_subcommand(1);
  Flags flags;
  std::string input, geojson;
  bool emit_kg = false;
  RouteArgs route;

  auto* ingest = app.add_subcommand("ingest", "Filter and normalize a JSONL street network");
  ingest->add_option("network", input, "Input network (JSONL)")->required();
  add_shared(ingest, flags);

  auto* orient = app.add_subcommand("orient", "Per-cell orientation indicators as CSV");
  orient->add_option("network", input, "Normalized network (JSONL)")->required();
  orient->add_flag("--emit-kg", emit_kg, "Add orientation triples to --kg");
  add_shared(orient, flags);

  auto* simplify = app.add_subcommand("simplify", "Build the terminal-node network and its KG");
  simplify->add_option("network", input, "Normalized network (JSONL)")->required();
  simplify->add_option("--geojson", geojson, "Also write the simplified network as GeoJSON");
  add_shared(simplify, flags);

  auto* observe = app.add_subcommand("observe", "Add observations from CSV to the KG");
  observe->add_option("observations", input, "CSV: cell_id,property_iri,value,timestamp")->required();
  add_shared(observe, flags);

  auto* route_cmd = app.add_subcommand("route", "Route between two cells over the KG network");
  route_cmd->add_option("--from", route.from, "Origin cell")->required();
  route_cmd->add_option("--to", route.to, "Target cell")->required();
  route_cmd->add_option("--cost", route.cost, "euclidean|orientation-raw|orientation-inverse");
  route_cmd->add_option("--exclude", route.exclude, "Comma-separated cells to remove");
  add_shared(route_cmd, flags);

  auto* stats = app.add_subcommand("stats", "Summarize a KG file");
  add_shared(stats, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*ingest) return cmd_ingest(flags, input);
    if (*orient) return cmd_orient(flags, input, emit_kg);
    if (*simplify) return cmd_simplify(flags, input, geojson);
    if (*observe) return cmd_observe(flags, input);
    if (*route_cmd) return cmd_route(flags, route);
    if (*stats) return cmd_stats(flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
