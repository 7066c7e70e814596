#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

#include "gridskg/gridskg.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridskg;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("gridskg_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& data) const { std::ofstream(path(name), std::ios::binary) << data; }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  Result run(const std::string& args) const {
    const std::string cmd =
        std::string(GRIDSKG_CLI_PATH) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read("stdout");
    r.err = read("stderr");
    return r;
  }

  json run_json(const std::string& args, int want = 0) const {
    const auto r = run(args);
    EXPECT_EQ(r.code, want) << args << "\n" << r.err;
    return json::parse(r.out);
  }

  // ingest + simplify + orient --emit-kg, leaving norm.jsonl and kg.nt.
  void pipeline(const std::string& jsonl) {
    write("net.jsonl", jsonl);
    run_json("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
    run_json("simplify " + path("norm.jsonl") + " --kg " + path("kg.nt") + " --out " + path("links.csv"));
    run_json("orient " + path("norm.jsonl") + " --out " + path("o.csv") + " --emit-kg --kg " + path("kg.nt"));
  }

  fs::path dir_;
};

std::string three_edges() {
  using fixtures::edge_line;
  using fixtures::node_line;
  return node_line("a", 100, 100) + node_line("b", 900, 100) + node_line("c", 900, 900) + node_line("d", 100, 900) +
         edge_line("ab", "a", "b", false) + edge_line("bc", "b", "c", false) + edge_line("cd", "c", "d", false);
}

// One segment across three cells: rejected unless normalized.
std::string long_segment() {
  return fixtures::node_line("a", 500, 500) + fixtures::node_line("b", 2500, 500) +
         fixtures::edge_line("ab", "a", "b", true);
}

}  // namespace

TEST_F(Cli, IngestCountsDirectedSegments) {
  write("net.jsonl", three_edges());
  const auto j = run_json("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
  EXPECT_EQ(j["directed_segments"], 6);
  EXPECT_EQ(j["segments"], 6);
  EXPECT_EQ(j["split_nodes"], 0);
  std::istringstream in(read("norm.jsonl"));
  EXPECT_EQ(load_network(in).segments.size(), 6u);
}

TEST_F(Cli, IngestReportsMalformedLine) {
  std::string jsonl = three_edges();
  jsonl.insert(jsonl.find(fixtures::edge_line("cd", "c", "d", false)), "{\"type\": \"edge\", \"id\": \n");
  write("net.jsonl", jsonl);
  const auto r = run("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 7"), std::string::npos) << r.err;
}

TEST_F(Cli, IngestEmptyAndMissingInput) {
  write("empty.jsonl", "");
  const auto j = run_json("ingest " + path("empty.jsonl") + " --out " + path("norm.jsonl"));
  EXPECT_EQ(j["segments"], 0);
  EXPECT_EQ(run("ingest " + path("missing.jsonl") + " --out " + path("x")).code, 2);
  EXPECT_EQ(run("ingest").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, ConfigAndClassFilter) {
  using fixtures::edge_line;
  using fixtures::node_line;
  write("net.jsonl", node_line("a", 100, 100) + node_line("b", 900, 100) + edge_line("m", "a", "b", true, "motorway") +
                         edge_line("r", "b", "a", true, "residential"));
  EXPECT_EQ(run_json("ingest " + path("net.jsonl") + " --out " + path("n.jsonl"))["segments"], 1);
  EXPECT_EQ(run_json("ingest " + path("net.jsonl") + " --out " + path("n.jsonl") + " --classes motorway,other")["segments"], 2);
  write("cfg.json", R"({"grid": {"cell_size": 500}, "classes": ["other"]})");
  EXPECT_EQ(run_json("ingest " + path("net.jsonl") + " --out " + path("n.jsonl") + " --config " + path("cfg.json"))["segments"], 2);
  write("bad.json", R"({"grid": {"cell_size": -1}})");
  EXPECT_EQ(run("ingest " + path("net.jsonl") + " --out " + path("n.jsonl") + " --config " + path("bad.json")).code, 2);
  EXPECT_EQ(run("ingest " + path("net.jsonl") + " --out " + path("n.jsonl") + " --classes footpath").code, 2);
}

TEST_F(Cli, OrientWritesCsv) {
  write("net.jsonl", fixtures::corridor_jsonl());
  run_json("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
  const auto j = run_json("orient " + path("norm.jsonl") + " --out " + path("o.csv"));
  EXPECT_EQ(j["cells"], 3);
  EXPECT_EQ(read("o.csv"),
            "cell_id,east,north,west,south\n"
            "L1.0.0,500,0,500,0\n"
            "L1.0.1,1000,0,1000,0\n"
            "L1.0.2,500,0,500,0\n");
  EXPECT_EQ(run_json("orient " + path("norm.jsonl") + " --out " + path("o2.csv") + " --level 2")["cells"], 1);
  EXPECT_EQ(read("o2.csv"), "cell_id,east,north,west,south\nL2.0.0,2000,0,2000,0\n");
}

TEST_F(Cli, OrientEmptyAndUnnormalized) {
  write("empty.jsonl", "");
  EXPECT_EQ(run_json("orient " + path("empty.jsonl") + " --out " + path("o.csv"))["cells"], 0);
  EXPECT_EQ(read("o.csv"), "cell_id,east,north,west,south\n");
  write("long.jsonl", long_segment());
  EXPECT_EQ(run("orient " + path("long.jsonl") + " --out " + path("o.csv")).code, 2);
}

TEST_F(Cli, SimplifyIsDeterministic) {
  write("net.jsonl", fixtures::lattice_jsonl({.cells = 6, .spacing = 450, .seed = 5}));
  run_json("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
  const auto a = run_json("simplify " + path("norm.jsonl") + " --kg " + path("a.nt") + " --out " + path("a.csv"));
  write("cfg.json", R"({"threads": 4})");
  const auto b = run_json("simplify " + path("norm.jsonl") + " --kg " + path("b.nt") + " --out " + path("b.csv") +
                          " --config " + path("cfg.json"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(read("a.nt"), read("b.nt"));
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_EQ(read("a.csv").rfind("from,to,link_type,weight,via_cell\n", 0), 0u);
  write("long.jsonl", long_segment());
  EXPECT_EQ(run("simplify " + path("long.jsonl") + " --kg " + path("c.nt")).code, 2);
}

TEST_F(Cli, ObserveAddsTriplesAndRejectsDuplicates) {
  pipeline(fixtures::corridor_jsonl());
  const std::string row = "L1.0.1,http://example.org/p/no2,41.5,2024-03-01T08:00:00Z\n";
  write("obs.csv", "cell_id,property_iri,value,timestamp\n" + row);
  const auto before = run_json("stats --kg " + path("kg.nt"));
  const auto j = run_json("observe " + path("obs.csv") + " --kg " + path("kg.nt"));
  EXPECT_EQ(j["triples_added"], 5);
  const auto after = run_json("stats --kg " + path("kg.nt"));
  EXPECT_EQ(after["triples"].get<int>() - before["triples"].get<int>(), 5);
  EXPECT_EQ(after["observations"], 1);

  const auto again = run("observe " + path("obs.csv") + " --kg " + path("kg.nt"));
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("line 2"), std::string::npos) << again.err;

  write("dup.csv", "L1.0.0,http://example.org/p/no2,1,2024-03-01T08:00:00Z\n" + row + row);
  const std::string kg = read("kg.nt");
  const auto dup = run("observe " + path("dup.csv") + " --kg " + path("kg.nt"));
  EXPECT_EQ(dup.code, 2);
  EXPECT_NE(dup.err.find("line 2"), std::string::npos) << dup.err;
  EXPECT_EQ(read("kg.nt"), kg);

  write("empty.csv", "");
  EXPECT_EQ(run("observe " + path("empty.csv") + " --kg " + path("kg.nt")).code, 0);
  EXPECT_EQ(read("kg.nt"), kg);

  write("bad.csv", "L1.0.0,not-an-iri,1,2024-03-01T08:00:00Z\n");
  const auto bad = run("observe " + path("bad.csv") + " --kg " + path("kg.nt"));
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 1"), std::string::npos) << bad.err;
}

TEST_F(Cli, RouteMatchesOracle) {
  const GridConfig cfg;
  pipeline(fixtures::corridor_jsonl());
  const auto j = run_json("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --cost euclidean --out " +
                          path("r.geojson"));
  const auto net = normalize(fixtures::load(fixtures::corridor_jsonl()), cfg, 1);
  EXPECT_NEAR(j["total_weight"].get<double>(), oracles::FullNetwork(net, cfg).cell_to_cell({1, 0, 0}, {1, 0, 2}), 1e-9);
  EXPECT_EQ(j["cells_visited"], json::array({"L1.0.0", "L1.0.1", "L1.0.2"}));
  EXPECT_TRUE(j.contains("wall_time_ms"));
  EXPECT_FALSE(oracles::geojson_error(json::parse(read("r.geojson"))));

  for (const char* mode : {"orientation-raw", "orientation-inverse"}) {
    const auto o = run_json("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --cost " + mode);
    EXPECT_EQ(o["total_weight"], 1500.0);
    EXPECT_GT(o["total_cost"].get<double>(), 0);
  }

  const auto same = run_json("route --kg " + path("kg.nt") + " --from L1.0.1 --to L1.0.1 --out " + path("s.geojson"));
  EXPECT_EQ(same["total_weight"], 0.0);
  EXPECT_EQ(json::parse(read("s.geojson"))["features"][0]["geometry"]["type"], "Point");
}

TEST_F(Cli, RouteExitCodes) {
  pipeline(fixtures::corridor_jsonl());
  const auto cut = run("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --exclude L1.0.1");
  EXPECT_EQ(cut.code, 3);
  EXPECT_EQ(json::parse(cut.out)["reachable"], false);
  EXPECT_EQ(run("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.9.9").code, 2);
  EXPECT_EQ(run("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --cost fastest").code, 2);
  EXPECT_EQ(run("route --kg " + path("kg.nt") + " --from X --to L1.0.2").code, 2);
  EXPECT_EQ(run("route --kg " + path("missing.nt") + " --from L1.0.0 --to L1.0.2").code, 2);
  write("broken.nt", "<http://a> <http://b> .\n");
  EXPECT_EQ(run("route --kg " + path("broken.nt") + " --from L1.0.0 --to L1.0.2").code, 2);
}

TEST_F(Cli, RouteRespectsExclusionReroute) {
  pipeline(fixtures::two_corridors_jsonl());
  const double direct = run_json("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2")["total_weight"];
  const double detour =
      run_json("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --exclude L1.0.1")["total_weight"];
  EXPECT_GT(detour, direct);
  EXPECT_EQ(run("route --kg " + path("kg.nt") + " --from L1.0.0 --to L1.0.2 --exclude L1.0.1,L1.2.1").code, 3);
}

TEST_F(Cli, TurtleKgRoundTrip) {
  write("net.jsonl", fixtures::corridor_jsonl());
  run_json("ingest " + path("net.jsonl") + " --out " + path("norm.jsonl"));
  run_json("simplify " + path("norm.jsonl") + " --kg " + path("kg.ttl"));
  EXPECT_NE(read("kg.ttl").find("@prefix"), std::string::npos);
  const auto s = run_json("stats --kg " + path("kg.ttl"));
  EXPECT_EQ(s["terminal_nodes"], 4);
  EXPECT_EQ(s["links"], 10);
  EXPECT_EQ(run_json("route --kg " + path("kg.ttl") + " --from L1.0.0 --to L1.0.2")["total_weight"], 1500.0);
}
