#include <gtest/gtest.h>

#include <random>

#include "gridskg/routing.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gridskg;

namespace {

const CellId A{1, 0, 0}, B{1, 0, 1}, C{1, 0, 2};

SimplifiedNetwork simplified(const std::string& jsonl, const GridConfig& cfg = {}) {
  PartitionedNetwork pn(normalize(fixtures::load(jsonl), cfg, 1), cfg, 1);
  return build_simplified_network(pn);
}

}  // namespace

TEST(DirectionComponents, Examples) {
  EXPECT_EQ(direction_components({1, 0, 0}, {1, 2, 3}), (std::vector<Direction>{Direction::N, Direction::E}));
  EXPECT_TRUE(direction_components({1, 5, 5}, {1, 5, 5}).empty());
  // Origin south-east of the current cell; travelling origin -> current.
  EXPECT_EQ(direction_components({1, 2, 7}, {1, 4, 3}), (std::vector<Direction>{Direction::N, Direction::W}));
  EXPECT_THROW(direction_components({1, 0, 0}, {2, 0, 0}), InvalidInputError);
}

TEST(OrientationCost, Examples) {
  const GridConfig cfg;
  OrientationIndex idx;
  EXPECT_EQ(orientation_cost(idx, A, A, CostModel::orientation_raw, cfg), 0);
  EXPECT_EQ(orientation_cost(idx, A, A, CostModel::orientation_inverse, cfg), 0);
  idx.set(A, {100, 7, 7, 7});
  idx.set(B, {50, 7, 7, 7});
  EXPECT_EQ(orientation_cost(idx, A, B, CostModel::orientation_raw, cfg), 150);
  EXPECT_EQ(orientation_cost(idx, B, A, CostModel::orientation_raw, cfg), 14);
  EXPECT_EQ(orientation_cost(OrientationIndex{}, A, {1, 3, 0}, CostModel::orientation_inverse, cfg), 3000);
  EXPECT_EQ(orientation_cost(idx, A, B, CostModel::orientation_inverse, cfg), 1000 / (1 + 150 / 2.0));
}

TEST(Astar, SameCellIsZeroRoute) {
  const auto sn = simplified(fixtures::corridor_jsonl());
  const auto r = astar(sn, B, B, CostModel::euclidean);
  EXPECT_EQ(r.total_weight, 0);
  EXPECT_TRUE(r.links.empty());
  ASSERT_EQ(r.nodes.size(), 1u);
  EXPECT_EQ(r.nodes[0].id, "q");
  const auto doc = nlohmann::json::parse(route_to_geojson(r, GridConfig{}));
  EXPECT_FALSE(oracles::geojson_error(doc));
  ASSERT_EQ(doc["features"].size(), 1u);
  EXPECT_EQ(doc["features"][0]["geometry"]["type"], "Point");
}

TEST(Astar, CorridorMatchesFullNetwork) {
  const GridConfig cfg;
  const auto net = normalize(fixtures::load(fixtures::corridor_jsonl()), cfg, 1);
  const auto sn = simplified(fixtures::corridor_jsonl());
  const auto r = astar(sn, A, C, CostModel::euclidean);
  EXPECT_EQ(r.total_weight, oracles::FullNetwork(net, cfg).cell_to_cell(A, C));
  EXPECT_EQ(r.total_weight, 1500);
  EXPECT_EQ(r.total_cost, r.total_weight);
  EXPECT_EQ(r.cells, (std::vector<CellId>{A, B, C}));
  for (std::size_t i = 0; i + 1 < r.links.size(); ++i) EXPECT_EQ(r.links[i].to, r.links[i + 1].from);
  EXPECT_EQ(r.nodes.size(), r.links.size() + 1);
  EXPECT_EQ(astar(sn, C, A, CostModel::euclidean).total_weight, 1500);
}

TEST(Astar, Errors) {
  const auto sn = simplified(fixtures::corridor_jsonl());
  EXPECT_THROW(astar(sn, A, {1, 5, 5}, CostModel::euclidean), NoEndpointError);
  EXPECT_THROW(astar(sn, {1, 5, 5}, A, CostModel::euclidean), NoEndpointError);
  EXPECT_THROW(astar(sn, A, C, CostModel::orientation_raw), InvalidInputError);
  const auto cut = remove_cells(sn, {B});
  try {
    astar(cut, A, C, CostModel::euclidean);
    FAIL();
  } catch (const UnreachableError& e) {
    EXPECT_EQ(e.explored_cells(), 1u);
  }
}

TEST(Astar, RemovalReroutesAndNeverShortens) {
  const auto sn = simplified(fixtures::two_corridors_jsonl());
  const auto before = astar(sn, A, C, CostModel::euclidean);
  const auto after = astar(remove_cells(sn, {B}), A, C, CostModel::euclidean);
  EXPECT_GT(after.total_weight, before.total_weight);
  EXPECT_NEAR(after.total_weight, oracles::simplified_shortest(remove_cells(sn, {B}), A, C), 1e-9);
  EXPECT_THROW(astar(remove_cells(sn, {B, {1, 2, 1}}), A, C, CostModel::euclidean), UnreachableError);
}

TEST(Astar, OptimalDeterministicSymmetricAdmissible) {
  const GridConfig cfg;
  const auto sn = simplified(fixtures::lattice_jsonl({.cells = 10, .spacing = 500, .two_way = 1.0, .seed = 31}));
  const auto cells = sn.cells();
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    const auto a = cells[pick(rng)], b = cells[pick(rng)];
    if (a == b) continue;
    const double want = oracles::simplified_shortest(sn, a, b);
    if (want == oracles::kInf) {
      EXPECT_THROW(astar(sn, a, b, CostModel::euclidean), UnreachableError);
      continue;
    }
    const auto r = astar(sn, a, b, CostModel::euclidean);
    EXPECT_NEAR(r.total_weight, want, 1e-6 * want);
    EXPECT_EQ(astar(sn, a, b, CostModel::euclidean), r);
    EXPECT_NEAR(astar(sn, b, a, CostModel::euclidean).total_weight, r.total_weight, 1e-6 * want);
    // Heuristic never exceeds the remaining route weight.
    double remaining = r.total_weight;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      double h = oracles::kInf;
      for (std::size_t t : sn.nodes_in(b)) h = std::min(h, distance({r.nodes[i].x, r.nodes[i].y}, sn.node_pos(t)));
      EXPECT_LE(h, remaining + 1e-6);
      if (i < r.links.size()) remaining -= r.links[i].weight;
    }
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Astar, OrientationModels) {
  const GridConfig cfg;
  const std::string jsonl = fixtures::lattice_jsonl({.cells = 6, .spacing = 450, .two_way = 1.0, .seed = 32});
  const auto net = normalize(fixtures::load(jsonl), cfg, 1);
  const auto sn = simplified(jsonl);
  const OrientationIndex idx(orientation_by_cell(net, cfg, 1, {}));
  for (CostModel m : {CostModel::orientation_raw, CostModel::orientation_inverse}) {
    const auto r = astar(sn, {1, 0, 0}, {1, 5, 5}, m, &idx, cfg);
    EXPECT_FALSE(r.links.empty());
    EXPECT_EQ(sn.nodes().at(r.nodes.back().id).cell, (CellId{1, 5, 5}));
    double cost = 0;
    for (std::size_t i = 0; i + 1 < r.cells.size(); ++i) cost += orientation_cost(idx, r.cells[i], r.cells[i + 1], m, cfg);
    EXPECT_EQ(r.total_cost, cost);
    EXPECT_EQ(astar(sn, {1, 0, 0}, {1, 5, 5}, m, &idx, cfg), r);
    EXPECT_GE(r.total_weight, astar(sn, {1, 0, 0}, {1, 5, 5}, CostModel::euclidean).total_weight - 1e-9);
  }
}

TEST(RouteGeojson, LineStringAndCells) {
  const auto sn = simplified(fixtures::corridor_jsonl());
  Route r = astar(sn, A, C, CostModel::euclidean);
  const auto doc = nlohmann::json::parse(route_to_geojson(r, GridConfig{}));
  EXPECT_FALSE(oracles::geojson_error(doc)) << *oracles::geojson_error(doc);
  const auto& line = doc["features"][0];
  EXPECT_EQ(line["geometry"]["type"], "LineString");
  EXPECT_EQ(line["geometry"]["coordinates"].size(), r.links.size() + 1);
  EXPECT_EQ(doc["features"].size(), 1 + r.cells.size());
  EXPECT_EQ(line["properties"]["link_types"].size(), r.links.size());

  Route two;
  two.nodes = {{"a", 0, 0}, {"b", 1, 0}, {"c", 2, 0}};
  two.links = {{"a", "b", LinkType::intra, 1, A}, {"b", "c", LinkType::cross_E, 1, A}};
  two.cells = {A};
  const auto d2 = nlohmann::json::parse(route_to_geojson(two, GridConfig{}));
  EXPECT_EQ(d2["features"][0]["geometry"]["coordinates"].size(), 3u);
  EXPECT_EQ(route_to_geojson(r, GridConfig{}), route_to_geojson(astar(sn, A, C, CostModel::euclidean), GridConfig{}));
}

TEST(CostModel, Names) {
  for (CostModel m : {CostModel::euclidean, CostModel::orientation_raw, CostModel::orientation_inverse})
    EXPECT_EQ(parse_cost_model(to_string(m)), m);
  EXPECT_FALSE(parse_cost_model("fastest"));
}
