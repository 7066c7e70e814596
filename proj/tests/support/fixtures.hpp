#pragma once

// Synthetic street networks shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridskg/streetnet.hpp"

namespace fixtures {

using nlohmann::json;

inline std::string node_line(const std::string& id, double x, double y) {
  return json{{"type", "node"}, {"id", id}, {"x", x}, {"y", y}}.dump() + "\n";
}

inline std::string edge_line(const std::string& id, const std::string& from, const std::string& to, bool oneway,
                             const std::string& cls = "primary", int lanes = 1) {
  return json{{"type", "edge"}, {"id", id},         {"from", from},  {"to", to},
              {"class", cls},   {"oneway", oneway}, {"lanes", lanes}}
             .dump() +
         "\n";
}

inline gridskg::StreetNetwork load(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return gridskg::load_network(in);
}

/// Two-way corridor p(500,500) - q(1500,500) - r(2500,500): crosses L1.0.1
/// with an interior node.
inline std::string corridor_jsonl() {
  return node_line("p", 500, 500) + node_line("q", 1500, 500) + node_line("r", 2500, 500) +
         edge_line("pq", "p", "q", false) + edge_line("qr", "q", "r", false);
}

/// Three cells in a row, two parallel east-west corridors (y=500 and y=2500)
/// joined by north-south streets at both ends.
inline std::string two_corridors_jsonl() {
  std::string s;
  for (int row : {0, 2})
    for (int i = 0; i < 4; ++i)
      s += node_line("n" + std::to_string(row) + "_" + std::to_string(i), 300 + 800.0 * i, 500 + 1000.0 * row);
  for (int row : {0, 2})
    for (int i = 0; i < 3; ++i)
      s += edge_line("h" + std::to_string(row) + "_" + std::to_string(i), "n" + std::to_string(row) + "_" + std::to_string(i),
                     "n" + std::to_string(row) + "_" + std::to_string(i + 1), false);
  s += edge_line("v0", "n0_0", "n2_0", false);
  s += edge_line("v3", "n0_3", "n2_3", false);
  return s;
}

struct LatticeOptions {
  int cells = 20;           // square area of cells x cells
  double cell_size = 1000;  // level-1 edge, origin at 0
  double spacing = 700;     // nominal node spacing
  double jitter = 0.2;      // fraction of spacing
  double two_way = 0.7;     // probability a street is two-way
  double drop = 0.08;       // probability a street is omitted
  std::uint64_t seed = 1;
};

/// Jittered square lattice inside [0, cells*cell_size)^2 as JSONL.
inline std::string lattice_jsonl(const LatticeOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double extent = o.cells * o.cell_size;
  const int n = static_cast<int>(std::floor((extent - o.spacing) / o.spacing)) + 1;
  const double margin = (extent - (n - 1) * o.spacing) / 2;
  std::string out;
  auto id = [](int i, int j) { return "n" + std::to_string(i) + "_" + std::to_string(j); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = (unit(rng) * 2 - 1) * o.jitter * o.spacing;
      const double dy = (unit(rng) * 2 - 1) * o.jitter * o.spacing;
      out += node_line(id(i, j), margin + j * o.spacing + dx, margin + i * o.spacing + dy);
    }
  static const char* kClasses[] = {"motorway", "trunk", "primary", "secondary"};
  std::size_t e = 0;
  auto street = [&](const std::string& a, const std::string& b) {
    if (unit(rng) < o.drop) return;
    const bool oneway = unit(rng) >= o.two_way;
    const bool flip = unit(rng) < 0.5;
    const int lanes = 1 + static_cast<int>(unit(rng) * 3);
    out += edge_line("e" + std::to_string(e), flip ? b : a, flip ? a : b, oneway, kClasses[e % 4], lanes);
    ++e;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j + 1 < n) street(id(i, j), id(i, j + 1));
      if (i + 1 < n) street(id(i, j), id(i + 1, j));
    }
  return out;
}

/// Random straight segments (uniform bearing, length 1..max_len) whose
/// endpoints stay inside [0, extent)^2.
inline std::string random_segments_jsonl(int count, double extent, double max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out;
  for (int k = 0; k < count;) {
    const double len = 1 + unit(rng) * (max_len - 1);
    const double b = unit(rng) * 2 * M_PI;
    const double x0 = unit(rng) * extent, y0 = unit(rng) * extent;
    const double x1 = x0 + len * std::sin(b), y1 = y0 + len * std::cos(b);
    if (x1 < 0 || y1 < 0 || x1 >= extent || y1 >= extent) continue;
    const std::string a = "a" + std::to_string(k), z = "z" + std::to_string(k);
    out += node_line(a, x0, y0) + node_line(z, x1, y1);
    out += edge_line("s" + std::to_string(k), a, z, true, "primary", 1 + static_cast<int>(unit(rng) * 4));
    ++k;
  }
  return out;
}

}  // namespace fixtures
