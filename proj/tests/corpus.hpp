#pragma once

// Named maps and spaces shared by the unit tests and the acceptance run.

#include <string>
#include <utility>
#include <vector>

#include "qrgeom/qrgeom.hpp"

namespace qrgeom::testing {

struct NamedSpace {
  std::string name;
  SpacePtr space;
};

struct NamedMap {
  std::string name;
  VertexMap f;
  bool geodesic_edges;  // every edge realizes the distance between its ends
};

inline std::vector<NamedSpace> corpus_spaces() {
  return {
      {"path5", gen_path(5)},
      {"cycle6", gen_cycle(6)},
      {"grid3x3", gen_grid(3, 3)},
      {"grid4x2_stretched", gen_grid(4, 2, 2.0, 1.0)},
      {"annulus2x6", gen_polar_grid(2, 6, 0.5, 1.0)},
      {"disk2x5", gen_polar_grid(2, 5, 0.0, 1.0)},
  };
}

inline bool edges_geodesic(const Space& s) {
  for (const auto& e : s.edges())
    if (std::abs(s.dist(e.u, e.v) - e.len) > kDistTol) return false;
  return true;
}

// Sources of at most 17 vertices, so the exact pullback metric runs with a cap of 17.
inline constexpr std::size_t kCorpusExactCap = 17;

inline std::vector<NamedMap> corpus_maps() {
  std::vector<NamedMap> out;
  auto add = [&](std::string name, VertexMap f) {
    const bool geo = edges_geodesic(f.source());
    out.push_back({std::move(name), std::move(f), geo});
  };
  for (const auto& s : corpus_spaces()) add("identity_" + s.name, identity_map(s.space));
  add("winding2_1x6", gen_winding(2, 1, 6));
  add("winding2_1x8", gen_winding(2, 1, 8));
  add("winding3_1x4", gen_winding(3, 1, 4));
  add("cycle_cover_6_2", gen_cycle_cover(6, 2));
  add("cycle_cover_4_3", gen_cycle_cover(4, 3));
  add("stretch_3x2_t3", gen_stretch(3, 2, 3.0));
  for (std::uint64_t seed = 1; seed <= 4; ++seed) add("random_" + std::to_string(seed), gen_random_map(9, 5, seed));
  return out;
}

// Rings of a disk grid with one center vertex: ring i holds sectors vertices from 1 + i*sectors.
inline VertexSet disk_ring(std::size_t i, std::size_t sectors) {
  VertexSet r;
  for (std::size_t j = 0; j < sectors; ++j) r.push_back(1 + i * sectors + j);
  return r;
}

// Annulus families in the source of a winding map, away from the center.
inline std::vector<ConnectSpec> winding_annuli(const VertexMap& f, std::size_t levels) {
  const std::size_t S = (f.source().size() - 1) / levels;
  std::vector<std::pair<std::size_t, std::size_t>> pairs{{levels / 4, levels - 1}, {levels / 2 - 1, levels - 1}, {0, levels / 2}};
  std::vector<ConnectSpec> out;
  for (auto [a, b] : pairs) {
    if (a >= b) continue;
    ConnectSpec c{disk_ring(a, S), disk_ring(b, S), {}};
    for (std::size_t i = a; i <= b; ++i) {
      const auto r = disk_ring(i, S);
      c.within.insert(c.within.end(), r.begin(), r.end());
    }
    c.within = normalize(c.within);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace qrgeom::testing
