#pragma once

// Example spaces and maps.

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <algorithm>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qrgeom/covering.hpp"
#include "qrgeom/error.hpp"
#include "qrgeom/pullback.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

inline SpacePtr make_space(SpaceData d) { return std::make_shared<const Space>(std::move(d)); }

namespace detail {

// Rings of `sectors` vertices; consecutive sectors subtend `sector_angle` (which
// need not be 2pi/sectors: a larger total angle gives a cone). Radial and chord
// edges; each vertex gets a quarter of every incident annular cell, and the center
// vertex of a disk takes the whole inner disk.
inline SpaceData polar_grid_data(std::size_t levels, std::size_t sectors, double r0, double r1, double sector_angle) {
  const bool disk = r0 == 0.0;
  std::vector<double> radii;
  if (disk) {
    for (std::size_t i = 1; i <= levels; ++i) radii.push_back(r1 * static_cast<double>(i) / static_cast<double>(levels));
  } else {
    for (std::size_t i = 0; i < levels; ++i)
      radii.push_back(r0 + (r1 - r0) * static_cast<double>(i) / static_cast<double>(levels - 1));
  }
  SpaceData d;
  const std::size_t offset = disk ? 1 : 0;
  if (disk) {
    d.ids.push_back("c");
    d.masses.push_back(0.5 * sector_angle * static_cast<double>(sectors) * radii[0] * radii[0]);
  }
  auto id = [&](std::size_t i, std::size_t j) { return offset + i * sectors + j; };
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = 0; j < sectors; ++j) {
      d.ids.push_back("r" + std::to_string(i) + "s" + std::to_string(j));
      d.masses.push_back(0.0);
    }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    const double cell = 0.5 * sector_angle * (radii[i + 1] * radii[i + 1] - radii[i] * radii[i]);
    for (std::size_t j = 0; j < sectors; ++j) {
      const std::size_t jn = (j + 1) % sectors;
      for (auto v : {id(i, j), id(i, jn), id(i + 1, j), id(i + 1, jn)}) d.masses[v] += 0.25 * cell;
    }
  }
  const double chord = 2.0 * std::sin(0.5 * sector_angle);
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = 0; j < sectors; ++j) {
      d.edges.push_back({id(i, j), id(i, (j + 1) % sectors), radii[i] * chord});
      if (i + 1 < radii.size()) d.edges.push_back({id(i, j), id(i + 1, j), radii[i + 1] - radii[i]});
    }
  if (disk)
    for (std::size_t j = 0; j < sectors; ++j) d.edges.push_back({0, id(0, j), radii[0]});
  return d;
}

inline void check_polar_args(std::size_t levels, std::size_t sectors, double r0, double r1) {
  if (sectors < 3) throw ValidationError("polar grid needs at least 3 sectors");
  if (!(r0 >= 0.0) || !(r1 > 0.0)) throw ValidationError("polar grid radii must be nonnegative");
  if (std::abs(r1 - r0) <= kDistTol) throw ValidationError("degenerate polar grid: r0 = r1");
  if (r1 < r0) throw ValidationError("polar grid needs r0 < r1");
  if (r0 == 0.0 ? levels < 1 : levels < 2) throw ValidationError("polar grid needs more radial levels");
}

}  // namespace detail

// r0 = 0: disk of `levels` rings around a center vertex. r0 > 0: annulus with
// `levels` rings from r0 to r1.
inline SpacePtr gen_polar_grid(std::size_t levels, std::size_t sectors, double r0, double r1) {
  detail::check_polar_args(levels, sectors, r0, r1);
  return make_space(detail::polar_grid_data(levels, sectors, r0, r1, 2.0 * std::numbers::pi / sectors));
}

// Winding map (rho, theta) -> (rho, k theta) from a disk grid with k*sectors sectors
// onto a disk grid with `sectors`. With `cone` the source carries the cone metric of
// total angle 2k pi (chords and cells measured at angle 2pi/sectors), so that the
// map is a local isometry off the center; otherwise the source is the flat disk.
inline VertexMap gen_winding(std::size_t k, std::size_t levels, std::size_t sectors, double r1 = 1.0, bool cone = true) {
  if (k < 1) throw ValidationError("winding degree must be positive");
  detail::check_polar_args(levels, sectors, 0.0, r1);
  const double target_angle = 2.0 * std::numbers::pi / sectors;
  auto target = make_space(detail::polar_grid_data(levels, sectors, 0.0, r1, target_angle));
  auto source = make_space(detail::polar_grid_data(levels, k * sectors, 0.0, r1,
                                                   cone ? target_angle : target_angle / static_cast<double>(k)));
  std::vector<std::size_t> assign(source->size());
  assign[0] = 0;
  for (std::size_t i = 0; i < levels; ++i)
    for (std::size_t j = 0; j < k * sectors; ++j) assign[1 + i * k * sectors + j] = 1 + i * sectors + j % sectors;
  return VertexMap(source, target, std::move(assign));
}

inline SpacePtr gen_cycle(std::size_t n, double len = 1.0) {
  if (n < 3) throw ValidationError("cycle needs at least 3 vertices");
  SpaceData d;
  for (std::size_t i = 0; i < n; ++i) {
    d.ids.push_back("v" + std::to_string(i));
    d.masses.push_back(len);
    d.edges.push_back({i, (i + 1) % n, len});
  }
  return make_space(std::move(d));
}

inline SpacePtr gen_path(std::size_t n, double len = 1.0) {
  if (n < 1) throw ValidationError("path needs a vertex");
  SpaceData d;
  for (std::size_t i = 0; i < n; ++i) {
    d.ids.push_back("v" + std::to_string(i));
    d.masses.push_back(1.0);
    if (i + 1 < n) d.edges.push_back({i, i + 1, len});
  }
  return make_space(std::move(d));
}

// mn-cycle onto n-cycle, t -> t mod n; unit edges on both sides.
inline VertexMap gen_cycle_cover(std::size_t n, std::size_t m) {
  if (m < 1) throw ValidationError("cover degree must be positive");
  auto target = gen_cycle(n);
  auto source = gen_cycle(n * m);
  std::vector<std::size_t> assign(n * m);
  for (std::size_t t = 0; t < n * m; ++t) assign[t] = t % n;
  return VertexMap(source, target, std::move(assign));
}

// w x h grid with spacings (dx, dy); masses are quarter shares of the cells.
inline SpacePtr gen_grid(std::size_t w, std::size_t h, double dx = 1.0, double dy = 1.0) {
  if (w < 1 || h < 1) throw ValidationError("grid needs positive dimensions");
  SpaceData d;
  auto id = [&](std::size_t i, std::size_t j) { return j * w + i; };
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      d.ids.push_back("g" + std::to_string(i) + "_" + std::to_string(j));
      d.masses.push_back(0.0);
    }
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      if (i + 1 < w) d.edges.push_back({id(i, j), id(i + 1, j), dx});
      if (j + 1 < h) d.edges.push_back({id(i, j), id(i, j + 1), dy});
      if (i + 1 < w && j + 1 < h)
        for (auto v : {id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)}) d.masses[v] += 0.25 * dx * dy;
    }
  if (w == 1 || h == 1)
    for (auto& m : d.masses) m = 1.0;
  return make_space(std::move(d));
}

// Identity on indices from the unit grid onto the grid stretched by t horizontally.
inline VertexMap gen_stretch(std::size_t w, std::size_t h, double t) {
  if (!(t > 0.0)) throw ValidationError("stretch factor must be positive");
  auto source = gen_grid(w, h);
  auto target = gen_grid(w, h, t, 1.0);
  std::vector<std::size_t> assign(source->size());
  std::iota(assign.begin(), assign.end(), std::size_t{0});
  return VertexMap(source, target, std::move(assign));
}

inline VertexMap identity_map(const SpacePtr& s) {
  std::vector<std::size_t> assign(s->size());
  std::iota(assign.begin(), assign.end(), std::size_t{0});
  return VertexMap(s, s, std::move(assign));
}

// Random connected source graph on n vertices, random surjection onto k labels, and
// the quotient graph (plus a few extra edges) with random lengths as the target.
inline VertexMap gen_random_map(std::size_t n, std::size_t k, std::uint64_t seed, double extra_edge_prob = 0.2) {
  if (n < 1 || k < 1 || k > n) throw ValidationError("random map needs 1 <= k <= n");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> len(0.5, 2.0), unit(0.0, 1.0);
  SpaceData src;
  for (std::size_t i = 0; i < n; ++i) {
    src.ids.push_back("x" + std::to_string(i));
    src.masses.push_back(len(rng));
  }
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    adj[i][j] = adj[j][i] = 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!adj[i][j] && unit(rng) < extra_edge_prob) adj[i][j] = adj[j][i] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (adj[i][j]) src.edges.push_back({i, j, len(rng)});

  std::vector<std::size_t> assign(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < n; ++i)
    assign[perm[i]] = i < k ? i : std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);

  SpaceData tgt;
  for (std::size_t y = 0; y < k; ++y) {
    tgt.ids.push_back("y" + std::to_string(y));
    tgt.masses.push_back(len(rng));
  }
  std::vector<std::vector<char>> tadj(k, std::vector<char>(k, 0));
  for (const auto& e : src.edges) {
    const auto a = assign[e.u], b = assign[e.v];
    if (a != b) tadj[a][b] = tadj[b][a] = 1;
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (!tadj[a][b] && unit(rng) < extra_edge_prob * 0.5) tadj[a][b] = tadj[b][a] = 1;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (tadj[a][b]) tgt.edges.push_back({a, b, len(rng)});
  return VertexMap(make_space(std::move(src)), make_space(std::move(tgt)), std::move(assign));
}

// Pullback space of f under the exact metric, as a standalone Space.
inline SpacePtr gen_pullback_space(const VertexMap& f, std::size_t cap = kDefaultExactCap) {
  return factorize(f, MetricChoice::exact, cap).pullback_space;
}

}  // namespace qrgeom
