#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "qrgeom/qrgeom.hpp"

namespace qrgeom::testing {

// All-pairs shortest paths by Floyd-Warshall on the edge list.
inline std::vector<std::vector<double>> floyd(const Space& s) {
  const std::size_t n = s.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : s.edges()) {
    d[e.u][e.v] = std::min(d[e.u][e.v], e.len);
    d[e.v][e.u] = std::min(d[e.v][e.u], e.len);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline bool mask_connected(const Space& s, std::uint32_t mask) {
  if (mask == 0) return false;
  std::uint32_t seen = mask & (~mask + 1), frontier = seen;
  while (frontier) {
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < s.size(); ++v)
      if (frontier >> v & 1u)
        for (const auto& inc : s.neighbors(v))
          if ((mask >> inc.to & 1u) && !(seen >> inc.to & 1u)) next |= 1u << inc.to;
    seen |= next;
    frontier = next;
  }
  return seen == mask;
}

// Pullback distance by brute force: least image diameter over every connected vertex
// subset containing both points. Sources up to ~16 vertices.
inline std::vector<std::vector<double>> pullback_bruteforce(const VertexMap& f) {
  const Space& X = f.source();
  const std::size_t n = X.size();
  std::vector<std::vector<double>> best(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) best[i][i] = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) < 2 || !mask_connected(X, mask)) continue;
    double diam = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1u)
        for (std::size_t b = a + 1; b < n; ++b)
          if (mask >> b & 1u) diam = std::max(diam, f.image_dist(a, b));
    for (std::size_t a = 0; a < n; ++a)
      if (mask >> a & 1u)
        for (std::size_t b = a + 1; b < n; ++b)
          if (mask >> b & 1u && diam < best[a][b]) best[a][b] = best[b][a] = diam;
  }
  return best;
}

// Number of preimages of y, counted directly.
inline std::size_t count_preimages(const VertexMap& f, std::size_t y) {
  std::size_t c = 0;
  for (std::size_t x = 0; x < f.source().size(); ++x) c += f(x) == y;
  return c;
}

}  // namespace qrgeom::testing
