#pragma once

// Curve samples and curve functionals shared by the BLD/BDD style checkers.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "qrgeom/space.hpp"
#include "qrgeom/threshold.hpp"

namespace qrgeom {

struct CurveSample {
  std::vector<Curve> curves;
  bool truncated = false;  // enumeration stopped at max_count
  std::uint64_t seed = 0;
};

// All simple paths with 1..max_edges edges, each undirected path once
// (kept in the orientation whose first vertex is smaller than the last).
inline CurveSample enumerate_simple_paths(const Space& s, std::size_t max_edges, std::size_t max_count = 200000) {
  CurveSample out;
  std::vector<std::size_t> path;
  std::vector<char> on(s.size(), 0);
  std::function<void(std::size_t)> dfs = [&](std::size_t u) {
    if (out.truncated) return;
    if (path.size() >= 2 && path.front() < path.back()) {
      if (out.curves.size() >= max_count) {
        out.truncated = true;
        return;
      }
      out.curves.push_back({path});
    }
    if (path.size() > max_edges) return;
    for (const auto& inc : s.neighbors(u)) {
      if (on[inc.to]) continue;
      on[inc.to] = 1;
      path.push_back(inc.to);
      dfs(inc.to);
      path.pop_back();
      on[inc.to] = 0;
    }
  };
  for (std::size_t v = 0; v < s.size() && !out.truncated; ++v) {
    path = {v};
    on[v] = 1;
    dfs(v);
    on[v] = 0;
  }
  return out;
}

// Self-avoiding random walks; each stops when stuck or at max_edges.
inline std::vector<Curve> random_simple_paths(const Space& s, std::size_t count, std::size_t max_edges,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Curve> out;
  if (s.size() < 2) return out;
  std::uniform_int_distribution<std::size_t> pick_start(0, s.size() - 1);
  std::vector<char> on(s.size(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    Curve c{{pick_start(rng)}};
    std::fill(on.begin(), on.end(), 0);
    on[c.vertices[0]] = 1;
    while (c.vertices.size() <= max_edges) {
      std::vector<std::size_t> next;
      for (const auto& inc : s.neighbors(c.vertices.back()))
        if (!on[inc.to]) next.push_back(inc.to);
      if (next.empty()) break;
      const auto w = next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)];
      on[w] = 1;
      c.vertices.push_back(w);
    }
    if (c.vertices.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

inline CurveSample curve_sample(const Space& s, std::size_t max_edges, std::size_t random_count, std::uint64_t seed,
                                std::size_t max_count = 200000) {
  auto sample = enumerate_simple_paths(s, max_edges, max_count);
  auto extra = random_simple_paths(s, random_count, s.size(), seed);
  sample.curves.insert(sample.curves.end(), extra.begin(), extra.end());
  sample.seed = seed;
  return sample;
}

// Length as the sum of consecutive distances. Along graph edges of a path-metric
// space this is the edge-length sum.
inline double chord_length(const ImageDistance& d, const Curve& c) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) len += d(c.vertices[i], c.vertices[i + 1]);
  return len;
}

inline double chord_diameter(const ImageDistance& d, const Curve& c) {
  double out = 0.0;
  for (std::size_t i = 0; i < c.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < c.vertices.size(); ++j) out = std::max(out, d(c.vertices[i], c.vertices[j]));
  return out;
}

// Least L with a/L <= b <= L*a. Infinite when exactly one side vanishes.
inline double two_sided_ratio(double a, double b) {
  if (a <= kDistTol && b <= kDistTol) return 1.0;
  if (a <= kDistTol || b <= kDistTol) return kInf;
  return std::max(a / b, b / a);
}

}  // namespace qrgeom
