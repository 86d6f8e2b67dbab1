#pragma once

// Threshold (bottleneck) connectivity. For a pair (a, b) and a map into some
// metric, the threshold distance is the least D such that a and b are joined
// inside {v : img(v,a) <= D and img(v,b) <= D}. It is the lower side of the
// pullback bracket and of the bounded-turning bracket.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "qrgeom/parallel.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

// img(v, w) is the image-side distance between source vertices v and w.
using ImageDistance = std::function<double(std::size_t, std::size_t)>;

namespace detail {

// Minimax Dijkstra: minimizes the largest vertex cost along a path from a to b.
inline std::pair<double, std::vector<std::size_t>> minimax_path(const Space& graph, const ImageDistance& img,
                                                                std::size_t a, std::size_t b) {
  const std::size_t n = graph.size();
  std::vector<double> best(n, kInf);
  std::vector<std::size_t> pred(n, n);
  auto cost = [&](std::size_t v) { return std::max(img(v, a), img(v, b)); };
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  best[a] = cost(a);
  heap.push({best[a], a});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > best[u]) continue;
    if (u == b) break;
    for (const auto& inc : graph.neighbors(u)) {
      const double nd = std::max(d, cost(inc.to));
      if (nd < best[inc.to]) {
        best[inc.to] = nd;
        pred[inc.to] = u;
        heap.push({nd, inc.to});
      }
    }
  }
  std::vector<std::size_t> path;
  if (best[b] < kInf) {
    for (std::size_t v = b; v != n; v = pred[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
  }
  return {best[b], std::move(path)};
}

// Shortest path by edge length from a to b (ties toward smaller predecessor ids).
inline std::vector<std::size_t> geodesic_path(const Space& graph, std::size_t a, std::size_t b) {
  const std::size_t n = graph.size();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> pred(n, n);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[a] = 0.0;
  heap.push({0.0, a});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& inc : graph.neighbors(u)) {
      const double nd = d + graph.edges()[inc.edge].len;
      if (nd < dist[inc.to] - 1e-15) {
        dist[inc.to] = nd;
        pred[inc.to] = u;
        heap.push({nd, inc.to});
      }
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t v = b; v != n; v = pred[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

inline double threshold_distance(const Space& graph, const ImageDistance& img, std::size_t a, std::size_t b) {
  if (a == b) return 0.0;
  return detail::minimax_path(graph, img, a, b).first;
}

// All-pairs threshold distances; parallel over rows, deterministic.
inline DistanceMatrix threshold_matrix(const Space& graph, const ImageDistance& img) {
  const std::size_t n = graph.size();
  if (!is_connected(graph, all_vertices(graph))) throw ValidationError("disconnected");
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) out(a, b) = threshold_distance(graph, img, a, b);
  });
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
  return out;
}

struct TurningBracket {
  double lower = 1.0;
  double upper = 1.0;
};

// Bracket for the bounded-turning constant c = max over pairs of
// (min over joining paths of diam)/dist. Lower side: threshold distances.
// Upper side: the better of 2x threshold and the diameter of the graph geodesic.
inline TurningBracket bounded_turning_constant(const Space& s) {
  const ImageDistance img = [&](std::size_t v, std::size_t w) { return s.dist(v, w); };
  const auto lower = threshold_matrix(s, img);
  TurningBracket res;
  const std::size_t n = s.size();
  std::vector<double> row_lo(n, 1.0), row_hi(n, 1.0);
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = s.dist(a, b);
      if (d <= kDistTol) continue;
      const auto geo = normalize(detail::geodesic_path(s, a, b));
      const double hi = std::min(2.0 * lower(a, b), diameter(s, geo));
      row_lo[a] = std::max(row_lo[a], lower(a, b) / d);
      row_hi[a] = std::max(row_hi[a], hi / d);
    }
  });
  for (std::size_t a = 0; a < n; ++a) {
    res.lower = std::max(res.lower, row_lo[a]);
    res.upper = std::max(res.upper, row_hi[a]);
  }
  return res;
}

}  // namespace qrgeom
