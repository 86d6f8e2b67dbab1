#pragma once

// Finite metric measure spaces: a weighted graph with vertex masses and a
// pairwise distance matrix (the graph's path metric unless given explicitly).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qrgeom/error.hpp"
#include "qrgeom/parallel.hpp"

namespace qrgeom {

inline constexpr double kDistTol = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

using VertexSet = std::vector<std::size_t>;  // sorted, unique

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double len = 1.0;
};

// Raw, unvalidated description of a space as read from disk or built by a generator.
struct SpaceData {
  std::vector<std::string> ids;
  std::vector<double> masses;
  std::vector<Edge> edges;
  std::optional<DistanceMatrix> dist;  // nullopt: use the path metric of the edge graph
};

struct Incidence {
  std::size_t to;
  std::size_t edge;
};

namespace detail {

inline std::vector<std::vector<Incidence>> build_adjacency(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<Incidence>> adj(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].u].push_back({edges[e].v, e});
    adj[edges[e].v].push_back({edges[e].u, e});
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end(), [](const Incidence& a, const Incidence& b) { return a.to < b.to; });
  }
  return adj;
}

inline std::vector<double> dijkstra(const std::vector<std::vector<Incidence>>& adj, const std::vector<Edge>& edges,
                                    std::size_t source) {
  std::vector<double> dist(adj.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& inc : adj[u]) {
      const double nd = d + edges[inc.edge].len;
      if (nd < dist[inc.to]) {
        dist[inc.to] = nd;
        heap.push({nd, inc.to});
      }
    }
  }
  return dist;
}

inline std::size_t count_components(const std::vector<std::vector<Incidence>>& adj) {
  std::vector<char> seen(adj.size(), 0);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (seen[s]) continue;
    ++count;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& inc : adj[u]) {
        if (!seen[inc.to]) {
          seen[inc.to] = 1;
          stack.push_back(inc.to);
        }
      }
    }
  }
  return count;
}

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace detail

// All-pairs shortest-path distances of a graph with positive edge lengths.
inline DistanceMatrix path_metric(std::size_t n, const std::vector<Edge>& edges) {
  const auto adj = detail::build_adjacency(n, edges);
  if (n > 0 && detail::count_components(adj) != 1) throw ValidationError("disconnected");
  DistanceMatrix dist(n);
  parallel_for(n, [&](std::size_t s) {
    const auto row = detail::dijkstra(adj, edges, s);
    for (std::size_t t = 0; t < n; ++t) dist(s, t) = row[t];
  });
  // Dijkstra sums in different orders from each end; make the matrix exactly symmetric.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist(j, i) = dist(i, j) = std::min(dist(i, j), dist(j, i));
  return dist;
}

// Metric-axiom scan of a matrix (pseudo-metrics pass). Returns itemized findings.
inline std::vector<std::string> metric_findings(const DistanceMatrix& d, double tol = kDistTol,
                                                std::size_t max_items = 20) {
  std::vector<std::string> out;
  const std::size_t n = d.size();
  auto add = [&](std::string s) {
    if (out.size() < max_items) out.push_back(std::move(s));
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > tol) add("dist diagonal nonzero at " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j))) add("dist entry invalid at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (j > i && std::abs(d(i, j) - d(j, i)) > tol)
        add("dist not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  if (!out.empty()) return out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d(i, k) > d(i, j) + d(j, k) + tol) {
          add("triangle inequality fails for (" + std::to_string(i) + "," + std::to_string(j) + "," +
              std::to_string(k) + ")");
          if (out.size() >= max_items) return out;
        }
  return out;
}

// Full invariant scan of raw space data.
inline std::vector<std::string> space_findings(const SpaceData& data) {
  std::vector<std::string> out;
  const std::size_t n = data.ids.size();
  if (data.masses.size() != n) out.push_back("masses length differs from vertex count");
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.emplace(data.ids[i], i).second) out.push_back("duplicate vertex id '" + data.ids[i] + "'");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.masses.size(); ++i) {
    if (!(data.masses[i] >= 0.0) || !std::isfinite(data.masses[i]))
      out.push_back("negative or invalid mass at '" + (i < n ? data.ids[i] : std::to_string(i)) + "'");
    else
      total += data.masses[i];
  }
  if (n > 0 && !(total > 0.0)) out.push_back("total mass is not positive");
  if (n == 0) out.push_back("empty vertex set");
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  bool edges_ok = true;
  for (std::size_t e = 0; e < data.edges.size(); ++e) {
    const auto& ed = data.edges[e];
    if (ed.u >= n || ed.v >= n) {
      out.push_back("edge " + std::to_string(e) + " references unknown vertex");
      edges_ok = false;
      continue;
    }
    if (ed.u == ed.v) out.push_back("self loop at '" + data.ids[ed.u] + "'");
    if (!(ed.len > 0.0) || !std::isfinite(ed.len))
      out.push_back("edge length must be positive: " + data.ids[ed.u] + "-" + data.ids[ed.v]);
    auto key = std::minmax(ed.u, ed.v);
    if (!pairs.emplace(std::pair{key.first, key.second}, e).second)
      out.push_back("duplicate edge " + data.ids[ed.u] + "-" + data.ids[ed.v]);
  }
  if (edges_ok && n > 0) {
    const auto adj = detail::build_adjacency(n, data.edges);
    if (detail::count_components(adj) != 1) out.push_back("disconnected");
  }
  if (data.dist) {
    if (data.dist->size() != n) {
      out.push_back("dist matrix size differs from vertex count");
    } else {
      auto m = metric_findings(*data.dist);
      out.insert(out.end(), m.begin(), m.end());
    }
  }
  return out;
}

class Space {
 public:
  Space() = default;

  explicit Space(SpaceData data) {
    auto findings = space_findings(data);
    if (!findings.empty()) throw ValidationError(std::move(findings));
    ids_ = std::move(data.ids);
    masses_ = std::move(data.masses);
    edges_ = std::move(data.edges);
    adj_ = detail::build_adjacency(ids_.size(), edges_);
    path_metric_ = !data.dist.has_value();
    dist_ = data.dist ? std::move(*data.dist) : path_metric(ids_.size(), edges_);
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::size_t index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw ValidationError("unknown vertex-id '" + std::string(id) + "'");
    return it->second;
  }

  double mass(std::size_t i) const { return masses_.at(i); }
  std::span<const double> masses() const noexcept { return masses_; }
  double total_mass() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Incidence> neighbors(std::size_t i) const { return adj_.at(i); }

  std::optional<std::size_t> edge_between(std::size_t u, std::size_t v) const {
    for (const auto& inc : adj_.at(u))
      if (inc.to == v) return inc.edge;
    return std::nullopt;
  }

  double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const DistanceMatrix& dist() const noexcept { return dist_; }
  bool is_path_metric() const noexcept { return path_metric_; }

  SpaceData data() const { return {ids_, masses_, edges_, path_metric_ ? std::nullopt : std::optional{dist_}}; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> masses_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adj_;
  DistanceMatrix dist_;
  bool path_metric_ = true;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const Space>;

// ---------------------------------------------------------------------------
// Vertex-set helpers

inline VertexSet all_vertices(const Space& s) {
  VertexSet v(s.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

inline VertexSet normalize(VertexSet v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool is_subset(const VertexSet& a, const VertexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

inline bool intersects(const VertexSet& a, const VertexSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<char> to_mask(std::size_t n, const VertexSet& s) {
  std::vector<char> m(n, 0);
  for (auto v : s) m.at(v) = 1;
  return m;
}

// ---------------------------------------------------------------------------
// Balls, components, diameters

inline VertexSet ball(const Space& s, std::size_t center, double r) {
  if (center >= s.size()) throw ValidationError("unknown vertex-id " + std::to_string(center));
  VertexSet out;
  for (std::size_t v = 0; v < s.size(); ++v)
    if (s.dist(center, v) < r - kDistTol) out.push_back(v);
  return out;
}

inline VertexSet ball_closed(const Space& s, std::size_t center, double r) {
  if (center >= s.size()) throw ValidationError("unknown vertex-id " + std::to_string(center));
  VertexSet out;
  for (std::size_t v = 0; v < s.size(); ++v)
    if (s.dist(center, v) <= r + kDistTol) out.push_back(v);
  return out;
}

// Connected components of the induced subgraph, each sorted, ordered by smallest member.
inline std::vector<VertexSet> components(const Space& s, const VertexSet& set) {
  const auto in = to_mask(s.size(), set);
  std::vector<char> seen(s.size(), 0);
  std::vector<VertexSet> out;
  std::vector<std::size_t> stack;
  for (auto start : set) {
    if (seen[start]) continue;
    VertexSet comp;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (const auto& inc : s.neighbors(u)) {
        if (in[inc.to] && !seen[inc.to]) {
          seen[inc.to] = 1;
          stack.push_back(inc.to);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

inline VertexSet component_of(const Space& s, const VertexSet& set, std::size_t x) {
  for (auto& c : components(s, set))
    if (std::binary_search(c.begin(), c.end(), x)) return c;
  return {};
}

inline bool is_connected(const Space& s, const VertexSet& set) { return components(s, set).size() <= 1; }

inline double diameter(const Space& s, const VertexSet& set) {
  if (set.empty()) throw ValidationError("diameter of empty set");
  double d = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b) d = std::max(d, s.dist(set[a], set[b]));
  return d;
}

inline double diameter(const DistanceMatrix& dm, const VertexSet& set) {
  if (set.empty()) throw ValidationError("diameter of empty set");
  double d = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b) d = std::max(d, dm(set[a], set[b]));
  return d;
}

// Distinct values of a distance row, ascending, merged at kDistTol.
inline std::vector<double> distinct_values(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x > out.back() + kDistTol) out.push_back(x);
  return out;
}

// Radii at which the open ball around `center` changes: every positive distance
// value from the center, then one radius past the farthest vertex.
inline std::vector<double> candidate_radii(const Space& s, std::size_t center) {
  auto values = distinct_values(s.dist().row(center));
  std::vector<double> out;
  for (double x : values)
    if (x > kDistTol) out.push_back(x);
  const double top = values.empty() ? 0.0 : values.back();
  out.push_back(top > 0.0 ? 2.0 * top : 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Curves

struct Curve {
  std::vector<std::size_t> vertices;
};

inline bool is_valid_curve(const Space& s, const Curve& c) {
  if (c.vertices.empty()) return false;
  for (auto v : c.vertices)
    if (v >= s.size()) return false;
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i)
    if (!s.edge_between(c.vertices[i], c.vertices[i + 1])) return false;
  return true;
}

inline double curve_length(const Space& s, const Curve& c) {
  if (!is_valid_curve(s, c)) throw ValidationError("curve has non-adjacent consecutive vertices");
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i)
    len += s.edges()[*s.edge_between(c.vertices[i], c.vertices[i + 1])].len;
  return len;
}

inline VertexSet curve_vertices(const Curve& c) { return normalize(c.vertices); }

// ---------------------------------------------------------------------------
// Doubling constant

struct DoublingResult {
  std::size_t value = 1;
  std::size_t greedy_lower = 1;
  bool exact = false;
};

namespace detail {

// Maximum subset of `pts` with pairwise distance strictly greater than `sep`.
inline std::size_t max_separated_exact(const Space& s, const VertexSet& pts, double sep) {
  const std::size_t m = pts.size();
  std::vector<unsigned> conflict(m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b && s.dist(pts[a], pts[b]) <= sep + kDistTol) conflict[a] |= 1u << b;
  std::size_t best = 0;
  std::function<void(unsigned, std::size_t)> search = [&](unsigned candidates, std::size_t chosen) {
    if (candidates == 0) {
      best = std::max(best, chosen);
      return;
    }
    if (chosen + static_cast<std::size_t>(__builtin_popcount(candidates)) <= best) return;
    const unsigned v = static_cast<unsigned>(__builtin_ctz(candidates));
    search(candidates & ~(1u << v) & ~conflict[v], chosen + 1);
    search(candidates & ~(1u << v), chosen);
  };
  search(m >= 32 ? ~0u : ((1u << m) - 1u), 0);
  return best;
}

inline std::size_t max_separated_greedy(const Space& s, const VertexSet& pts, double sep) {
  VertexSet chosen;
  for (auto p : pts) {
    bool ok = true;
    for (auto q : chosen)
      if (s.dist(p, q) <= sep + kDistTol) { ok = false; break; }
    if (ok) chosen.push_back(p);
  }
  return chosen.size();
}

}  // namespace detail

// Largest r/2-separated subset of an open ball B(x,r), maximized over x and r. On a
// finite space the ball only changes at distance values D, and the supremum over
// r in (D, next] is attained as r -> D+, i.e. pairwise distances strictly above D/2.
inline DoublingResult doubling_constant(const Space& s, std::size_t exact_limit = 16) {
  DoublingResult res;
  res.exact = s.size() <= exact_limit;
  std::size_t greedy = 1, exact = 1;
  for (std::size_t x = 0; x < s.size(); ++x) {
    for (double radius : distinct_values(s.dist().row(x))) {
      if (radius <= kDistTol) continue;
      const auto pts = ball_closed(s, x, radius);
      greedy = std::max(greedy, detail::max_separated_greedy(s, pts, radius / 2.0));
      if (res.exact) exact = std::max(exact, detail::max_separated_exact(s, pts, radius / 2.0));
    }
  }
  res.greedy_lower = greedy;
  res.value = res.exact ? exact : greedy;
  return res;
}

}  // namespace qrgeom
