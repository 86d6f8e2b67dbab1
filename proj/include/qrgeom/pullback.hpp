#pragma once

// Pullback metric f*d_Y(x1,x2) = inf over connected sets joining x1,x2 of the
// diameter of their image, and the factorization f = pi o g through it.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/curves.hpp"
#include "qrgeom/error.hpp"
#include "qrgeom/parallel.hpp"
#include "qrgeom/space.hpp"
#include "qrgeom/threshold.hpp"

namespace qrgeom {

inline constexpr std::size_t kDefaultExactCap = 14;

struct PullbackBracket {
  DistanceMatrix lower;
  DistanceMatrix upper;
  bool exact = false;
  bool oracle_used = false;
};

inline ImageDistance image_distance(const VertexMap& f) {
  return [&f](std::size_t a, std::size_t b) { return f.image_dist(a, b); };
}

inline PullbackBracket pullback_metric_bracket(const VertexMap& f) {
  PullbackBracket b{threshold_matrix(f.source(), image_distance(f)), DistanceMatrix(0), false, false};
  b.upper = b.lower;
  for (std::size_t i = 0; i < f.source().size(); ++i)
    for (std::size_t j = 0; j < f.source().size(); ++j) b.upper(i, j) = 2.0 * b.lower(i, j);
  return b;
}

namespace detail {

// Least image diameter over simple paths from a to b. A connected set joining a and b
// contains such a path, and the path's image is a subset, so paths suffice.
// Depth-first branch and bound; the threshold value is a proven lower bound.
inline double exact_pullback_pair(const Space& g, const ImageDistance& img, std::size_t a, std::size_t b,
                                  double lower) {
  if (a == b) return 0.0;
  auto [thr, seed_path] = minimax_path(g, img, a, b);
  double best = 0.0;
  for (std::size_t i = 0; i < seed_path.size(); ++i)
    for (std::size_t j = i + 1; j < seed_path.size(); ++j) best = std::max(best, img(seed_path[i], seed_path[j]));
  if (best <= lower + kDistTol) return best;

  const std::size_t n = g.size();
  std::vector<char> on(n, 0);
  std::vector<std::size_t> path{a};
  on[a] = 1;
  bool done = false;
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double diam) {
    std::vector<std::pair<double, std::size_t>> next;
    for (const auto& inc : g.neighbors(u)) {
      const auto w = inc.to;
      if (on[w]) continue;
      if (img(w, b) >= best - kDistTol || img(w, a) >= best - kDistTol) continue;
      double nd = diam;
      for (auto p : path) nd = std::max(nd, img(w, p));
      if (nd >= best - kDistTol) continue;
      next.emplace_back(nd, w);
    }
    std::sort(next.begin(), next.end());
    for (auto [nd, w] : next) {
      if (done) return;
      if (nd >= best - kDistTol) continue;
      if (w == b) {
        best = nd;
        if (best <= lower + kDistTol) done = true;
        continue;
      }
      on[w] = 1;
      path.push_back(w);
      dfs(w, nd);
      path.pop_back();
      on[w] = 0;
    }
  };
  dfs(a, 0.0);
  return best;
}

}  // namespace detail

// Exact pullback distances for an arbitrary image-distance function on the source graph.
inline DistanceMatrix exact_pullback_matrix(const Space& g, const ImageDistance& img,
                                            std::size_t cap = kDefaultExactCap) {
  const std::size_t n = g.size();
  if (n > cap)
    throw CapExceeded("exact pullback metric limited to " + std::to_string(cap) + " source vertices (got " +
                      std::to_string(n) + "); use the bracket (pullback_metric_bracket) or raise --exact-cap");
  const auto lower = threshold_matrix(g, img);
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) out(a, b) = detail::exact_pullback_pair(g, img, a, b, lower(a, b));
  });
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
  return out;
}

inline DistanceMatrix pullback_metric_exact(const VertexMap& f, std::size_t cap = kDefaultExactCap) {
  return exact_pullback_matrix(f.source(), image_distance(f), cap);
}

// Bracket with lower = upper = exact when the source fits under the cap.
inline PullbackBracket pullback_metric(const VertexMap& f, bool want_exact, std::size_t cap = kDefaultExactCap) {
  if (!want_exact) return pullback_metric_bracket(f);
  auto m = pullback_metric_exact(f, cap);
  return PullbackBracket{m, m, true, true};
}

// Pairs x1 != x2 at pullback distance zero: joined by a connected f-constant set.
inline std::vector<std::pair<std::size_t, std::size_t>> discreteness_failures(const DistanceMatrix& lower) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < lower.size(); ++a)
    for (std::size_t b = a + 1; b < lower.size(); ++b)
      if (lower(a, b) <= kDistTol) out.emplace_back(a, b);
  return out;
}

// Shortest paths where a graph edge (u,v) costs m(u,v).
inline DistanceMatrix length_metric(const DistanceMatrix& m, const Space& graph) {
  std::vector<Edge> edges = graph.edges();
  for (auto& e : edges) e.len = m(e.u, e.v);
  return path_metric(graph.size(), edges);
}

// ---------------------------------------------------------------------------
// Factorization

enum class MetricChoice { lower, exact };

struct Factorization {
  std::shared_ptr<const Space> pullback_space;
  VertexMap lift;        // g: source -> pullback space, identity on vertices
  VertexMap projection;  // pi: pullback space -> target
  PullbackBracket bracket;
  bool exact = false;
};

inline std::shared_ptr<const Space> build_pullback_space(const VertexMap& f, const DistanceMatrix& m) {
  const auto zeros = discreteness_failures(m);
  if (!zeros.empty()) {
    std::vector<std::string> findings;
    for (auto [a, b] : zeros)
      findings.push_back("f not discrete at graph level: " + f.source().id(a) + " and " + f.source().id(b) +
                         " at pullback distance 0");
    throw ValidationError(std::move(findings));
  }
  SpaceData data;
  data.ids = f.source().ids();
  for (std::size_t x = 0; x < f.source().size(); ++x) data.masses.push_back(f.target().mass(f(x)));
  data.edges = f.source().edges();
  for (auto& e : data.edges) e.len = m(e.u, e.v);
  data.dist = m;
  return std::make_shared<const Space>(std::move(data));
}

inline Factorization factorize(const VertexMap& f, MetricChoice choice, std::size_t cap = kDefaultExactCap) {
  auto bracket = pullback_metric(f, choice == MetricChoice::exact, cap);
  auto space = build_pullback_space(f, bracket.lower);
  std::vector<std::size_t> ident(f.source().size());
  std::iota(ident.begin(), ident.end(), std::size_t{0});
  VertexMap g(f.source_ptr(), space, ident);
  VertexMap pi(space, f.target_ptr(), f.assignment());
  return Factorization{space, std::move(g), std::move(pi), std::move(bracket), choice == MetricChoice::exact};
}

// pi 1-Lipschitz, B(z,r) in U(z,pi,r) in B(z,2r), and diam(pi(a)) = diam(a) on paths.
// With the lower matrix d^ (d^ <= d* <= 2d^) the checks become
// B_d^(z,r/2) in U in B_d^(z,2r) and diam_d^(a) <= diam(pi(a)) <= 2 diam_d^(a).
inline Certificate verify_projection(const Factorization& fac, const std::vector<Curve>& paths) {
  Certificate c;
  c.name = "projection";
  const auto& pi = fac.projection;
  const Space& P = *fac.pullback_space;
  const std::size_t n = P.size();
  if (!fac.exact) c.flags.push_back("approximate");

  double lip = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dy = pi.image_dist(a, b);
      if (dy > P.dist(a, b) + kDistTol) c.fail({a, b}, "pair where pi stretches");
      if (P.dist(a, b) > kDistTol) lip = std::max(lip, dy / P.dist(a, b));
    }
  c.values["lipschitz"] = lip;

  std::size_t inclusion_checks = 0;
  for (std::size_t z = 0; z < n; ++z) {
    for (double r : candidate_radii(P, z)) {
      const auto u = u_component(pi, z, r);
      const auto inner = ball(P, z, fac.exact ? r : r / 2.0);
      const auto outer = ball(P, z, 2.0 * r);
      ++inclusion_checks;
      if (!is_subset(inner, u)) c.fail({z}, "center where the inner ball escapes U(z,pi,r)");
      if (!is_subset(u, outer)) c.fail({z}, "center where U(z,pi,r) escapes the doubled ball");
    }
  }
  c.values["inclusion_checks"] = static_cast<double>(inclusion_checks);

  const ImageDistance dp = [&](std::size_t a, std::size_t b) { return P.dist(a, b); };
  const ImageDistance dy = [&](std::size_t a, std::size_t b) { return pi.image_dist(a, b); };
  double worst = 0.0;
  for (const auto& a : paths) {
    const double d_src = chord_diameter(dp, a), d_img = chord_diameter(dy, a);
    bool ok = fac.exact ? std::abs(d_src - d_img) <= kDistTol
                        : (d_src <= d_img + kDistTol && d_img <= 2.0 * d_src + kDistTol);
    worst = std::max(worst, std::abs(d_src - d_img));
    if (!ok) c.fail(a.vertices, "path whose diameter changes under pi");
  }
  c.values["paths"] = static_cast<double>(paths.size());
  c.values["max_diameter_gap"] = worst;
  c.estimate = lip;
  return c;
}

// d*_Y <= d*_{lY} <= l(d*_Y) = l(d*_{lY}) <= (2N-1) d*_{lY}, where d*_m is the pullback
// of the target metric m and l(.) the length metric on the source graph.
struct LengthChain {
  DistanceMatrix pull;          // pi*d_Y
  DistanceMatrix pull_length;   // pi*l_{d_Y}
  DistanceMatrix length_pull;   // l_{pi*d_Y}
  DistanceMatrix length_pull_length;  // l_{pi*l_{d_Y}}
  std::size_t multiplicity = 1;
  double worst_ratio = 1.0;     // max of length_pull / pull_length over pairs
  Certificate certificate;
};

inline LengthChain length_chain(const VertexMap& f, std::size_t cap = kDefaultExactCap) {
  const Space& X = f.source();
  const auto target_length = length_metric(f.target().dist(), f.target());
  const ImageDistance img_l = [&](std::size_t a, std::size_t b) { return target_length(f(a), f(b)); };
  LengthChain ch{pullback_metric_exact(f, cap), exact_pullback_matrix(X, img_l, cap), DistanceMatrix(0),
                 DistanceMatrix(0), max_multiplicity(f), 1.0, {}};
  ch.length_pull = length_metric(ch.pull, X);
  ch.length_pull_length = length_metric(ch.pull_length, X);
  auto& c = ch.certificate;
  c.name = "length_chain";
  const double factor = 2.0 * static_cast<double>(ch.multiplicity) - 1.0;
  for (std::size_t a = 0; a < X.size(); ++a)
    for (std::size_t b = a + 1; b < X.size(); ++b) {
      if (ch.pull(a, b) > ch.pull_length(a, b) + kDistTol) c.fail({a, b}, "pair breaking d* <= d*_l");
      if (ch.pull_length(a, b) > ch.length_pull(a, b) + kDistTol) c.fail({a, b}, "pair breaking d*_l <= l(d*)");
      if (std::abs(ch.length_pull(a, b) - ch.length_pull_length(a, b)) > kDistTol)
        c.fail({a, b}, "pair where l(d*) != l(d*_l)");
      if (ch.length_pull(a, b) > factor * ch.pull_length(a, b) + kDistTol)
        c.fail({a, b}, "pair breaking l(d*) <= (2N-1) d*_l");
      if (ch.pull_length(a, b) > kDistTol)
        ch.worst_ratio = std::max(ch.worst_ratio, ch.length_pull(a, b) / ch.pull_length(a, b));
    }
  c.estimate = ch.worst_ratio;
  c.values["bound"] = factor;
  return ch;
}

// ---------------------------------------------------------------------------
// BLD/BDD constants of f and of the lift g agree on every curve.

struct CurveConstants {
  double bld = 1.0;
  double bdd = 1.0;
  std::vector<std::size_t> bld_witness;
  std::vector<std::size_t> bdd_witness;
};

// Worst two-sided length and diameter distortion of a map given by image distances.
inline CurveConstants curve_constants(const ImageDistance& src, const ImageDistance& img,
                                      const std::vector<Curve>& curves) {
  CurveConstants out;
  for (const auto& a : curves) {
    const double l = two_sided_ratio(chord_length(src, a), chord_length(img, a));
    if (l > out.bld) {
      out.bld = l;
      out.bld_witness = a.vertices;
    }
    const double d = two_sided_ratio(chord_diameter(src, a), chord_diameter(img, a));
    if (d > out.bdd) {
      out.bdd = d;
      out.bdd_witness = a.vertices;
    }
  }
  return out;
}

inline Certificate bld_bdd_transfer_check(const VertexMap& f, const Factorization& fac,
                                          const std::vector<Curve>& curves) {
  Certificate c;
  c.name = "bld_bdd_transfer";
  if (!fac.exact) c.flags.push_back("approximate");
  const ImageDistance src = [&](std::size_t a, std::size_t b) { return f.source().dist(a, b); };
  const ImageDistance via_f = [&](std::size_t a, std::size_t b) { return f.image_dist(a, b); };
  const ImageDistance via_g = [&](std::size_t a, std::size_t b) { return fac.pullback_space->dist(a, b); };
  const auto cf = curve_constants(src, via_f, curves);
  const auto cg = curve_constants(src, via_g, curves);
  c.values["bld_f"] = cf.bld;
  c.values["bld_g"] = cg.bld;
  c.values["bdd_f"] = cf.bdd;
  c.values["bdd_g"] = cg.bdd;
  auto agree = [&](double x, double y) {
    if (fac.exact) return std::abs(x - y) <= kDistTol || (x == kInf && y == kInf);
    return x <= 2.0 * y + kDistTol && y <= 2.0 * x + kDistTol;
  };
  if (!agree(cf.bld, cg.bld)) c.fail(cf.bld_witness, "curve whose length distortion differs");
  if (!agree(cf.bdd, cg.bdd)) c.fail(cf.bdd_witness, "curve whose diameter distortion differs");
  c.estimate = cf.bld;
  if (c.pass) {
    c.witness = cf.bld_witness;
    c.witness_kind = "curve";
  }
  return c;
}

}  // namespace qrgeom
