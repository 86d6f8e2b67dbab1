#pragma once

// Linear dilatations, Lipschitz fields and curve-distortion verifiers.
//
// Spheres {d = r} become shells: L_f(x,r) looks at d(x,y) <= r and l_f(x,r) at
// d(x,y) >= r, which can only overestimate H. The inner shell stays inside the
// normal neighborhood U(x,f,cap); otherwise a second fiber point at any distance
// drives l to 0 and every non-injective map gets H = inf.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/curves.hpp"
#include "qrgeom/parallel.hpp"
#include "qrgeom/pullback.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

struct ShellValue {
  double r = 0.0;
  double outer = 0.0;  // L
  double inner = 0.0;  // l
  double ratio = 1.0;  // H = L / l
};

struct DilatationRow {
  std::size_t x = 0;
  std::vector<ShellValue> shells;
  double H = 1.0;  // max over shells
  double h = kInf;  // min over shells
  double cap = 0.0;
  bool degenerate = false;  // no shell below the cap
  bool nonlocal = false;    // inverse rows: some scale beyond the normal radius
};

inline double shell_ratio(double outer, double inner) {
  if (inner <= 0.0) return outer <= 0.0 ? 1.0 : kInf;
  return outer / inner;
}

inline void finish_row(DilatationRow& row) {
  row.degenerate = row.shells.empty();
  if (row.degenerate) {
    row.H = row.h = 1.0;
    return;
  }
  row.H = 0.0;
  for (const auto& s : row.shells) {
    row.H = std::max(row.H, s.ratio);
    row.h = std::min(row.h, s.ratio);
  }
}

// Forward profile: L = max{d(fx,fy): d(x,y) <= r}, l = min{d(fx,fy): d(x,y) >= r, y != x, y in U(x,f,cap)}.
// Radii with no such y are not shells.
inline DilatationRow dilatation_profile(const VertexMap& f, std::size_t x, double cap) {
  const Space& X = f.source();
  if (X.size() < 2) throw ValidationError("isolated vertex: no shells");
  if (!(cap > 0.0)) throw ValidationError("radius cap must be positive");
  DilatationRow row;
  row.x = x;
  row.cap = cap;
  const auto local = to_mask(X.size(), u_component(f, x, cap));
  for (double r : distinct_values(X.dist().row(x))) {
    if (r <= kDistTol) continue;
    if (r > cap + kDistTol) break;
    ShellValue s{r, 0.0, kInf, 1.0};
    for (std::size_t y = 0; y < X.size(); ++y) {
      if (y == x) continue;
      const double d = X.dist(x, y), img = f.image_dist(x, y);
      if (d <= r + kDistTol) s.outer = std::max(s.outer, img);
      if (local[y] && d >= r - kDistTol) s.inner = std::min(s.inner, img);
    }
    if (s.inner == kInf) continue;
    s.ratio = shell_ratio(s.outer, s.inner);
    row.shells.push_back(s);
  }
  finish_row(row);
  return row;
}

// Inverse profile over the boundaries of normal neighborhoods:
// L* = max, l* = min of d(x,z) over z != x in the inner boundary of U(x,f,s).
inline DilatationRow inverse_dilatation_profile(const VertexMap& f, std::size_t x, double cap,
                                                std::optional<double> normal_radius_bound = std::nullopt) {
  const Space& X = f.source();
  DilatationRow row;
  row.x = x;
  row.cap = cap;
  for (double s : candidate_radii(f.target(), f(x))) {
    if (s > cap + kDistTol) break;
    if (normal_radius_bound && s > *normal_radius_bound + kDistTol) row.nonlocal = true;
    const auto u = u_component(f, x, s);
    // x itself sits on the boundary whenever one of its edges leaves U; that is the
    // graph's resolution, not a boundary point at distance 0
    auto bd = inner_boundary(X, u);
    std::erase(bd, x);
    if (bd.empty()) continue;
    ShellValue v{s, 0.0, kInf, 1.0};
    for (auto z : bd) {
      v.outer = std::max(v.outer, X.dist(x, z));
      v.inner = std::min(v.inner, X.dist(x, z));
    }
    v.ratio = shell_ratio(v.outer, v.inner);
    row.shells.push_back(v);
  }
  finish_row(row);
  return row;
}

struct DilatationSummary {
  std::vector<DilatationRow> rows;
  double max_all = 1.0;        // max_x H_f(x)
  double max_positive = 1.0;   // over mu-positive vertices
};

// Per-vertex profiles; cap <= 0 means the normal radius at f(x).
inline DilatationSummary dilatation_summary(const VertexMap& f, double cap, bool inverse) {
  DilatationSummary out;
  out.rows.resize(f.source().size());
  std::optional<NormalRadiusTable> table;
  if (cap <= 0.0 || inverse) table = normal_radius_table(f);
  parallel_for(f.source().size(), [&](std::size_t x) {
    const double c = cap > 0.0 ? cap : table->radius(f(x));
    out.rows[x] = inverse ? inverse_dilatation_profile(f, x, c, table->radius(f(x)))
                          : dilatation_profile(f, x, c);
  });
  out.max_all = out.max_positive = 0.0;
  for (std::size_t x = 0; x < out.rows.size(); ++x) {
    out.max_all = std::max(out.max_all, out.rows[x].H);
    if (f.source().mass(x) > 0.0) out.max_positive = std::max(out.max_positive, out.rows[x].H);
  }
  return out;
}

// H_f (or H*_f) bounded by `bound` at every mu-positive vertex; the max over all
// vertices is reported next to it.
inline Certificate dilatation_certificate(const VertexMap& f, double bound, double cap, bool inverse) {
  const auto sum = dilatation_summary(f, cap, inverse);
  Certificate c;
  c.name = inverse ? "inverse-qr" : "metric-qr";
  c.estimate = sum.max_positive;
  c.values["max_all"] = sum.max_all;
  c.values["max_positive_mass"] = sum.max_positive;
  std::size_t degenerate = 0, nonlocal = 0;
  for (const auto& row : sum.rows) {
    if (row.degenerate) ++degenerate;
    if (row.nonlocal) ++nonlocal;
    if (f.source().mass(row.x) > 0.0 && row.H > bound + kDistTol) c.fail({row.x}, "vertex");
  }
  if (c.witness.empty())
    for (const auto& row : sum.rows)
      if (f.source().mass(row.x) > 0.0 && row.H == sum.max_positive) {
        c.witness = {row.x};
        c.witness_kind = "vertex";
        break;
      }
  c.values["degenerate_rows"] = static_cast<double>(degenerate);
  if (degenerate > 0) c.flags.push_back("degenerate");
  if (nonlocal > 0) c.flags.push_back("nonlocal");
  return c;
}

// ---------------------------------------------------------------------------
// Lipschitz field at the finest scale

struct LipschitzField {
  std::vector<double> upper;  // L_f(x)
  std::vector<double> lower;  // l_f(x)
  bool collapse = false;      // some edge maps to a point
  double bound = 1.0;         // max over x of max(L_f, 1/l_f)
};

inline LipschitzField lipschitz_field(const VertexMap& f) {
  const Space& X = f.source();
  LipschitzField out;
  for (std::size_t x = 0; x < X.size(); ++x) {
    double hi = 0.0, lo = kInf;
    for (const auto& inc : X.neighbors(x)) {
      const double r = f.image_dist(x, inc.to) / X.dist(x, inc.to);
      hi = std::max(hi, r);
      lo = std::min(lo, r);
    }
    if (X.neighbors(x).empty()) hi = lo = 1.0;
    if (lo <= 0.0) out.collapse = true;
    out.upper.push_back(hi);
    out.lower.push_back(lo);
    out.bound = std::max({out.bound, hi, lo > 0.0 ? 1.0 / lo : kInf});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curve verifiers

inline Certificate curve_verify(const VertexMap& f, double bound, const CurveSample& sample, bool diameters) {
  const ImageDistance src = [&](std::size_t a, std::size_t b) { return f.source().dist(a, b); };
  const auto cc = curve_constants(src, image_distance(f), sample.curves);
  Certificate c;
  c.name = diameters ? "bdd" : "bld";
  c.estimate = diameters ? cc.bdd : cc.bld;
  c.witness = diameters ? cc.bdd_witness : cc.bld_witness;
  c.witness_kind = "curve";
  c.values["curves"] = static_cast<double>(sample.curves.size());
  c.values["seed"] = static_cast<double>(sample.seed);
  if (sample.truncated) c.flags.push_back("enumeration truncated");
  if (c.estimate > bound + kDistTol) c.pass = false;
  return c;
}

inline Certificate bld_verify(const VertexMap& f, double bound, const CurveSample& sample) {
  return curve_verify(f, bound, sample, false);
}

inline Certificate bdd_verify(const VertexMap& f, double bound, const CurveSample& sample) {
  return curve_verify(f, bound, sample, true);
}

// B(f(x), r/L) in f(B(x,r)) in B(f(x), L r) for all x and r. For r in (d_i, d_{i+1}]
// (consecutive distances from x) B(x,r) is the closed d_i-ball with image I_i; the
// right inclusion needs L >= max_{I_i} d / d_i and the left L >= d_{i+1} / (least
// target distance from f(x) to a point outside I_i).
inline Certificate lq_verify(const VertexMap& f, double bound) {
  const Space& X = f.source();
  const Space& Y = f.target();
  std::vector<double> best(X.size(), 1.0);
  parallel_for(X.size(), [&](std::size_t x) {
    const auto radii = distinct_values(X.dist().row(x));
    for (std::size_t i = 1; i < radii.size(); ++i) {
      const auto img = image(f, ball_closed(X, x, radii[i]));
      const auto inside = to_mask(Y.size(), img);
      double outer = 0.0, gap = kInf;
      for (std::size_t y = 0; y < Y.size(); ++y) {
        const double d = Y.dist(f(x), y);
        if (inside[y])
          outer = std::max(outer, d);
        else
          gap = std::min(gap, d);
      }
      best[x] = std::max(best[x], outer / radii[i]);
      if (gap < kInf && i + 1 < radii.size()) best[x] = std::max(best[x], radii[i + 1] / gap);
    }
    // r in (0, d_1]: B(x,r) = {x}
    if (radii.size() > 1) {
      double gap = kInf;
      for (std::size_t y = 0; y < Y.size(); ++y)
        if (y != f(x)) gap = std::min(gap, Y.dist(f(x), y));
      if (gap < kInf) best[x] = std::max(best[x], radii[1] / gap);
    }
  });
  Certificate c;
  c.name = "lq";
  c.estimate = 1.0;
  for (std::size_t x = 0; x < X.size(); ++x)
    if (best[x] > c.estimate) {
      c.estimate = best[x];
      c.witness = {x};
      c.witness_kind = "vertex";
    }
  if (c.estimate > bound + kDistTol) c.pass = false;
  return c;
}

// ---------------------------------------------------------------------------
// Branched quasisymmetry gauge

struct GaugePoint {
  double t = 0.0;
  double eta = 0.0;
};

struct Gauge {
  std::vector<GaugePoint> points;  // running max, ascending t
  std::size_t pairs = 0;
  std::uint64_t seed = 0;

  // eta^(t): largest sampled ratio with argument <= t (0 below the support).
  double operator()(double t) const {
    double v = 0.0;
    for (const auto& p : points)
      if (p.t <= t + kDistTol) v = std::max(v, p.eta);
    return v;
  }
};

// Connected sets: every edge, every connected closed ball, plus random connected
// sets grown from seeded starts.
inline std::vector<VertexSet> continuum_sample(const Space& s, std::size_t random_count, std::uint64_t seed,
                                               std::size_t max_size = 6) {
  std::vector<VertexSet> out;
  for (const auto& e : s.edges()) out.push_back(normalize({e.u, e.v}));
  for (std::size_t x = 0; x < s.size(); ++x)
    for (double r : distinct_values(s.dist().row(x))) {
      if (r <= kDistTol) continue;
      auto b = ball_closed(s, x, r);
      if (b.size() < s.size() && is_connected(s, b)) out.push_back(std::move(b));
    }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < random_count && s.size() > 1; ++i) {
    VertexSet set{std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng)};
    const std::size_t target = std::uniform_int_distribution<std::size_t>(2, std::max<std::size_t>(2, max_size))(rng);
    while (set.size() < target) {
      VertexSet frontier;
      for (auto v : set)
        for (const auto& inc : s.neighbors(v))
          if (!std::binary_search(set.begin(), set.end(), inc.to)) frontier.push_back(inc.to);
      frontier = normalize(std::move(frontier));
      if (frontier.empty()) break;
      const auto w = frontier[std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng)];
      set.insert(std::upper_bound(set.begin(), set.end(), w), w);
    }
    out.push_back(std::move(set));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Over intersecting pairs (E,F): t = diam E / diam F and ratio = diam f(E) / diam f(F).
inline Gauge bqs_gauge(const ImageDistance& src, const ImageDistance& img, const std::vector<VertexSet>& continua,
                       std::uint64_t seed = 0) {
  auto diam = [](const ImageDistance& d, const VertexSet& s) {
    double out = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) out = std::max(out, d(s[i], s[j]));
    return out;
  };
  std::vector<double> ds, di;
  for (const auto& c : continua) {
    ds.push_back(diam(src, c));
    di.push_back(diam(img, c));
  }
  std::vector<GaugePoint> raw;
  Gauge g;
  g.seed = seed;
  for (std::size_t a = 0; a < continua.size(); ++a)
    for (std::size_t b = 0; b < continua.size(); ++b) {
      if (a == b || ds[b] <= kDistTol || !intersects(continua[a], continua[b])) continue;
      const double ratio = di[b] <= kDistTol ? (di[a] <= kDistTol ? 0.0 : kInf) : di[a] / di[b];
      raw.push_back({ds[a] / ds[b], ratio});
      ++g.pairs;
    }
  std::sort(raw.begin(), raw.end(), [](const GaugePoint& p, const GaugePoint& q) {
    return p.t < q.t || (p.t == q.t && p.eta < q.eta);
  });
  double run = 0.0;
  for (const auto& p : raw) {
    run = std::max(run, p.eta);
    if (!g.points.empty() && std::abs(g.points.back().t - p.t) <= kDistTol)
      g.points.back().eta = run;
    else
      g.points.push_back({p.t, run});
  }
  return g;
}

inline Gauge bqs_gauge(const VertexMap& f, const std::vector<VertexSet>& continua, std::uint64_t seed = 0) {
  const ImageDistance src = [&](std::size_t a, std::size_t b) { return f.source().dist(a, b); };
  return bqs_gauge(src, image_distance(f), continua, seed);
}

}  // namespace qrgeom
