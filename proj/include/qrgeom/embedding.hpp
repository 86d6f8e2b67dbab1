#pragma once

// Bi-Lipschitz embedding psi = f x phi of the source of a finite-multiplicity map,
// built from component radii R^k, nets, colorings and labelled normal neighborhoods.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/curves.hpp"
#include "qrgeom/parallel.hpp"
#include "qrgeom/pullback.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

// Per target vertex y: the distances from y (ascending, starting at 0) and the number
// of components of f^{-1}(closed ball) at each of them. The open ball B(y, rho) equals
// the closed d_i-ball for rho in (d_i, d_{i+1}].
struct ComponentSweep {
  std::vector<double> radii;
  std::vector<std::size_t> counts;
};

inline ComponentSweep component_sweep(const VertexMap& f, std::size_t y) {
  ComponentSweep out;
  out.radii = distinct_values(f.target().dist().row(y));
  for (double d : out.radii)
    out.counts.push_back(components(f.source(), preimage(f, ball_closed(f.target(), y, d))).size());
  return out;
}

// R^k(y) = d_i / 5 for the first d_i whose closed-ball preimage has <= k components.
inline double rk_from_sweep(const ComponentSweep& s, std::size_t k) {
  for (std::size_t i = 0; i < s.radii.size(); ++i)
    if (s.counts[i] <= k) return s.radii[i] / 5.0;
  return s.radii.back() / 5.0;
}

inline std::vector<double> rk_radii(const VertexMap& f, std::size_t k) {
  std::vector<double> out(f.target().size());
  parallel_for(out.size(), [&](std::size_t y) { out[y] = rk_from_sweep(component_sweep(f, y), k); });
  return out;
}

// Greedy maximal net of Y^k = {R^k > 0}: decreasing R^k, then vertex id; y joins when
// d(y,t) >= max(R^k(y), R^k(t)) / 2 for every t already taken.
inline VertexSet build_net(const Space& Y, const std::vector<double>& R) {
  std::vector<std::size_t> order;
  for (std::size_t y = 0; y < Y.size(); ++y)
    if (R[y] > 0.0) order.push_back(y);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return R[a] > R[b]; });
  VertexSet net;
  for (auto y : order) {
    bool ok = true;
    for (auto t : net)
      if (Y.dist(y, t) < 0.5 * std::max(R[y], R[t]) - kDistTol) {
        ok = false;
        break;
      }
    if (ok) net.push_back(y);
  }
  return net;  // insertion order
}

inline bool balls_meet(const Space& Y, std::size_t a, double ra, std::size_t b, double rb) {
  for (std::size_t z = 0; z < Y.size(); ++z)
    if (Y.dist(a, z) < ra - kDistTol && Y.dist(b, z) < rb - kDistTol) return true;
  return false;
}

struct NetColoring {
  std::vector<VertexSet> classes;  // c_d classes, some possibly empty
  std::size_t colors_used = 0;
  std::size_t max_degree = 0;
  std::size_t c_d = 1;  // 1 + max degree of the 2B intersection graph
};

// Greedy coloring, in net order, of the intersection graph of the balls 2B^k_y.
inline NetColoring color_net(const Space& Y, const VertexSet& net, const std::vector<double>& R) {
  const std::size_t n = net.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (balls_meet(Y, net[i], 2.0 * R[net[i]], net[j], 2.0 * R[net[j]])) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
  NetColoring out;
  std::vector<std::size_t> color(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out.max_degree = std::max(out.max_degree, adj[i].size());
    std::vector<char> taken(adj[i].size() + 1, 0);
    for (auto j : adj[i])
      if (j < i && color[j] < taken.size()) taken[color[j]] = 1;
    std::size_t c = 0;
    while (taken[c]) ++c;
    color[i] = c;
    out.colors_used = std::max(out.colors_used, c + 1);
  }
  out.c_d = 1 + out.max_degree;
  out.classes.assign(out.c_d, {});
  for (std::size_t i = 0; i < n; ++i) out.classes[color[i]].push_back(net[i]);
  for (auto& c : out.classes) c = normalize(c);
  return out;
}

// One labelled normal neighborhood: the set 2U^k_x shared by the fiber points in `points`.
struct LabelledSet {
  std::size_t net_point = 0;  // y' in T^k_j
  VertexSet points;           // x' in f^{-1}(y') with this 2U
  VertexSet set;              // 2U^k_{x'}
  VertexSet inner;            // U^k_{x'} of the smallest point
  std::size_t label = 1;
};

// Fiber points over each net point grouped by equal 2U; labels 1, 2, ... in order of
// the smallest member id.
inline std::vector<LabelledSet> assign_labels(const VertexMap& f, const VertexSet& net_class,
                                              const std::vector<double>& R) {
  std::vector<LabelledSet> out;
  for (auto y : net_class) {
    std::vector<LabelledSet> groups;
    for (auto x : f.fiber(y)) {
      auto big = u_component(f, x, 2.0 * R[y]);
      auto it = std::find_if(groups.begin(), groups.end(), [&](const LabelledSet& g) { return g.set == big; });
      if (it == groups.end())
        groups.push_back({y, {x}, std::move(big), u_component(f, x, R[y]), 0});
      else
        it->points.push_back(x);
    }
    std::sort(groups.begin(), groups.end(),
              [](const LabelledSet& a, const LabelledSet& b) { return a.points.front() < b.points.front(); });
    for (std::size_t i = 0; i < groups.size(); ++i) groups[i].label = i + 1;
    out.insert(out.end(), groups.begin(), groups.end());
  }
  return out;
}

struct EmbeddingBlock {
  std::size_t k = 1, j = 1;
  VertexSet net_class;
  std::vector<LabelledSet> sets;
};

struct EmbeddingPlan {
  std::size_t N = 1;
  std::size_t c_d = 1;
  std::size_t colors_used = 0;
  double doubling = 0.0;        // doubling constant estimate of Y
  double doubling_bound = 0.0;  // its sixth power
  std::vector<std::vector<double>> R;  // R[k-1][y], k = 1..N-1
  std::vector<VertexSet> nets;         // T^k in insertion order
  std::vector<EmbeddingBlock> blocks;  // slot (k-1) c_d + (j-1)
  std::vector<ComponentSweep> sweeps;  // per target vertex

  std::size_t dimension() const { return N > 1 ? c_d * (N - 1) : 0; }
};

inline EmbeddingPlan build_plan(const VertexMap& f) {
  const Space& Y = f.target();
  EmbeddingPlan plan;
  plan.N = max_multiplicity(f);
  const auto dc = doubling_constant(Y);
  plan.doubling = dc.value;
  plan.doubling_bound = std::pow(dc.value, 6.0);
  if (plan.N <= 1) return plan;
  plan.sweeps.resize(Y.size());
  parallel_for(Y.size(), [&](std::size_t y) { plan.sweeps[y] = component_sweep(f, y); });
  std::vector<NetColoring> colorings;
  for (std::size_t k = 1; k < plan.N; ++k) {
    std::vector<double> R(Y.size());
    for (std::size_t y = 0; y < Y.size(); ++y) R[y] = rk_from_sweep(plan.sweeps[y], k);
    plan.nets.push_back(build_net(Y, R));
    colorings.push_back(color_net(Y, plan.nets.back(), R));
    plan.c_d = std::max(plan.c_d, colorings.back().c_d);
    plan.colors_used = std::max(plan.colors_used, colorings.back().colors_used);
    plan.R.push_back(std::move(R));
  }
  for (std::size_t k = 1; k < plan.N; ++k) {
    auto& col = colorings[k - 1];
    col.classes.resize(plan.c_d);
    for (std::size_t j = 1; j <= plan.c_d; ++j)
      plan.blocks.push_back({k, j, col.classes[j - 1], assign_labels(f, col.classes[j - 1], plan.R[k - 1])});
  }
  return plan;
}

// d(x, X \ S) in the source metric; +inf when S is everything.
inline double distance_to_complement(const Space& X, std::size_t x, const std::vector<char>& in_set) {
  double d = kInf;
  for (std::size_t z = 0; z < X.size(); ++z)
    if (!in_set[z]) d = std::min(d, X.dist(x, z));
  return d;
}

// Coordinate (k,j): sum over the distinct sets 2U in class (k,j) of
// label * min{d(x, X \ 2U), R^k(y')}.
inline std::vector<double> phi(const VertexMap& f, const EmbeddingPlan& plan, std::size_t x) {
  const Space& X = f.source();
  std::vector<double> out(plan.dimension(), 0.0);
  for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
    const auto& blk = plan.blocks[b];
    double v = 0.0;
    for (const auto& s : blk.sets) {
      if (!std::binary_search(s.set.begin(), s.set.end(), x)) continue;
      const auto mask = to_mask(X.size(), s.set);
      v += static_cast<double>(s.label) * std::min(distance_to_complement(X, x, mask), plan.R[blk.k - 1][s.net_point]);
    }
    out[(blk.k - 1) * plan.c_d + (blk.j - 1)] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plan invariants

struct PlanChecks {
  double rk_lipschitz_excess = 0.0;  // max over pairs of 5R(y') - 5R(y) - d(y,y'), clipped at 0
  bool rk_zero_iff = true;           // R^k(y) > 0 iff N(y) > k
  bool net_separated = true;
  bool net_covers = true;
  bool classes_disjoint = true;
  bool labels_consistent = true;
  double comparability_7 = 1.0;  // max ratio R(y')/R(y) over meeting B balls (bound 3/2)
  double comparability_8 = 1.0;  // same for 2B balls (bound 7/3)
};

inline PlanChecks check_plan(const VertexMap& f, const EmbeddingPlan& plan) {
  const Space& Y = f.target();
  PlanChecks c;
  for (std::size_t k = 1; k < plan.N; ++k) {
    const auto& R = plan.R[k - 1];
    for (std::size_t y = 0; y < Y.size(); ++y) {
      if ((R[y] > 0.0) != (f.fiber(y).size() > k)) c.rk_zero_iff = false;
      for (std::size_t z = 0; z < Y.size(); ++z) {
        c.rk_lipschitz_excess = std::max(c.rk_lipschitz_excess, 5.0 * R[z] - 5.0 * R[y] - Y.dist(y, z));
        if (y == z || R[y] <= 0.0 || R[z] <= 0.0) continue;
        if (balls_meet(Y, y, R[y], z, R[z])) c.comparability_7 = std::max(c.comparability_7, R[z] / R[y]);
        if (balls_meet(Y, y, 2.0 * R[y], z, 2.0 * R[z])) c.comparability_8 = std::max(c.comparability_8, R[z] / R[y]);
      }
    }
    const auto& net = plan.nets[k - 1];
    for (std::size_t a = 0; a < net.size(); ++a)
      for (std::size_t b = 0; b < net.size(); ++b)
        if (a != b && Y.dist(net[a], net[b]) < 0.5 * R[net[a]] - kDistTol) c.net_separated = false;
    for (std::size_t y = 0; y < Y.size(); ++y) {
      if (R[y] <= 0.0) continue;
      bool covered = false;
      for (auto t : net)
        if (Y.dist(y, t) < R[t] - kDistTol) covered = true;
      if (!covered) c.net_covers = false;
    }
  }
  for (const auto& blk : plan.blocks) {
    const auto& R = plan.R[blk.k - 1];
    for (std::size_t a = 0; a < blk.net_class.size(); ++a)
      for (std::size_t b = a + 1; b < blk.net_class.size(); ++b)
        if (balls_meet(Y, blk.net_class[a], 2.0 * R[blk.net_class[a]], blk.net_class[b], 2.0 * R[blk.net_class[b]]))
          c.classes_disjoint = false;
    // equal labels over one net point iff equal 2U; sets in a class pairwise disjoint or equal
    for (std::size_t a = 0; a < blk.sets.size(); ++a)
      for (std::size_t b = a + 1; b < blk.sets.size(); ++b) {
        const auto& s = blk.sets[a];
        const auto& t = blk.sets[b];
        if (s.net_point == t.net_point && s.label == t.label) c.labels_consistent = false;
        if (intersects(s.set, t.set) && s.set != t.set) c.classes_disjoint = false;
      }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Distortion of psi = f x phi under max(d_Y, max-coordinate difference)

struct Distortion {
  double lower = kInf;  // min D / d
  double upper = 0.0;   // max D / d
  double phi_lipschitz = 0.0;   // max_coord |dphi| / d over all pairs
  double fiber_epsilon = kInf;  // min over fiber pairs of max_coord |dphi| / d
  double fiber_worst_12 = 0.0;  // max over fiber pairs of d / (12 max_coord |dphi|); <= 1 required
  bool injective = true;
  std::vector<std::size_t> lower_witness;
};

inline double coord_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Distortion measure_distortion(const VertexMap& f, const std::vector<std::vector<double>>& coords) {
  const Space& X = f.source();
  const std::size_t n = X.size();
  std::vector<Distortion> rows(n);
  parallel_for(n, [&](std::size_t a) {
    auto& r = rows[a];
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = X.dist(a, b);
      const double w = coord_gap(coords[a], coords[b]);
      const double D = std::max(f.image_dist(a, b), w);
      if (D <= 0.0) r.injective = false;
      if (D / d < r.lower) {
        r.lower = D / d;
        r.lower_witness = {a, b};
      }
      r.upper = std::max(r.upper, D / d);
      r.phi_lipschitz = std::max(r.phi_lipschitz, w / d);
      if (f(a) == f(b)) {
        r.fiber_epsilon = std::min(r.fiber_epsilon, w / d);
        r.fiber_worst_12 = std::max(r.fiber_worst_12, w > 0.0 ? d / (12.0 * w) : kInf);
      }
    }
  });
  Distortion out;
  for (auto& r : rows) {
    if (r.lower < out.lower) {
      out.lower = r.lower;
      out.lower_witness = r.lower_witness;
    }
    out.upper = std::max(out.upper, r.upper);
    out.phi_lipschitz = std::max(out.phi_lipschitz, r.phi_lipschitz);
    out.fiber_epsilon = std::min(out.fiber_epsilon, r.fiber_epsilon);
    out.fiber_worst_12 = std::max(out.fiber_worst_12, r.fiber_worst_12);
    out.injective = out.injective && r.injective;
  }
  return out;
}

// Each coordinate is N-Lipschitz on all pairs; returns the worst ratio |dphi_i| / (N d).
inline double coordinate_lipschitz_ratio(const VertexMap& f, const EmbeddingPlan& plan,
                                         const std::vector<std::vector<double>>& coords) {
  const Space& X = f.source();
  double worst = 0.0;
  for (std::size_t a = 0; a < X.size(); ++a)
    for (std::size_t b = a + 1; b < X.size(); ++b)
      for (std::size_t i = 0; i < plan.dimension(); ++i)
        worst = std::max(worst, std::abs(coords[a][i] - coords[b][i]) / (static_cast<double>(plan.N) * X.dist(a, b)));
  return worst;
}

// For every fiber pair some k has d/2 <= 5R^k(y) <= d. Where the grid misses, the
// slack beyond the window is compared with the transition step below 5R^k(y).
inline Certificate fiber_scale_check(const VertexMap& f, const EmbeddingPlan& plan) {
  Certificate c;
  c.name = "fiber_scale";
  const Space& X = f.source();
  double worst_slack = 0.0, worst_steps = 0.0;
  std::size_t pairs = 0, exact = 0;
  for (std::size_t y = 0; y < f.target().size(); ++y) {
    const auto& fib = f.fiber(y);
    for (std::size_t a = 0; a < fib.size(); ++a)
      for (std::size_t b = a + 1; b < fib.size(); ++b) {
        ++pairs;
        const double d = X.dist(fib[a], fib[b]);
        double best = kInf, best_steps = kInf;
        for (std::size_t k = 1; k < fib.size(); ++k) {
          const double five_r = 5.0 * plan.R[k - 1][y];
          const double slack = std::max({0.0, five_r - d, 0.5 * d - five_r});
          // transition step: gap between 5R^k and the previous distance from y
          const auto& radii = plan.sweeps[y].radii;
          auto it = std::lower_bound(radii.begin(), radii.end(), five_r - kDistTol);
          const double step = it == radii.begin() ? five_r : five_r - *std::prev(it);
          const double steps = slack <= kDistTol ? 0.0 : (step > 0.0 ? slack / step : kInf);
          if (slack < best) {
            best = slack;
            best_steps = steps;
          }
        }
        if (best <= kDistTol) ++exact;
        worst_slack = std::max(worst_slack, best);
        if (best_steps > worst_steps) {
          worst_steps = best_steps;
          c.witness = {fib[a], fib[b]};
          c.witness_kind = "fiber pair";
        }
      }
  }
  c.values["pairs"] = static_cast<double>(pairs);
  c.values["exact_pairs"] = static_cast<double>(exact);
  c.values["max_slack"] = worst_slack;
  c.values["max_slack_steps"] = worst_steps;
  c.estimate = worst_steps;
  if (worst_steps > 1.0 + kDistTol) c.pass = false;
  if (worst_slack > kDistTol) c.flags.push_back("grid slack");
  return c;
}

// Predicted lower constant max_delta min{eps(1-delta) - L delta, delta} = eps / (1 + L + eps)
// against the measured one.
inline Certificate composition_bound_check(const Distortion& dist) {
  Certificate c;
  c.name = "composition_bound";
  const double eps = dist.fiber_epsilon == kInf ? 1.0 : dist.fiber_epsilon;
  const double L = dist.phi_lipschitz;
  const double predicted = eps / (1.0 + L + eps);
  c.values["epsilon"] = eps;
  c.values["L"] = L;
  c.values["delta"] = predicted;
  c.values["predicted"] = predicted;
  c.values["measured"] = dist.lower;
  c.estimate = predicted;
  if (predicted > dist.lower + kDistTol) c.fail(dist.lower_witness, "pair");
  return c;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct EmbedOptions {
  bool normalize = true;  // route through the pullback factorization
  std::size_t exact_cap = kDefaultExactCap;
  std::size_t bdd_curve_edges = 6;
};

struct EmbeddingResult {
  std::optional<Factorization> factorization;
  bool exact_metric = false;
  EmbeddingPlan plan;
  std::vector<std::vector<double>> coords;
  Distortion distortion;
  Distortion original;  // the same psi measured against the original source metric
  PlanChecks checks;
  double coordinate_lipschitz = 0.0;  // worst |dphi_i| / (N d); <= 1 required
  Certificate fiber_scale;
  Certificate composition;
  std::vector<std::string> flags;
};

inline Certificate one_bdd_precondition(const VertexMap& f, std::size_t max_edges) {
  const auto sample = curve_sample(f.source(), max_edges, 0, 0);
  const ImageDistance src = [&](std::size_t a, std::size_t b) { return f.source().dist(a, b); };
  const auto cc = curve_constants(src, image_distance(f), sample.curves);
  Certificate c;
  c.name = "bdd";
  c.estimate = cc.bdd;
  c.witness = cc.bdd_witness;
  c.witness_kind = "curve";
  if (cc.bdd > 1.0 + kDistTol) c.pass = false;
  return c;
}

inline EmbeddingResult embed(const VertexMap& f, const EmbedOptions& opt = {}) {
  EmbeddingResult res;
  const VertexMap* work = &f;
  if (opt.normalize) {
    const bool exact = f.source().size() <= opt.exact_cap;
    res.factorization = factorize(f, exact ? MetricChoice::exact : MetricChoice::lower, opt.exact_cap);
    res.exact_metric = exact;
    if (!exact) res.flags.push_back("bracket metric: pullback distances known within factor 2");
    work = &res.factorization->projection;
  } else {
    const auto pre = one_bdd_precondition(f, opt.bdd_curve_edges);
    if (!pre.pass)
      throw ValidationError("precondition: map is not 1-BDD on the curve sample (diameter distortion " +
                            detail::fmt_num(pre.estimate) + ")");
  }
  const VertexMap& g = *work;
  res.plan = build_plan(g);
  res.coords.resize(g.source().size());
  parallel_for(g.source().size(), [&](std::size_t x) { res.coords[x] = phi(g, res.plan, x); });
  res.distortion = measure_distortion(g, res.coords);
  res.original = measure_distortion(f, res.coords);
  res.checks = check_plan(g, res.plan);
  res.coordinate_lipschitz = coordinate_lipschitz_ratio(g, res.plan, res.coords);
  res.fiber_scale = fiber_scale_check(g, res.plan);
  res.composition = composition_bound_check(res.distortion);
  return res;
}

}  // namespace qrgeom
