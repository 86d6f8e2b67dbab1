#pragma once

// Branched coverings modeled as surjective, edge-compatible vertex maps.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/parallel.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

// Itemized validation: totality, range, surjectivity and edge-compatibility.
inline std::vector<std::string> map_findings(const Space& source, const Space& target,
                                             const std::vector<std::size_t>& assignment) {
  std::vector<std::string> out;
  if (assignment.size() != source.size()) {
    out.push_back("map not total: " + std::to_string(assignment.size()) + " of " + std::to_string(source.size()) +
                  " source vertices assigned");
    return out;
  }
  std::vector<char> hit(target.size(), 0);
  for (std::size_t x = 0; x < assignment.size(); ++x) {
    if (assignment[x] >= target.size())
      out.push_back("image of '" + source.id(x) + "' is not a target vertex");
    else
      hit[assignment[x]] = 1;
  }
  if (!out.empty()) return out;
  std::string missing;
  for (std::size_t y = 0; y < target.size(); ++y)
    if (!hit[y]) missing += (missing.empty() ? "" : ",") + target.id(y);
  if (!missing.empty()) out.push_back("not surjective: missing " + missing);
  for (const auto& e : source.edges()) {
    const auto a = assignment[e.u], b = assignment[e.v];
    if (a != b && !target.edge_between(a, b))
      out.push_back("edge " + source.id(e.u) + "-" + source.id(e.v) + " maps to non-adjacent " + target.id(a) + "," +
                    target.id(b));
  }
  return out;
}

class VertexMap {
 public:
  VertexMap(std::shared_ptr<const Space> source, std::shared_ptr<const Space> target, std::vector<std::size_t> assignment)
      : source_(std::move(source)), target_(std::move(target)), assignment_(std::move(assignment)) {
    auto findings = map_findings(*source_, *target_, assignment_);
    if (!findings.empty()) throw ValidationError(std::move(findings));
    fibers_.resize(target_->size());
    for (std::size_t x = 0; x < assignment_.size(); ++x) fibers_[assignment_[x]].push_back(x);
  }

  const Space& source() const noexcept { return *source_; }
  const Space& target() const noexcept { return *target_; }
  const std::shared_ptr<const Space>& source_ptr() const noexcept { return source_; }
  const std::shared_ptr<const Space>& target_ptr() const noexcept { return target_; }

  std::size_t operator()(std::size_t x) const { return assignment_.at(x); }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  const VertexSet& fiber(std::size_t y) const { return fibers_.at(y); }

  // Distance in the target between images of two source vertices.
  double image_dist(std::size_t a, std::size_t b) const { return target_->dist(assignment_[a], assignment_[b]); }

 private:
  std::shared_ptr<const Space> source_;
  std::shared_ptr<const Space> target_;
  std::vector<std::size_t> assignment_;
  std::vector<VertexSet> fibers_;
};

inline VertexSet image(const VertexMap& f, const VertexSet& a) {
  VertexSet out;
  out.reserve(a.size());
  for (auto x : a) out.push_back(f(x));
  return normalize(std::move(out));
}

inline VertexSet preimage(const VertexMap& f, const VertexSet& b) {
  VertexSet out;
  for (auto y : b) out.insert(out.end(), f.fiber(y).begin(), f.fiber(y).end());
  return normalize(std::move(out));
}

// N(y, f, A) = |f^-1(y) ∩ A|
inline std::size_t multiplicity(const VertexMap& f, std::size_t y, const VertexSet& a) {
  std::size_t n = 0;
  for (auto x : f.fiber(y))
    if (std::binary_search(a.begin(), a.end(), x)) ++n;
  return n;
}

inline std::vector<std::size_t> multiplicity_counts(const VertexMap& f, const VertexSet& a) {
  std::vector<std::size_t> counts(f.target().size(), 0);
  for (auto x : a) ++counts[f(x)];
  return counts;
}

inline std::size_t max_multiplicity(const VertexMap& f, const VertexSet& a) {
  const auto counts = multiplicity_counts(f, a);
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

inline std::size_t max_multiplicity(const VertexMap& f) { return max_multiplicity(f, all_vertices(f.source())); }

// U(x, f, r): the x-component of f^-1(B(f(x), r)).
inline VertexSet u_component(const VertexMap& f, std::size_t x, double r) {
  if (x >= f.source().size()) throw ValidationError("unknown vertex-id " + std::to_string(x));
  if (!(r > 0.0)) throw ValidationError("u_component radius must be positive");
  return component_of(f.source(), preimage(f, ball(f.target(), f(x), r)), x);
}

// i(x, f): least multiplicity of f on the normal neighborhoods of x. The radius
// whose ball is the single point f(x) is not a neighborhood and is skipped.
inline std::size_t local_index(const VertexMap& f, std::size_t x) {
  auto radii = candidate_radii(f.target(), f(x));
  if (radii.size() > 1) radii.erase(radii.begin());
  std::size_t best = f.source().size();
  for (double r : radii) best = std::min(best, max_multiplicity(f, u_component(f, x, r)));
  return best;
}

inline VertexSet branch_set(const VertexMap& f) {
  std::vector<std::size_t> idx(f.source().size());
  parallel_for(idx.size(), [&](std::size_t x) { idx[x] = local_index(f, x); });
  VertexSet out;
  for (std::size_t x = 0; x < idx.size(); ++x)
    if (idx[x] > 1) out.push_back(x);
  return out;
}

// Checks f(U(x,f,r)) = B(f(x),r). Witness lists the symmetric difference.
inline Certificate openness_certificate(const VertexMap& f, std::size_t x, double r,
                                        std::optional<double> normal_radius_bound = std::nullopt) {
  Certificate c;
  c.name = "openness";
  if (normal_radius_bound && r > *normal_radius_bound + kDistTol) c.flags.push_back("radius above normal radius");
  const auto u = u_component(f, x, r);
  const auto img = image(f, u);
  const auto b = ball(f.target(), f(x), r);
  if (img != b) {
    VertexSet diff;
    std::set_symmetric_difference(img.begin(), img.end(), b.begin(), b.end(), std::back_inserter(diff));
    c.fail(diff, "target vertices where image and ball differ");
  }
  c.estimate = c.pass ? 1.0 : 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Normal radii

struct NormalProperties {
  bool disjoint_union = true;  // (2) preimage of the ball splits into disjoint U(x') over the fiber
  bool additivity = true;      // (3) N(z',X) = sum over the fiber of N(z', U(x'))
  bool surjective = true;      // (4) f(U(x')) = B(z, r)
  bool nesting = true;         // (8) smaller normal neighborhoods nest in or miss U(x')
  std::optional<bool> injective_on_level;  // (6), only when requested

  bool ok() const { return disjoint_union && additivity && surjective && nesting && injective_on_level.value_or(true); }
};

struct NormalRadius {
  std::size_t target_vertex = 0;
  double radius = 0.0;
  bool degenerate = false;
  double fiber_separation = kInf;  // M_z
  NormalProperties properties;     // record at `radius`
  std::optional<double> first_failure;
};

struct NormalRadiusOptions {
  bool check_injectivity = false;     // properties (6)/(7) are not enforced unless asked
  std::size_t nesting_source_cap = 64;  // the (8) scan is run exhaustively up to this source size
};

namespace detail {

inline NormalProperties check_normal_properties(const VertexMap& f, std::size_t z, double r,
                                                const NormalRadiusOptions& opt,
                                                const std::vector<std::size_t>& level_of_target) {
  NormalProperties p;
  const Space& X = f.source();
  const auto& fib = f.fiber(z);
  const auto b = ball(f.target(), z, r);
  const auto pre = preimage(f, b);
  const auto comps = components(X, pre);
  std::vector<std::size_t> comp_of(X.size(), comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (auto v : comps[c]) comp_of[v] = c;

  std::vector<std::size_t> fiber_hits(comps.size(), 0);
  for (auto x : fib) ++fiber_hits[comp_of[x]];
  for (auto h : fiber_hits)
    if (h != 1) p.disjoint_union = false;

  const auto total = multiplicity_counts(f, pre);
  std::vector<std::size_t> summed(f.target().size(), 0);
  for (auto x : fib) {
    const auto& u = comps[comp_of[x]];
    for (auto v : u) ++summed[f(v)];
    if (image(f, u) != b) p.surjective = false;
    if (opt.check_injectivity) {
      const std::size_t n = level_of_target[z];
      VertexSet seen;
      bool inj = true;
      for (auto v : u) {
        if (level_of_target[f(v)] != n) continue;
        const auto y = f(v);
        if (std::binary_search(seen.begin(), seen.end(), y)) inj = false;
        seen.insert(std::upper_bound(seen.begin(), seen.end(), y), y);
      }
      p.injective_on_level = p.injective_on_level.value_or(true) && inj;
    }
  }
  for (auto y : b)
    if (summed[y] != total[y]) p.additivity = false;

  if (X.size() <= opt.nesting_source_cap) {
    for (auto x2 : pre) {
      const auto z2 = f(x2);
      for (double r2 : candidate_radii(f.target(), z2)) {
        const auto b2 = ball(f.target(), z2, r2);
        if (!is_subset(b2, b)) break;
        const auto u2 = component_of(X, preimage(f, b2), x2);
        for (auto x : fib) {
          const auto& u = comps[comp_of[x]];
          if (!is_subset(u2, u) && intersects(u2, u)) p.nesting = false;
        }
      }
    }
  }
  return p;
}

}  // namespace detail

// Largest candidate radius R at z = f(x) such that every candidate r <= R satisfies
// the normal-neighborhood properties for the fiber of z (the whole source plays D).
inline NormalRadius normal_radius(const VertexMap& f, std::size_t x, const NormalRadiusOptions& opt = {}) {
  const std::size_t z = f(x);
  NormalRadius res;
  res.target_vertex = z;
  const auto& fib = f.fiber(z);
  for (std::size_t a = 0; a < fib.size(); ++a)
    for (std::size_t b = a + 1; b < fib.size(); ++b)
      res.fiber_separation = std::min(res.fiber_separation, f.source().dist(fib[a], fib[b]) / 6.0);

  std::vector<std::size_t> level(f.target().size(), 0);
  if (opt.check_injectivity)
    for (std::size_t y = 0; y < level.size(); ++y) level[y] = f.fiber(y).size();

  const auto radii = candidate_radii(f.target(), z);
  bool any = false;
  for (double r : radii) {
    auto props = detail::check_normal_properties(f, z, r, opt, level);
    if (!props.ok()) {
      res.first_failure = r;
      if (!any) res.properties = props;
      break;
    }
    any = true;
    res.radius = r;
    res.properties = props;
  }
  if (!any || f.target().size() == 1) {
    res.degenerate = true;
    res.radius = radii.front();
  }
  return res;
}

struct NormalRadiusTable {
  std::vector<NormalRadius> by_target;  // indexed by target vertex

  double radius(std::size_t z) const { return by_target.at(z).radius; }
};

inline NormalRadiusTable normal_radius_table(const VertexMap& f, const NormalRadiusOptions& opt = {}) {
  NormalRadiusTable t;
  t.by_target.resize(f.target().size());
  parallel_for(f.target().size(), [&](std::size_t z) { t.by_target[z] = normal_radius(f, f.fiber(z).front(), opt); });
  return t;
}

// ---------------------------------------------------------------------------
// Fiber decomposition

struct FiberDecomposition {
  VertexSet level;                // D_n
  std::vector<VertexSet> sheets;  // D_{n,1..n}
  bool normal = true;             // f(inner boundary of D) within inner boundary of f(D)
};

inline VertexSet inner_boundary(const Space& s, const VertexSet& set) {
  const auto in = to_mask(s.size(), set);
  VertexSet out;
  for (auto v : set)
    for (const auto& inc : s.neighbors(v))
      if (!in[inc.to]) {
        out.push_back(v);
        break;
      }
  return out;
}

inline bool injective_on(const VertexMap& f, const VertexSet& set) { return image(f, set).size() == set.size(); }

// Splits D_n = {x in D : N(f(x), f, D) = n} into n sets on each of which f is a
// bijection onto f(D_n), by the sheet-by-sheet greedy sweep over a cover of D_n
// by injectivity neighborhoods.
inline FiberDecomposition decompose_fibers(const VertexMap& f, const VertexSet& d, std::size_t n,
                                           const NormalRadiusTable* table = nullptr) {
  const auto dom = normalize(d);
  const std::size_t top = max_multiplicity(f, dom);
  if (n < 1 || n > top)
    throw ValidationError("n out of range: " + std::to_string(n) + " not in [1," + std::to_string(top) + "]");
  FiberDecomposition res;
  const auto fd = image(f, dom);
  const auto bd_img = inner_boundary(f.target(), fd);
  res.normal = is_subset(image(f, inner_boundary(f.source(), dom)), bd_img);

  const auto counts = multiplicity_counts(f, dom);
  for (auto x : dom)
    if (counts[f(x)] == n) res.level.push_back(x);

  NormalRadiusTable local;
  if (!table) {
    local = normal_radius_table(f);
    table = &local;
  }
  std::vector<VertexSet> cover;
  for (auto x : res.level) {
    VertexSet v;
    const auto u = u_component(f, x, table->radius(f(x)));
    std::set_intersection(u.begin(), u.end(), res.level.begin(), res.level.end(), std::back_inserter(v));
    if (!injective_on(f, v)) v = {x};
    cover.push_back(std::move(v));
  }

  VertexSet used;
  for (std::size_t k = 0; k < n; ++k) {
    VertexSet sheet;
    std::vector<char> taken_image(f.target().size(), 0);
    for (const auto& v : cover)
      for (auto x : v) {
        if (taken_image[f(x)] || std::binary_search(used.begin(), used.end(), x)) continue;
        sheet.push_back(x);
        taken_image[f(x)] = 1;
      }
    sheet = normalize(std::move(sheet));
    used = set_union(used, sheet);
    res.sheets.push_back(std::move(sheet));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Greedy 5r cover

struct Neighborhood {
  std::size_t center = 0;
  double radius = 0.0;
};

struct GreedyCoverResult {
  std::vector<std::size_t> selected;  // indices into the input family
  std::vector<std::string> violations;
};

// Disjoint subfamily by decreasing radius whose 5-inflations cover the family.
inline GreedyCoverResult greedy_cover(const VertexMap& f, const std::vector<Neighborhood>& family,
                                      const NormalRadiusTable* table = nullptr) {
  GreedyCoverResult res;
  if (table) {
    for (std::size_t i = 0; i < family.size(); ++i) {
      const double bound = table->radius(f(family[i].center));
      if (!(5.0 * family[i].radius < bound))
        res.violations.push_back("element " + std::to_string(i) + ": 5r = " + detail::fmt_num(5.0 * family[i].radius) +
                                 " not below normal radius " + detail::fmt_num(bound));
    }
  }
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return family[a].radius > family[b].radius; });
  std::vector<VertexSet> chosen_sets;
  for (auto i : order) {
    const auto u = u_component(f, family[i].center, family[i].radius);
    bool disjoint = true;
    for (const auto& c : chosen_sets)
      if (intersects(u, c)) {
        disjoint = false;
        break;
      }
    if (disjoint) {
      res.selected.push_back(i);
      chosen_sets.push_back(u);
    }
  }
  return res;
}

}  // namespace qrgeom
