#pragma once

// Discrete p-modulus: minimize sum_e c_e rho_e^p subject to sum_e a_ke rho_e >= 1
// for every curve k of the family, rho >= 0, with c_e = w_e len_e.
//
// The solver maximizes the concave dual
//   D(lambda) = sum_k lambda_k - (p-1) sum_e c_e rho_e(lambda)^p,
//   rho_e(lambda) = ((A^T lambda)_e / (p c_e))^(1/(p-1)),
// one multiplier at a time (closed form for p = 2, a monotone scalar root otherwise),
// and grows the working set of curves from a shortest-path oracle. Every dual value
// is a lower bound; the rescaled primal density is admissible, so the reported gap
// brackets the true modulus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qrgeom/covering.hpp"
#include "qrgeom/error.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

// One admissibility constraint: sum over terms of coef * rho[var] >= 1.
struct Row {
  std::vector<std::pair<std::size_t, double>> terms;
  std::vector<std::size_t> curve;  // vertex sequence in the space the curve lives in
};

inline double row_value(const Row& r, const std::vector<double>& rho) {
  double v = 0.0;
  for (auto [e, a] : r.terms) v += a * rho[e];
  return v;
}

// A curve family seen through its variables: `shortest(rho)` returns curves of least
// rho-length (at least one global minimizer); an empty result means an empty family.
struct FamilyOracle {
  std::size_t num_vars = 0;
  std::vector<double> var_len;
  std::function<std::vector<Row>(const std::vector<double>&)> shortest;
  std::string kind;
};

// ---------------------------------------------------------------------------
// Weights

// Unit weight on every edge: c_e = len_e.
inline std::vector<double> unit_costs(const Space& s) {
  std::vector<double> c;
  for (const auto& e : s.edges()) c.push_back(e.len);
  return c;
}

// Vertex weight profile to edge costs: c_e = w_e len_e = (w(a) + w(b))/2.
inline std::vector<double> vertex_costs(const Space& s, const std::vector<double>& w) {
  if (w.size() != s.size()) throw ValidationError("vertex weight profile has wrong length");
  std::vector<double> c;
  for (const auto& e : s.edges()) c.push_back(0.5 * (w[e.u] + w[e.v]));
  return c;
}

inline std::vector<double> mass_costs(const Space& s) {
  return vertex_costs(s, std::vector<double>(s.masses().begin(), s.masses().end()));
}

// ---------------------------------------------------------------------------
// Families

inline Row curve_row(const Space& s, const Curve& c) {
  if (!is_valid_curve(s, c)) throw ValidationError("curve has non-adjacent consecutive vertices");
  if (c.vertices.size() < 2) throw ValidationError("constant curve in family: no density is admissible");
  std::vector<double> coef(s.edges().size(), 0.0);
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
    const auto e = *s.edge_between(c.vertices[i], c.vertices[i + 1]);
    coef[e] += s.edges()[e].len;
  }
  Row r;
  for (std::size_t e = 0; e < coef.size(); ++e)
    if (coef[e] > 0.0) r.terms.emplace_back(e, coef[e]);
  r.curve = c.vertices;
  return r;
}

inline std::vector<double> edge_lengths(const Space& s) {
  std::vector<double> l;
  for (const auto& e : s.edges()) l.push_back(e.len);
  return l;
}

inline FamilyOracle explicit_family(const Space& s, const std::vector<Curve>& curves) {
  std::vector<Row> rows;
  for (const auto& c : curves) rows.push_back(curve_row(s, c));
  FamilyOracle o;
  o.num_vars = s.edges().size();
  o.var_len = edge_lengths(s);
  o.kind = "explicit";
  o.shortest = [rows](const std::vector<double>&) { return rows; };
  return o;
}

namespace detail {

// Multi-source Dijkstra from E inside `within`; one row per reached F vertex.
// step(edge index, from, to) -> (cost, optional term).
struct StepTerm {
  double cost = 0.0;
  bool has_term = false;
  std::size_t var = 0;
  double coef = 0.0;
};

inline std::vector<Row> connecting_rows(const Space& g, const VertexSet& E, const VertexSet& F,
                                        const std::vector<char>& within,
                                        const std::function<StepTerm(std::size_t)>& step) {
  const std::size_t n = g.size();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> pred(n, n), pred_edge(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (auto v : E) {
    dist[v] = 0.0;
    heap.push({0.0, v});
  }
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& inc : g.neighbors(u)) {
      if (!within[inc.to]) continue;
      const double nd = d + step(inc.edge).cost;
      if (nd < dist[inc.to]) {
        dist[inc.to] = nd;
        pred[inc.to] = u;
        pred_edge[inc.to] = inc.edge;
        heap.push({nd, inc.to});
      }
    }
  }
  std::vector<std::pair<double, std::size_t>> reached;
  for (auto v : F)
    if (dist[v] < kInf) reached.emplace_back(dist[v], v);
  std::sort(reached.begin(), reached.end());
  std::vector<Row> rows;
  for (auto [d, v] : reached) {
    Row r;
    std::map<std::size_t, double> coef;
    for (std::size_t w = v;; w = pred[w]) {
      r.curve.push_back(w);
      if (pred[w] == n) break;
      const auto t = step(pred_edge[w]);
      if (t.has_term) coef[t.var] += t.coef;
    }
    std::reverse(r.curve.begin(), r.curve.end());
    r.terms.assign(coef.begin(), coef.end());
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void check_connect_sets(const Space& s, const VertexSet& E, const VertexSet& F, const VertexSet& within) {
  if (E.empty() || F.empty()) throw ValidationError("connecting family needs nonempty E and F");
  if (intersects(E, F)) throw ValidationError("connecting family needs disjoint E and F");
  if (!is_subset(E, within) || !is_subset(F, within)) throw ValidationError("E and F must lie inside the carrier");
  for (auto v : within)
    if (v >= s.size()) throw ValidationError("carrier vertex out of range");
}

}  // namespace detail

// All curves in `within` joining E to F.
inline FamilyOracle connecting_family(const Space& s, VertexSet E, VertexSet F, VertexSet within) {
  E = normalize(std::move(E));
  F = normalize(std::move(F));
  within = normalize(std::move(within));
  detail::check_connect_sets(s, E, F, within);
  FamilyOracle o;
  o.num_vars = s.edges().size();
  o.var_len = edge_lengths(s);
  o.kind = "connect";
  const auto mask = to_mask(s.size(), within);
  o.shortest = [&s, E, F, mask](const std::vector<double>& rho) {
    return detail::connecting_rows(s, E, F, mask, [&](std::size_t e) {
      const double len = s.edges()[e].len;
      return detail::StepTerm{rho[e] * len, true, e, len};
    });
  };
  return o;
}

// f(Gamma) for Gamma = curves in `within` joining E to F in the source; density on
// target edges. Collapsed edges (f(u) = f(v)) contribute nothing.
inline FamilyOracle image_connecting_family(const VertexMap& f, VertexSet E, VertexSet F, VertexSet within) {
  E = normalize(std::move(E));
  F = normalize(std::move(F));
  within = normalize(std::move(within));
  detail::check_connect_sets(f.source(), E, F, within);
  const Space& X = f.source();
  const Space& Y = f.target();
  std::vector<std::optional<std::size_t>> tedge(X.edges().size());
  for (std::size_t e = 0; e < X.edges().size(); ++e) {
    const auto a = f(X.edges()[e].u), b = f(X.edges()[e].v);
    if (a != b) tedge[e] = Y.edge_between(a, b);
  }
  FamilyOracle o;
  o.num_vars = Y.edges().size();
  o.var_len = edge_lengths(Y);
  o.kind = "image-connect";
  const auto mask = to_mask(X.size(), within);
  o.shortest = [&X, &Y, E, F, mask, tedge](const std::vector<double>& rho) {
    return detail::connecting_rows(X, E, F, mask, [&](std::size_t e) {
      if (!tedge[e]) return detail::StepTerm{};
      const auto t = *tedge[e];
      const double len = Y.edges()[t].len;
      return detail::StepTerm{rho[t] * len, true, t, len};
    });
  };
  return o;
}

// f(Gamma) for an explicit source family.
inline FamilyOracle image_explicit_family(const VertexMap& f, const std::vector<Curve>& curves) {
  const Space& X = f.source();
  const Space& Y = f.target();
  std::vector<Row> rows;
  for (const auto& c : curves) {
    if (!is_valid_curve(X, c)) throw ValidationError("curve has non-adjacent consecutive vertices");
    std::map<std::size_t, double> coef;
    for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
      const auto a = f(c.vertices[i]), b = f(c.vertices[i + 1]);
      if (a == b) continue;
      const auto t = *Y.edge_between(a, b);
      coef[t] += Y.edges()[t].len;
    }
    if (coef.empty()) throw ValidationError("image curve is constant: no density is admissible");
    Row r;
    r.terms.assign(coef.begin(), coef.end());
    r.curve = c.vertices;
    rows.push_back(std::move(r));
  }
  FamilyOracle o;
  o.num_vars = Y.edges().size();
  o.var_len = edge_lengths(Y);
  o.kind = "image-explicit";
  o.shortest = [rows](const std::vector<double>&) { return rows; };
  return o;
}

// ---------------------------------------------------------------------------
// Solver

struct ModulusOptions {
  double p = 2.0;
  double tol = 1e-6;       // admissibility: curves shorter than (1 - tol/100) x current minimum are added
  double gap_tol = 1e-10;  // relative duality gap for the inner loop
  std::size_t max_iter = 100000;  // coordinate sweeps, summed over rounds
  std::size_t max_rounds = 10000;
};

struct ModulusResult {
  double value = 0.0;
  std::vector<double> density;  // per variable (edge of the carrier space)
  double p = 2.0;
  std::vector<double> cost;     // c_e = w_e len_e used
  std::size_t iterations = 0;
  std::size_t rounds = 0;
  double dual_bound = 0.0;
  double gap = 0.0;             // value - dual_bound
  double min_curve_length = 0.0;  // least rho-length over the family after rescaling
  bool exact = false;
  bool empty_family = false;
  bool converged = false;
  std::vector<Row> working_set;
  std::vector<double> multipliers;
};

namespace detail {

class DualSolver {
 public:
  DualSolver(const std::vector<double>& cost, const std::vector<double>& var_len, double p)
      : c_(cost), len_(var_len), p_(p), q_(1.0 / (p - 1.0)), s_(cost.size(), 0.0), rho_(cost.size(), 0.0) {
    for (std::size_t e = 0; e < c_.size(); ++e)
      if (free_var(e)) rho_[e] = 1.0 / len_[e];
  }

  bool free_var(std::size_t e) const { return c_[e] <= 0.0; }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& lambda() const { return lambda_; }

  void add(Row r) {
    rows_.push_back(std::move(r));
    lambda_.push_back(0.0);
  }

  void sweep() {
    for (std::size_t k = 0; k < rows_.size(); ++k) update(k);
  }

  // Rebuild s and rho from lambda to keep rounding drift out of the bounds.
  void refresh() {
    std::fill(s_.begin(), s_.end(), 0.0);
    for (std::size_t k = 0; k < rows_.size(); ++k)
      for (auto [e, a] : rows_[k].terms) s_[e] += lambda_[k] * a;
    for (std::size_t e = 0; e < c_.size(); ++e) rho_[e] = rho_at(e, s_[e]);
  }

  double dual() const {
    double d = 0.0;
    for (double l : lambda_) d += l;
    for (std::size_t e = 0; e < c_.size(); ++e)
      if (!free_var(e)) d -= (p_ - 1.0) * c_[e] * std::pow(rho_[e], p_);
    return d;
  }

  double min_row() const {
    double m = kInf;
    for (const auto& r : rows_) m = std::min(m, row_value(r, rho_));
    return m;
  }

  double energy(double scale) const {
    double v = 0.0;
    for (std::size_t e = 0; e < c_.size(); ++e)
      if (!free_var(e) && rho_[e] > 0.0) v += c_[e] * std::pow(rho_[e] / scale, p_);
    return v;
  }

 private:
  double rho_at(std::size_t e, double s) const {
    if (free_var(e)) return 1.0 / len_[e];
    if (s <= 0.0) return 0.0;
    return std::pow(s / (p_ * c_[e]), q_);
  }

  // Value of row k as a function of its own multiplier.
  double row_at(std::size_t k, double lam) const {
    double v = 0.0;
    const double dl = lam - lambda_[k];
    for (auto [e, a] : rows_[k].terms) v += a * rho_at(e, std::max(0.0, s_[e] + dl * a));
    return v;
  }

  double row_slope(std::size_t k, double lam) const {
    double v = 0.0;
    const double dl = lam - lambda_[k];
    for (auto [e, a] : rows_[k].terms) {
      if (free_var(e)) continue;
      const double s = std::max(0.0, s_[e] + dl * a);
      if (s <= 0.0) continue;
      v += a * q_ * std::pow(s / (p_ * c_[e]), q_ - 1.0) * a / (p_ * c_[e]);
    }
    return v;
  }

  void update(std::size_t k) {
    const double old = lambda_[k];
    double lam;
    if (row_at(k, 0.0) >= 1.0) {
      lam = 0.0;
    } else if (p_ == 2.0) {
      double fixed = 0.0, slope = 0.0;
      for (auto [e, a] : rows_[k].terms) {
        if (free_var(e)) {
          fixed += a * rho_[e];
          continue;
        }
        fixed += a * (s_[e] - old * a) / (2.0 * c_[e]);
        slope += a * a / (2.0 * c_[e]);
      }
      lam = std::max(0.0, (1.0 - fixed) / slope);
    } else {
      double lo = 0.0, hi = std::max(old, 1e-300);
      while (row_at(k, hi) < 1.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw Error(ErrorKind::computation, "modulus multiplier diverged");
      }
      lam = old > lo && old < hi ? old : 0.5 * (lo + hi);
      for (int it = 0; it < 200; ++it) {
        const double v = row_at(k, lam) - 1.0;
        if (v == 0.0) break;
        (v < 0.0 ? lo : hi) = lam;
        const double d = row_slope(k, lam);
        double next = d > 0.0 ? lam - v / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - lam) <= 1e-16 * std::max(1.0, lam) || hi - lo <= 1e-16 * hi) {
          lam = next;
          break;
        }
        lam = next;
      }
    }
    const double dl = lam - old;
    if (dl == 0.0) return;
    lambda_[k] = lam;
    for (auto [e, a] : rows_[k].terms) {
      s_[e] = std::max(0.0, s_[e] + dl * a);
      rho_[e] = rho_at(e, s_[e]);
    }
  }

  std::vector<double> c_, len_;
  double p_, q_;
  std::vector<double> s_, rho_;
  std::vector<Row> rows_;
  std::vector<double> lambda_;
};

}  // namespace detail

inline ModulusResult modulus(const FamilyOracle& family, const std::vector<double>& cost,
                             const ModulusOptions& opt = {}) {
  if (!(opt.p > 1.0)) throw ValidationError("p must exceed 1");
  if (cost.size() != family.num_vars) throw ValidationError("weight profile does not match the family's edges");
  for (double c : cost)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("weights must be finite and nonnegative");

  ModulusResult res;
  res.p = opt.p;
  res.cost = cost;
  detail::DualSolver solver(cost, family.var_len, opt.p);

  std::set<std::vector<std::size_t>> seen;
  auto offer = [&](const std::vector<Row>& rows, double threshold) {
    std::size_t added = 0;
    for (const auto& r : rows) {
      if (row_value(r, solver.rho()) >= threshold) continue;
      if (!seen.insert(r.curve).second) continue;
      solver.add(r);
      ++added;
    }
    return added;
  };

  auto initial = family.shortest(solver.rho());
  if (initial.empty()) {
    res.empty_family = true;
    res.converged = true;
    res.exact = true;
    res.density.assign(family.num_vars, 0.0);
    return res;
  }
  offer(initial, 1.0);

  double m_full = kInf;
  while (true) {
    ++res.rounds;
    // inner: coordinate ascent to a small relative gap
    while (res.iterations < opt.max_iter) {
      for (int i = 0; i < 10 && res.iterations < opt.max_iter; ++i, ++res.iterations) solver.sweep();
      solver.refresh();
      const double m = solver.min_row();
      if (!(m > 0.0)) continue;
      const double v = solver.energy(m);
      const double d = solver.dual();
      if (v - d <= opt.gap_tol * std::max(v, 1e-300)) break;
    }
    const double m_work = solver.min_row();
    const auto rows = family.shortest(solver.rho());
    m_full = m_work;
    for (const auto& r : rows) m_full = std::min(m_full, row_value(r, solver.rho()));
    const std::size_t added = offer(rows, m_work * (1.0 - 0.01 * opt.tol));
    if (added == 0) {
      res.converged = res.iterations < opt.max_iter;
      break;
    }
    if (res.rounds >= opt.max_rounds || res.iterations >= opt.max_iter) break;
  }

  const double scale = m_full > 0.0 && std::isfinite(m_full) ? m_full : 1.0;
  res.density = solver.rho();
  for (auto& r : res.density) r /= scale;
  res.value = solver.energy(scale);
  res.dual_bound = solver.dual();
  res.gap = res.value - res.dual_bound;
  res.min_curve_length = m_full / scale;
  res.working_set = solver.rows();
  res.multipliers = solver.lambda();
  return res;
}

// Least rho-length over the family (re-runs the oracle on a given density).
inline double min_curve_length(const FamilyOracle& family, const std::vector<double>& rho) {
  double m = kInf;
  for (const auto& r : family.shortest(rho)) m = std::min(m, row_value(r, rho));
  return m;
}

// ---------------------------------------------------------------------------
// Profiles

// E = closed r-ball, F = the shell at distance s, carrier = closed s-ball.
inline ModulusResult annulus_modulus(const Space& s, std::size_t center, double r, double outer, const std::vector<double>& cost,
                                     const ModulusOptions& opt = {}) {
  const auto within = ball_closed(s, center, outer);
  const auto E = ball_closed(s, center, r);
  VertexSet F;
  for (auto v : within)
    if (s.dist(center, v) >= outer - kDistTol) F.push_back(v);
  if (r >= outer - kDistTol || F.empty() || intersects(E, F)) {
    ModulusResult res;
    res.p = opt.p;
    res.empty_family = true;
    res.exact = true;
    res.converged = true;
    res.density.assign(s.edges().size(), 0.0);
    return res;
  }
  return modulus(connecting_family(s, E, F, within), cost, opt);
}

struct LoewnerEntry {
  double zeta = 0.0;
  double modulus = 0.0;
  bool empty_family = false;
};

inline std::vector<LoewnerEntry> loewner_profile(const Space& s, const std::vector<std::pair<VertexSet, VertexSet>>& pairs,
                                                 double q, const std::vector<double>& cost) {
  std::vector<LoewnerEntry> out;
  for (const auto& [e0, f0] : pairs) {
    const auto E = normalize(e0), F = normalize(f0);
    double sep = kInf;
    for (auto a : E)
      for (auto b : F) sep = std::min(sep, s.dist(a, b));
    const double small = std::min(diameter(s, E), diameter(s, F));
    LoewnerEntry entry;
    entry.zeta = small > 0.0 ? sep / small : kInf;
    ModulusOptions opt;
    opt.p = q;
    auto res = modulus(connecting_family(s, E, F, all_vertices(s)), cost, opt);
    entry.modulus = res.value;
    entry.empty_family = res.empty_family;
    out.push_back(entry);
  }
  return out;
}

// g_e = |u(a) - u(b)| / len_e, the least density that is an upper gradient of u.
inline std::vector<double> minimal_upper_gradient(const Space& s, const std::vector<double>& u) {
  if (u.size() != s.size()) throw ValidationError("vertex function has wrong length");
  std::vector<double> g;
  for (const auto& e : s.edges()) g.push_back(std::abs(u[e.u] - u[e.v]) / e.len);
  return g;
}

// First edge whose single-edge curve breaks |u(b) - u(a)| <= g_e len_e, if any.
inline std::optional<std::size_t> upper_gradient_violation(const Space& s, const std::vector<double>& u,
                                                           const std::vector<double>& g, double tol = kDistTol) {
  for (std::size_t e = 0; e < s.edges().size(); ++e) {
    const auto& ed = s.edges()[e];
    if (std::abs(u[ed.u] - u[ed.v]) > g[e] * ed.len + tol) return e;
  }
  return std::nullopt;
}

}  // namespace qrgeom
