#pragma once

// Pullback measure psi*nu(A) = sum_y N(y,f,A) nu(y), Jacobians and index densities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/space.hpp"

namespace qrgeom {

inline constexpr double kMeasureRelTol = 1e-12;

inline std::vector<double> masses_of(const Space& s) { return {s.masses().begin(), s.masses().end()}; }

inline void check_measure(const std::vector<double>& m, std::size_t n, const char* what) {
  if (m.size() != n) throw ValidationError(std::string(what) + " has wrong length");
  for (double v : m)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " has a negative or non-finite entry");
}

// Per source vertex: nu(f(x)).
inline std::vector<double> pullback_measure(const VertexMap& f, const std::vector<double>& nu) {
  check_measure(nu, f.target().size(), "target measure");
  std::vector<double> out(f.source().size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = nu[f(x)];
  return out;
}

inline std::vector<double> pullback_measure(const VertexMap& f) { return pullback_measure(f, masses_of(f.target())); }

inline double measure_of(const std::vector<double>& m, const VertexSet& a) {
  double s = 0.0;
  for (auto v : a) s += m.at(v);
  return s;
}

inline bool close_rel(double a, double b, double rel = kMeasureRelTol) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// sum_x rho(x) psi*nu(x) against sum_y [sum over the fiber of rho] nu(y).
inline Certificate change_of_variables_check(const VertexMap& f, const std::vector<double>& rho,
                                             const std::vector<double>& nu) {
  check_measure(rho, f.source().size(), "rho");
  const auto pb = pullback_measure(f, nu);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t x = 0; x < rho.size(); ++x) lhs += rho[x] * pb[x];
  for (std::size_t y = 0; y < f.target().size(); ++y) {
    double fiber_sum = 0.0;
    for (auto x : f.fiber(y)) fiber_sum += rho[x];
    rhs += fiber_sum * nu[y];
  }
  Certificate c;
  c.name = "change_of_variables";
  c.values["lhs"] = lhs;
  c.values["rhs"] = rhs;
  c.estimate = std::abs(lhs - rhs);
  if (!close_rel(lhs, rhs)) c.fail({}, "totals");
  return c;
}

// J_f(x) = nu(f(x))/mu(x). Infinite when mu(x) = 0 < nu(f(x)); undefined (nullopt) at 0/0.
struct JacobianField {
  std::vector<std::optional<double>> forward;
  std::vector<std::optional<double>> inverse;
};

inline std::optional<double> mass_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  if (num > 0.0) return kInf;
  return std::nullopt;
}

inline JacobianField jacobians(const VertexMap& f, const std::vector<double>& mu, const std::vector<double>& nu) {
  check_measure(mu, f.source().size(), "source measure");
  check_measure(nu, f.target().size(), "target measure");
  JacobianField j;
  for (std::size_t x = 0; x < f.source().size(); ++x) {
    j.forward.push_back(mass_ratio(nu[f(x)], mu[x]));
    j.inverse.push_back(mass_ratio(mu[x], nu[f(x)]));
  }
  return j;
}

inline JacobianField jacobians(const VertexMap& f) { return jacobians(f, masses_of(f.source()), masses_of(f.target())); }

// Condition N: a mu-null vertex never lands on a nu-positive vertex.
inline Certificate condition_N_check(const VertexMap& f, const std::vector<double>& mu, const std::vector<double>& nu) {
  Certificate c;
  c.name = "condition_N";
  for (std::size_t x = 0; x < f.source().size(); ++x)
    if (mu[x] <= 0.0 && nu[f(x)] > 0.0) c.fail({x}, "mu-null vertex with nu-positive image");
  c.estimate = c.pass ? 1.0 : 0.0;
  return c;
}

// Condition N^-1: a mu-positive vertex never lands on a nu-null vertex.
inline Certificate condition_N_inverse_check(const VertexMap& f, const std::vector<double>& mu,
                                             const std::vector<double>& nu) {
  Certificate c;
  c.name = "condition_N_inverse";
  for (std::size_t x = 0; x < f.source().size(); ++x)
    if (mu[x] > 0.0 && nu[f(x)] <= 0.0) c.fail({x}, "mu-positive vertex with nu-null image");
  c.estimate = c.pass ? 1.0 : 0.0;
  return c;
}

// sum rho J_f mu <= sum_y (sum of rho over the fiber) nu(y). Vertices with mu = 0
// carry no absolutely continuous part, so the left side drops them.
inline Certificate area_inequality_check(const VertexMap& f, const std::vector<double>& rho,
                                         const std::vector<double>& mu, const std::vector<double>& nu) {
  check_measure(rho, f.source().size(), "rho");
  const auto j = jacobians(f, mu, nu);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t x = 0; x < rho.size(); ++x) {
    if (mu[x] > 0.0) lhs += rho[x] * (*j.forward[x]) * mu[x];
    rhs += rho[x] * nu[f(x)];
  }
  Certificate c;
  c.name = "area_inequality";
  c.values["lhs"] = lhs;
  c.values["rhs"] = rhs;
  const bool equal = close_rel(lhs, rhs);
  c.values["equality"] = equal ? 1.0 : 0.0;
  const bool n_holds = condition_N_check(f, mu, nu).pass;
  c.values["condition_N"] = n_holds ? 1.0 : 0.0;
  if (lhs > rhs && !equal) c.fail({}, "totals");
  // Under Condition N the two sides agree term by term.
  if (n_holds && !equal) c.fail({}, "Condition N holds but the inequality is strict");
  c.estimate = rhs - lhs;
  return c;
}

// ---------------------------------------------------------------------------
// Essential index

inline std::optional<double> essential_index(const VertexMap& f, std::size_t x, const std::vector<double>& nu,
                                             double r) {
  const auto b = ball(f.target(), f(x), r);
  const double den = measure_of(nu, b);
  if (den <= 0.0) return std::nullopt;
  const auto pb = pullback_measure(f, nu);
  return measure_of(pb, u_component(f, x, r)) / den;
}

struct EssentialIndexProfile {
  std::optional<double> value;  // max over admissible radii with nu(B) > 0
  double radius_cap = 0.0;
  std::size_t radii_used = 0;
  std::size_t radii_skipped = 0;  // below the cap but N(f,U) above the local index
};

// Max over candidate radii not exceeding the cap (default: the normal radius at f(x))
// at which U(x,f,r) carries multiplicity exactly i(x,f). Past that scale U is no
// longer a normal neighborhood of x alone and the ratio may exceed i.
inline EssentialIndexProfile essential_index_profile(const VertexMap& f, std::size_t x, const std::vector<double>& nu,
                                                     std::optional<double> cap = std::nullopt) {
  EssentialIndexProfile p;
  p.radius_cap = cap ? *cap : normal_radius(f, x).radius;
  const std::size_t i = local_index(f, x);
  for (double r : candidate_radii(f.target(), f(x))) {
    if (r > p.radius_cap + kDistTol) break;
    if (max_multiplicity(f, u_component(f, x, r)) != i) {
      ++p.radii_skipped;
      continue;
    }
    const auto v = essential_index(f, x, nu, r);
    if (!v) continue;
    ++p.radii_used;
    p.value = std::max(p.value.value_or(0.0), *v);
  }
  return p;
}

}  // namespace qrgeom
