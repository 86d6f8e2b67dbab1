#pragma once

// Modulus-based and analytic quasiregularity certificates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/measure.hpp"
#include "qrgeom/modulus.hpp"
#include "qrgeom/parallel.hpp"

namespace qrgeom {

// Curves in `within` (the open set Omega_0) joining E to F.
struct ConnectSpec {
  VertexSet E, F, within;
};

struct ModulusSample {
  double source = 0.0;  // Mod_Q(Gamma)
  double image = 0.0;   // modulus of f(Gamma), weighted as the certificate requires
  double ratio = 0.0;
  double gap = 0.0;
};

struct ModulusCertificate {
  Certificate certificate;
  std::vector<ModulusSample> samples;
};

inline double modulus_ratio(double num, double den) {
  if (den <= 0.0) return num <= 0.0 ? 1.0 : kInf;
  return num / den;
}

namespace detail {

template <class ImageCost, class Ratio>
ModulusCertificate modulus_certificate(const VertexMap& f, const std::vector<ConnectSpec>& samples, double q,
                                       const std::vector<double>& mu, ImageCost image_cost, Ratio ratio, double bound,
                                       const char* name) {
  ModulusCertificate out;
  out.samples.resize(samples.size());
  ModulusOptions opt;
  opt.p = q;
  const auto src_cost = vertex_costs(f.source(), mu);
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& s = samples[i];
    const auto a = modulus(connecting_family(f.source(), s.E, s.F, s.within), src_cost, opt);
    const auto b = modulus(image_connecting_family(f, s.E, s.F, s.within), image_cost(s), opt);
    out.samples[i] = {a.value, b.value, ratio(a.value, b.value), std::max(a.gap, b.gap)};
  });
  auto& c = out.certificate;
  c.name = name;
  c.estimate = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (out.samples[i].ratio > c.estimate || i == 0) {
      c.estimate = out.samples[i].ratio;
      c.witness = {i};
      c.witness_kind = "family sample";
    }
  }
  if (c.estimate > bound + 1e-9) c.fail(c.witness, "family sample");
  return out;
}

}  // namespace detail

// K_O: Mod_Q(Gamma) <= K sum_y N(y,f,Omega_0) rho(y)^Q nu(y) for every rho admissible
// for f(Gamma); the least K is Mod_Q(Gamma) / Mod_Q^{N nu}(f(Gamma)).
inline ModulusCertificate ko_certificate(const VertexMap& f, const std::vector<ConnectSpec>& samples, double q,
                                         const std::vector<double>& mu, const std::vector<double>& nu,
                                         double bound = kInf) {
  auto image_cost = [&](const ConnectSpec& s) {
    const auto counts = multiplicity_counts(f, normalize(s.within));
    std::vector<double> w(f.target().size());
    for (std::size_t y = 0; y < w.size(); ++y) w[y] = static_cast<double>(counts[y]) * nu[y];
    return vertex_costs(f.target(), w);
  };
  return detail::modulus_certificate(f, samples, q, mu, image_cost, [](double a, double b) { return modulus_ratio(a, b); },
                                     bound, "K_O");
}

inline ModulusCertificate ko_certificate(const VertexMap& f, const std::vector<ConnectSpec>& samples, double q,
                                         double bound = kInf) {
  return ko_certificate(f, samples, q, masses_of(f.source()), masses_of(f.target()), bound);
}

// K_I (Poletsky): Mod_Q(f(Gamma)) <= K Mod_Q(Gamma).
inline ModulusCertificate ki_certificate(const VertexMap& f, const std::vector<ConnectSpec>& samples, double q,
                                         const std::vector<double>& mu, const std::vector<double>& nu,
                                         double bound = kInf) {
  const auto cost = vertex_costs(f.target(), nu);
  return detail::modulus_certificate(
      f, samples, q, mu, [&](const ConnectSpec&) { return cost; }, [](double a, double b) { return modulus_ratio(b, a); },
      bound, "K_I");
}

inline ModulusCertificate ki_certificate(const VertexMap& f, const std::vector<ConnectSpec>& samples, double q,
                                         double bound = kInf) {
  return ki_certificate(f, samples, q, masses_of(f.source()), masses_of(f.target()), bound);
}

// ---------------------------------------------------------------------------
// Vaisala inequality: Mod_Q(Gamma') <= (K/m) Mod_Q(Gamma) when every curve of Gamma'
// has m essentially disjoint lifts in Gamma.

struct VaisalaResult {
  Certificate certificate;
  double mod_source = 0.0;  // Mod_Q(Gamma)
  double mod_image = 0.0;   // Mod_Q(Gamma')
};

namespace detail {

// Offset of `part` as a contiguous run in `whole`, oriented as given.
inline std::optional<std::size_t> find_run(const std::vector<std::size_t>& whole, const std::vector<std::size_t>& part) {
  if (part.empty() || part.size() > whole.size()) return std::nullopt;
  for (std::size_t o = 0; o + part.size() <= whole.size(); ++o)
    if (std::equal(part.begin(), part.end(), whole.begin() + static_cast<long>(o))) return o;
  return std::nullopt;
}

}  // namespace detail

inline VaisalaResult vaisala_certificate(const VertexMap& f, const std::vector<Curve>& gamma,
                                         const std::vector<Curve>& gamma_image,
                                         const std::vector<std::vector<std::size_t>>& lifts, std::size_t m, double q,
                                         double bound) {
  VaisalaResult res;
  auto& c = res.certificate;
  c.name = "vaisala";
  if (lifts.size() != gamma_image.size()) throw ValidationError("one lift list per image curve is required");
  if (m < 1) throw ValidationError("m must be positive");

  for (std::size_t i = 0; i < gamma_image.size() && c.pass; ++i) {
    const auto& target_curve = gamma_image[i].vertices;
    if (lifts[i].size() < m) {
      c.fail({i}, "image curve with fewer than m lifts");
      break;
    }
    // parameter edge index -> source edges used there, one entry per lift
    std::vector<std::vector<std::size_t>> used(target_curve.size());
    for (auto li : lifts[i]) {
      if (li >= gamma.size()) throw ValidationError("lift index out of range");
      const auto& src = gamma[li].vertices;
      std::vector<std::size_t> img;
      for (auto v : src) img.push_back(f(v));
      auto off = detail::find_run(target_curve, img);
      if (!off) {
        c.fail({i, li}, "lift whose image is not a subcurve");
        break;
      }
      for (std::size_t k = 0; k + 1 < src.size(); ++k) {
        const auto e = *f.source().edge_between(src[k], src[k + 1]);
        auto& slot = used[*off + k];
        if (std::find(slot.begin(), slot.end(), e) != slot.end()) {
          c.fail({i, li}, "lifts sharing an edge at the same parameter");
          break;
        }
        slot.push_back(e);
      }
      if (!c.pass) break;
    }
  }
  if (!c.pass) {
    c.flags.push_back("precondition");
    return res;
  }
  ModulusOptions opt;
  opt.p = q;
  res.mod_source = modulus(explicit_family(f.source(), gamma), mass_costs(f.source()), opt).value;
  res.mod_image = modulus(explicit_family(f.target(), gamma_image), mass_costs(f.target()), opt).value;
  c.estimate = static_cast<double>(m) * modulus_ratio(res.mod_image, res.mod_source);
  c.values["mod_source"] = res.mod_source;
  c.values["mod_image"] = res.mod_image;
  c.values["m"] = static_cast<double>(m);
  if (c.estimate > bound + 1e-9) c.fail({}, "family");
  return res;
}

// Lifts of each image curve from every point over its start, following edges; a lift
// stops where no neighbor maps to the next vertex. At a fork the smallest index wins
// and `ambiguous` is set.
struct LiftedFamily {
  std::vector<Curve> gamma;
  std::vector<std::vector<std::size_t>> lifts;  // per image curve, indices into gamma
  bool ambiguous = false;
};

inline LiftedFamily lift_curves(const VertexMap& f, const std::vector<Curve>& image_curves) {
  LiftedFamily out;
  for (const auto& c : image_curves) {
    std::vector<std::size_t> mine;
    if (c.vertices.empty()) {
      out.lifts.push_back(mine);
      continue;
    }
    for (auto x0 : f.fiber(c.vertices.front())) {
      Curve lift{{x0}};
      for (std::size_t i = 1; i < c.vertices.size(); ++i) {
        std::vector<std::size_t> next;
        for (const auto& inc : f.source().neighbors(lift.vertices.back()))
          if (f(inc.to) == c.vertices[i]) next.push_back(inc.to);
        if (next.empty()) break;
        if (next.size() > 1) out.ambiguous = true;
        lift.vertices.push_back(*std::min_element(next.begin(), next.end()));
      }
      if (lift.vertices.size() < 2) continue;
      mine.push_back(out.gamma.size());
      out.gamma.push_back(std::move(lift));
    }
    out.lifts.push_back(std::move(mine));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analytic definition: |grad f|^Q <= K J_f at mu-positive vertices.

struct AnalyticField {
  Certificate certificate;
  std::vector<double> gradient;  // max edge stretch at x
  std::vector<double> ratio;     // |grad f|(x)^Q / J_f(x); 0 where mu(x) = 0
};

inline AnalyticField analytic_qr_constant(const VertexMap& f, const std::vector<double>& mu,
                                          const std::vector<double>& nu, double q, double bound = kInf) {
  AnalyticField out;
  const Space& X = f.source();
  const auto jac = jacobians(f, mu, nu);
  const auto branch = branch_set(f);
  auto& c = out.certificate;
  c.name = "analytic_qr";
  double all = 0.0, off = 0.0, on = 0.0;
  std::size_t arg = X.size();
  for (std::size_t x = 0; x < X.size(); ++x) {
    double g = 0.0;
    for (const auto& inc : X.neighbors(x)) g = std::max(g, f.image_dist(x, inc.to) / X.edges()[inc.edge].len);
    out.gradient.push_back(g);
    double k = 0.0;
    if (mu[x] > 0.0) {
      const double j = jac.forward[x].value_or(0.0);
      const double top = std::pow(g, q);
      k = top <= 0.0 ? 0.0 : (j <= 0.0 ? kInf : top / j);
      if (k > all || arg == X.size()) {
        all = std::max(all, k);
        arg = x;
      }
      if (std::binary_search(branch.begin(), branch.end(), x))
        on = std::max(on, k);
      else
        off = std::max(off, k);
    }
    out.ratio.push_back(k);
  }
  c.estimate = all;
  c.values["off_branch"] = off;
  c.values["branch"] = on;
  if (arg < X.size()) {
    c.witness = {arg};
    c.witness_kind = "vertex";
  }
  if (all > bound + 1e-9) c.fail(c.witness, "vertex");
  return out;
}

inline AnalyticField analytic_qr_constant(const VertexMap& f, double q, double bound = kInf) {
  return analytic_qr_constant(f, masses_of(f.source()), masses_of(f.target()), q, bound);
}

}  // namespace qrgeom
