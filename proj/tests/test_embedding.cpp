#include <gtest/gtest.h>

#include "corpus.hpp"
#include "qrgeom/embedding.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;

namespace {

// every component of the preimage of a closed ball maps onto the ball
bool components_surject(const VertexMap& f) {
  const Space& Y = f.target();
  for (std::size_t y = 0; y < Y.size(); ++y)
    for (double d : distinct_values(Y.dist().row(y))) {
      const auto b = ball_closed(Y, y, d);
      for (const auto& c : components(f.source(), preimage(f, b)))
        if (image(f, c) != b) return false;
    }
  return true;
}

void expect_plan_ok(const VertexMap& f, const EmbeddingPlan& plan, const std::string& name) {
  const auto c = check_plan(f, plan);
  // R^k is 1/5-Lipschitz only when components surject
  if (components_surject(f)) {
    EXPECT_LE(c.rk_lipschitz_excess, 1e-9) << name;
  }
  EXPECT_TRUE(c.rk_zero_iff) << name;
  EXPECT_TRUE(c.net_separated) << name;
  EXPECT_TRUE(c.net_covers) << name;
  EXPECT_TRUE(c.classes_disjoint) << name;
  EXPECT_TRUE(c.labels_consistent) << name;
  EXPECT_LE(c.comparability_7, 1.5 + 1e-9) << name;
  EXPECT_LE(c.comparability_8, 7.0 / 3.0 + 1e-9) << name;
}

// every pair of distinct source points separated by f or by some coordinate
bool separates(const VertexMap& f, const std::vector<std::vector<double>>& coords) {
  for (std::size_t a = 0; a < coords.size(); ++a)
    for (std::size_t b = a + 1; b < coords.size(); ++b) {
      if (f(a) != f(b)) continue;
      bool apart = false;
      for (std::size_t i = 0; i < coords[a].size(); ++i) apart = apart || coords[a][i] != coords[b][i];
      if (!apart) return false;
    }
  return true;
}

}  // namespace

TEST(Embedding, ComponentRadiiOnCycleCover) {
  // the preimage of an arc of C_n is two arcs until the arc is the whole cycle
  for (std::size_t n : {5u, 6u, 9u}) {
    const auto f = gen_cycle_cover(n, 2);
    const auto R = rk_radii(f, 1);
    for (double r : R) EXPECT_DOUBLE_EQ(r, static_cast<double>(n / 2) / 5.0) << n;
  }
}

TEST(Embedding, InjectiveMapNeedsNoCoordinates) {
  const auto f = identity_map(gen_grid(3, 3));
  const auto res = embed(f, {false});
  EXPECT_EQ(res.plan.N, 1u);
  EXPECT_EQ(res.plan.dimension(), 0u);
  EXPECT_TRUE(res.distortion.injective);
  EXPECT_DOUBLE_EQ(res.distortion.lower, 1.0);
  EXPECT_DOUBLE_EQ(res.distortion.upper, 1.0);
}

TEST(Embedding, PlanInvariantsOnCorpus) {
  std::size_t embedded = 0;
  for (const auto& m : corpus_maps()) {
    EmbedOptions opt;
    opt.exact_cap = kCorpusExactCap;
    if (!discreteness_failures(pullback_metric_exact(m.f, kCorpusExactCap)).empty()) {
      EXPECT_THROW(embed(m.f, opt), ValidationError) << m.name;
      continue;
    }
    ++embedded;
    const auto res = embed(m.f, opt);
    expect_plan_ok(res.factorization->projection, res.plan, m.name);
    EXPECT_TRUE(res.distortion.injective) << m.name;
    EXPECT_TRUE(separates(res.factorization->projection, res.coords)) << m.name;
    EXPECT_LE(res.coordinate_lipschitz, 1.0 + 1e-9) << m.name;
    EXPECT_TRUE(res.composition.pass) << m.name;
    EXPECT_TRUE(res.fiber_scale.pass) << m.name;
    if (m.name == "random_1") {
      EXPECT_FALSE(components_surject(res.factorization->projection));
      EXPECT_GT(res.checks.rk_lipschitz_excess, 0.0);
    }
  }
  EXPECT_GE(embedded, 12u);
}

TEST(Embedding, CycleCoverEmbeds) {
  const auto f = gen_cycle_cover(16, 2);
  EmbedOptions opt;
  opt.exact_cap = 64;
  const auto res = embed(f, opt);
  EXPECT_EQ(res.plan.N, 2u);
  expect_plan_ok(res.factorization->projection, res.plan, "cycle_cover_16_2");
  EXPECT_TRUE(res.distortion.injective);
  EXPECT_TRUE(separates(f, res.coords));
  EXPECT_LE(res.coordinate_lipschitz, 1.0 + 1e-9);
  EXPECT_LE(res.distortion.fiber_worst_12, 1.0 + 1e-9);
  EXPECT_TRUE(res.fiber_scale.pass);
  EXPECT_TRUE(res.composition.pass);
  EXPECT_GT(res.distortion.lower, 0.0);
}

TEST(Embedding, CoordinatesVanishOutsideTheSets) {
  const auto f = gen_cycle_cover(6, 2);
  const auto plan = build_plan(f);
  for (std::size_t x = 0; x < f.source().size(); ++x) {
    const auto c = phi(f, plan, x);
    for (const auto& blk : plan.blocks) {
      bool inside = false;
      for (const auto& s : blk.sets) inside = inside || std::binary_search(s.set.begin(), s.set.end(), x);
      if (!inside) {
        EXPECT_EQ(c[(blk.k - 1) * plan.c_d + (blk.j - 1)], 0.0);
      }
    }
  }
}

TEST(Embedding, NetIsMaximal) {
  const auto f = gen_winding(2, 2, 4);
  const auto R = rk_radii(f, 1);
  const auto net = build_net(f.target(), R);
  for (std::size_t y = 0; y < f.target().size(); ++y) {
    if (R[y] <= 0.0 || std::find(net.begin(), net.end(), y) != net.end()) continue;
    bool blocked = false;
    for (auto t : net) blocked = blocked || f.target().dist(y, t) < 0.5 * std::max(R[y], R[t]) - 1e-12;
    EXPECT_TRUE(blocked) << y;
  }
}

TEST(Embedding, ColoringIsProper) {
  const auto f = gen_cycle_cover(16, 2);
  const auto R = rk_radii(f, 1);
  const auto net = build_net(f.target(), R);
  const auto col = color_net(f.target(), net, R);
  EXPECT_LE(col.colors_used, col.c_d);
  for (const auto& cls : col.classes)
    for (std::size_t a = 0; a < cls.size(); ++a)
      for (std::size_t b = a + 1; b < cls.size(); ++b)
        EXPECT_FALSE(balls_meet(f.target(), cls[a], 2 * R[cls[a]], cls[b], 2 * R[cls[b]]));
}

TEST(Embedding, UnnormalizedNeedsBdd) {
  const auto f = gen_stretch(3, 2, 3.0);
  EXPECT_THROW(embed(f, {false}), ValidationError);
}
