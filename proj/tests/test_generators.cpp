#include <gtest/gtest.h>

#include <numbers>

#include "corpus.hpp"
#include "oracles.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;

TEST(Generators, PolarGridMassIsArea) {
  const auto annulus = gen_polar_grid(16, 32, 1.0, 2.0);
  EXPECT_NEAR(annulus->total_mass(), std::numbers::pi * 3.0, 0.05 * std::numbers::pi * 3.0);
  const auto disk = gen_polar_grid(8, 16, 0.0, 1.0);
  EXPECT_NEAR(disk->total_mass(), std::numbers::pi, 0.05 * std::numbers::pi);
}

TEST(Generators, WindingShape) {
  const auto f = gen_winding(2, 3, 5);
  EXPECT_EQ(f.source().size(), 1u + 3 * 10);
  EXPECT_EQ(f.target().size(), 1u + 3 * 5);
  EXPECT_EQ(f(0), 0u);
  EXPECT_EQ(f(1 + 7), 1u + 2);
}

TEST(Generators, ConeWindingIsLocalIsometryOffCenter) {
  const auto f = gen_winding(2, 3, 6);
  const auto& X = f.source();
  for (const auto& e : X.edges()) {
    if (e.u == 0 || e.v == 0) continue;
    EXPECT_NEAR(f.image_dist(e.u, e.v), e.len, 1e-12);
  }
  // masses agree vertex by vertex with the image cell
  for (std::size_t x = 0; x < X.size(); ++x) {
    if (x == 0) continue;
    EXPECT_NEAR(X.mass(x), f.target().mass(f(x)), 1e-12);
  }
}

TEST(Generators, FlatWindingHalvesAngles) {
  const auto f = gen_winding(2, 2, 6, 1.0, false);
  EXPECT_NEAR(f.source().total_mass(), f.target().total_mass(), 1e-9);
}

TEST(Generators, CycleCoverDegree) {
  const auto f = gen_cycle_cover(5, 3);
  EXPECT_EQ(max_multiplicity(f), 3u);
  for (std::size_t y = 0; y < 5; ++y) EXPECT_EQ(f.fiber(y).size(), 3u);
  EXPECT_TRUE(branch_set(f).empty());
}

TEST(Generators, CycleCoverDegreeOneIsIdentity) {
  const auto f = gen_cycle_cover(5, 1);
  for (std::size_t x = 0; x < 5; ++x) EXPECT_EQ(f(x), x);
}

TEST(Generators, StretchScalesHorizontalEdges) {
  const auto f = gen_stretch(3, 2, 2.5);
  const auto lf = lipschitz_field(f);
  EXPECT_NEAR(lf.bound, 2.5, 1e-12);
}

TEST(Generators, RandomMapsValidateAndAreSeeded) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = gen_random_map(9, 4, seed), b = gen_random_map(9, 4, seed);
    EXPECT_EQ(a.assignment(), b.assignment());
    EXPECT_EQ(a.source().dist(), b.source().dist());
    EXPECT_TRUE(map_findings(a.source(), a.target(), a.assignment()).empty());
  }
  EXPECT_THROW(gen_random_map(3, 4, 0), ValidationError);
}

TEST(Generators, PullbackSpaceOfIdentityIsIsometricCopy) {
  const auto s = gen_grid(3, 3);
  const auto p = gen_pullback_space(identity_map(s));
  for (std::size_t a = 0; a < s->size(); ++a)
    for (std::size_t b = 0; b < s->size(); ++b) EXPECT_NEAR(p->dist(a, b), s->dist(a, b), 1e-12);
}

TEST(Generators, PullbackSpaceOfCycleCoverIsLocallyIsometric) {
  const auto f = gen_cycle_cover(5, 2);
  const auto p = gen_pullback_space(f);
  for (const auto& e : p->edges()) EXPECT_NEAR(p->dist(e.u, e.v), f.image_dist(e.u, e.v), 1e-12);
  // the projection from the pullback space is a local isometry: dilatation 1 below the normal radius
  const auto pi = factorize(f, MetricChoice::exact).projection;
  const auto sum = dilatation_summary(pi, 0.0, false);
  for (const auto& row : sum.rows)
    for (const auto& s : row.shells) {
      EXPECT_NEAR(s.ratio, 1.0, 1e-12);
    }
}

TEST(Generators, BadArguments) {
  EXPECT_THROW(gen_cycle(2), ValidationError);
  EXPECT_THROW(gen_polar_grid(2, 4, 2.0, 1.0), ValidationError);
  EXPECT_THROW(gen_stretch(2, 2, 0.0), ValidationError);
  EXPECT_THROW(gen_winding(0, 2, 4), ValidationError);
}
