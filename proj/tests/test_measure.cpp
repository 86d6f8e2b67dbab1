#include <gtest/gtest.h>

#include <random>

#include "corpus.hpp"
#include "oracles.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 3.0), coin(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = coin(rng) < zero_prob ? 0.0 : u(rng);
  return v;
}

}  // namespace

TEST(Measure, PullbackMassIsMultiplicityIntegral) {
  for (const auto& m : corpus_maps()) {
    const auto pb = pullback_measure(m.f);
    // psi*nu(X) = sum_y N(y) nu(y)
    double expect = 0.0;
    for (std::size_t y = 0; y < m.f.target().size(); ++y) expect += count_preimages(m.f, y) * m.f.target().mass(y);
    EXPECT_NEAR(measure_of(pb, all_vertices(m.f.source())), expect, 1e-12 * std::max(1.0, expect)) << m.name;
  }
}

TEST(Measure, ChangeOfVariablesOnRandomData) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = gen_random_map(12, 5, seed);
    const auto rho = random_vec(12, rng), nu = random_vec(5, rng, 0.2);
    const auto c = change_of_variables_check(f, rho, nu);
    EXPECT_TRUE(c.pass);
    // independent evaluation of the right side
    double rhs = 0.0;
    for (std::size_t x = 0; x < 12; ++x) rhs += rho[x] * nu[f(x)];
    EXPECT_NEAR(c.values.at("lhs"), rhs, 1e-12 * std::max(1.0, rhs));
  }
}

TEST(Measure, JacobianReciprocal) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = gen_random_map(10, 4, seed);
    const auto mu = random_vec(10, rng, 0.2), nu = random_vec(4, rng, 0.2);
    const auto j = jacobians(f, mu, nu);
    for (std::size_t x = 0; x < 10; ++x) {
      const bool mp = mu[x] > 0, np = nu[f(x)] > 0;
      if (mp && np) {
        EXPECT_NEAR(*j.forward[x] * *j.inverse[x], 1.0, 1e-12);
      } else if (!mp && !np) {
        EXPECT_FALSE(j.forward[x].has_value());
        EXPECT_FALSE(j.inverse[x].has_value());
      } else if (!mp) {
        EXPECT_EQ(*j.forward[x], kInf);
        EXPECT_EQ(*j.inverse[x], 0.0);
      } else {
        EXPECT_EQ(*j.forward[x], 0.0);
        EXPECT_EQ(*j.inverse[x], kInf);
      }
    }
  }
}

TEST(Measure, JacobianOfCycleCoverIsOne) {
  const auto f = gen_cycle_cover(7, 2);
  const auto j = jacobians(f);
  for (const auto& v : j.forward) EXPECT_DOUBLE_EQ(*v, 1.0);
}

TEST(Measure, ConditionN) {
  const auto f = gen_cycle_cover(4, 2);
  std::vector<double> mu(8, 1.0), nu(4, 1.0);
  EXPECT_TRUE(condition_N_check(f, mu, nu).pass);
  EXPECT_TRUE(condition_N_inverse_check(f, mu, nu).pass);
  mu[5] = 0.0;
  const auto c = condition_N_check(f, mu, nu);
  EXPECT_FALSE(c.pass);
  EXPECT_EQ(c.witness, (std::vector<std::size_t>{5}));
  EXPECT_TRUE(condition_N_inverse_check(f, mu, nu).pass);
  mu[5] = 1.0;
  nu[2] = 0.0;
  const auto ci = condition_N_inverse_check(f, mu, nu);
  EXPECT_FALSE(ci.pass);
  EXPECT_EQ(ci.witness, (std::vector<std::size_t>{2}));
}

TEST(Measure, AreaInequalityEqualUnderConditionN) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto f = gen_random_map(9, 4, seed);
    const auto rho = random_vec(9, rng), mu = random_vec(9, rng, 0.3), nu = random_vec(4, rng, 0.1);
    const auto c = area_inequality_check(f, rho, mu, nu);
    EXPECT_TRUE(c.pass) << seed;
    EXPECT_LE(c.values.at("lhs"), c.values.at("rhs") + 1e-12);
    if (condition_N_check(f, mu, nu).pass) {
      EXPECT_EQ(c.values.at("equality"), 1.0);
    }
  }
}

TEST(Measure, BadMeasuresRejected) {
  const auto f = gen_cycle_cover(4, 2);
  EXPECT_THROW(pullback_measure(f, {1, 1, 1}), ValidationError);
  EXPECT_THROW(pullback_measure(f, {1, -1, 1, 1}), ValidationError);
  EXPECT_THROW(change_of_variables_check(f, std::vector<double>(8, kInf), {1, 1, 1, 1}), ValidationError);
}

TEST(Measure, EssentialIndexChainOnCorpus) {
  for (const auto& m : corpus_maps()) {
    const auto nu = masses_of(m.f.target());
    for (std::size_t x = 0; x < m.f.source().size(); ++x) {
      const auto p = essential_index_profile(m.f, x, nu);
      if (!p.value) continue;
      EXPECT_GE(*p.value, 1.0 - 1e-12) << m.name << " x=" << x;
      EXPECT_LE(*p.value, static_cast<double>(local_index(m.f, x)) + 1e-12) << m.name << " x=" << x;
    }
  }
}

// The center cell has one preimage, so the ratio at the branch vertex is
// (nu_0 + 2 nu(B \ {0})) / nu(B): below 2, and tending to 2 as B fills with rings.
TEST(Measure, EssentialIndexAtWindingCenter) {
  double prev = 0.0;
  for (std::size_t levels : {2u, 4u, 8u, 16u}) {
    const auto f = gen_winding(2, levels, 8);
    const auto nu = masses_of(f.target());
    const double r = 0.5;
    double ball_mass = 0.0;
    for (std::size_t y = 0; y < f.target().size(); ++y)
      if (f.target().dist(0, y) < r) ball_mass += nu[y];
    const double expect = (2.0 * ball_mass - nu[0]) / ball_mass;
    const auto v = essential_index(f, 0, nu, r);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, expect, 1e-12) << levels;
    EXPECT_LT(*v, 2.0);
    EXPECT_GT(*v, prev);
    prev = *v;
  }
  EXPECT_GT(prev, 1.9);
  // off the branch vertex the small-scale ratio is 1
  const auto f = gen_winding(2, 2, 8);
  const auto q = essential_index_profile(f, 5, masses_of(f.target()));
  ASSERT_TRUE(q.value.has_value());
  EXPECT_NEAR(*q.value, 1.0, 1e-12);
}

// Radii where U(x,f,r) already has more than i(x,f) preimages over some point are
// not admissible; a collapsing random map has such radii below its normal radius.
TEST(Measure, EssentialIndexSkipsOverfullNeighborhoods) {
  const auto f = gen_random_map(9, 5, 4);
  const auto p = essential_index_profile(f, 0, masses_of(f.target()));
  EXPECT_GT(p.radii_skipped, 0u);
  ASSERT_TRUE(p.value.has_value());
  EXPECT_LE(*p.value, static_cast<double>(local_index(f, 0)) + 1e-12);
}

TEST(Measure, EssentialIndexChainOnRandomMaps) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto f = gen_random_map(9, 5, seed);
    const auto nu = masses_of(f.target());
    for (std::size_t x = 0; x < 9; ++x) {
      const auto p = essential_index_profile(f, x, nu);
      if (!p.value) continue;
      EXPECT_GE(*p.value, 1.0 - 1e-12);
      EXPECT_LE(*p.value, static_cast<double>(local_index(f, x)) + 1e-12) << seed << " " << x;
    }
  }
}

TEST(Measure, EssentialIndexUndefinedOnNullBall) {
  const auto p3 = gen_path(3);
  SpaceData d = p3->data();
  d.masses = {0.0, 0.0, 1.0};
  const auto s = make_space(d);
  const auto f = identity_map(s);
  EXPECT_FALSE(essential_index(f, 0, masses_of(*s), 0.5).has_value());
  EXPECT_NEAR(*essential_index(f, 0, masses_of(*s), 2.5), 1.0, 1e-12);
}
