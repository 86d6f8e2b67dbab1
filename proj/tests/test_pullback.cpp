#include <gtest/gtest.h>

#include "corpus.hpp"
#include "oracles.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;

namespace {

void expect_matches_oracle(const VertexMap& f, const DistanceMatrix& exact, const std::string& name) {
  const auto oracle = pullback_bruteforce(f);
  for (std::size_t a = 0; a < f.source().size(); ++a)
    for (std::size_t b = 0; b < f.source().size(); ++b) ASSERT_NEAR(exact(a, b), oracle[a][b], 1e-9) << name;
}

}  // namespace

TEST(Pullback, BracketSandwichesOracleOnRandomMaps) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto f = gen_random_map(4 + seed % 8, 2 + seed % 3, seed);
    const auto oracle = pullback_bruteforce(f);
    const auto br = pullback_metric_bracket(f);
    for (std::size_t a = 0; a < f.source().size(); ++a)
      for (std::size_t b = 0; b < f.source().size(); ++b) {
        EXPECT_LE(br.lower(a, b), oracle[a][b] + 1e-9);
        EXPECT_LE(oracle[a][b], 2.0 * br.lower(a, b) + 1e-9);
        EXPECT_NEAR(br.upper(a, b), 2.0 * br.lower(a, b), 1e-12);
      }
    EXPECT_FALSE(br.exact);
  }
}

TEST(Pullback, ExactEqualsOracle) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto f = gen_random_map(10, 4, seed);
    expect_matches_oracle(f, pullback_metric_exact(f), "seed " + std::to_string(seed));
  }
  for (const auto& m : corpus_maps()) expect_matches_oracle(m.f, pullback_metric_exact(m.f, kCorpusExactCap), m.name);
}

TEST(Pullback, ExactIsMetricWhenDiscrete) {
  std::size_t discrete = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto f = gen_random_map(9, 6, seed, 0.1);
    const auto br = pullback_metric_bracket(f);
    if (!discreteness_failures(br.lower).empty()) continue;
    ++discrete;
    EXPECT_TRUE(metric_findings(pullback_metric_exact(f)).empty()) << seed;
  }
  EXPECT_GT(discrete, 5u);
}

TEST(Pullback, IdentityOnPathMetricIsExact) {
  for (const auto& ns : corpus_spaces()) {
    const auto f = identity_map(ns.space);
    const auto br = pullback_metric_bracket(f);
    // geodesics are continua of diameter d, so d-hat already equals d on a length space
    for (std::size_t a = 0; a < f.source().size(); ++a)
      for (std::size_t b = 0; b < f.source().size(); ++b) {
        EXPECT_LE(br.lower(a, b), ns.space->dist(a, b) + 1e-12);
        if (ns.space->size() <= kCorpusExactCap) {
          EXPECT_NEAR(pullback_metric_exact(f, kCorpusExactCap)(a, b), ns.space->dist(a, b), 1e-12);
        }
      }
  }
}

TEST(Pullback, OppositeSheetsSeparated) {
  const auto f = gen_winding(2, 1, 8);
  const auto br = pullback_metric_bracket(f);
  // ring vertices j and j+8 share an image
  EXPECT_EQ(f(1), f(9));
  EXPECT_GT(br.lower(1, 9), 0.0);
  const auto ex = pullback_metric_exact(f, kCorpusExactCap);
  EXPECT_GE(ex(1, 9), br.lower(1, 9) - 1e-12);
  EXPECT_LE(ex(1, 9), 2.0 * br.lower(1, 9) + 1e-12);
}

TEST(Pullback, CapExceededNamesTheBracket) {
  const auto f = gen_winding(2, 2, 8);
  try {
    pullback_metric_exact(f, 14);
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("bracket"), std::string::npos);
    EXPECT_NE(w.find("exact-cap"), std::string::npos);
  }
}

TEST(Pullback, CollapsedEdgeIsNotDiscrete) {
  // path of three onto path of two with the first edge collapsed
  const auto p3 = gen_path(3), p2 = gen_path(2);
  const VertexMap f(p3, p2, {0, 0, 1});
  const auto br = pullback_metric_bracket(f);
  const auto z = discreteness_failures(br.lower);
  ASSERT_EQ(z.size(), 1u);
  EXPECT_EQ(z[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  try {
    factorize(f, MetricChoice::lower);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("not discrete"), std::string::npos);
  }
}

TEST(Pullback, AdjacentPairsPullBackToImageDistance) {
  for (const auto& m : corpus_maps()) {
    const auto ex = pullback_metric_exact(m.f, kCorpusExactCap);
    for (const auto& e : m.f.source().edges()) EXPECT_NEAR(ex(e.u, e.v), m.f.image_dist(e.u, e.v), 1e-12) << m.name;
  }
}

TEST(Pullback, FactorizationCommutes) {
  for (const auto& m : corpus_maps()) {
    if (!discreteness_failures(pullback_metric_bracket(m.f).lower).empty()) continue;
    const auto fac = factorize(m.f, MetricChoice::exact, kCorpusExactCap);
    for (std::size_t x = 0; x < m.f.source().size(); ++x) EXPECT_EQ(fac.projection(fac.lift(x)), m.f(x));
    const auto paths = enumerate_simple_paths(m.f.source(), 4);
    const auto c = verify_projection(fac, paths.curves);
    EXPECT_TRUE(c.pass) << m.name << " " << c.witness_kind;
    EXPECT_LE(c.values.at("lipschitz"), 1.0 + 1e-12);
  }
}

TEST(Pullback, LowerFactorizationIsFlaggedApproximate) {
  const auto f = gen_winding(2, 2, 8);
  const auto fac = factorize(f, MetricChoice::lower);
  EXPECT_FALSE(fac.exact);
  const auto c = verify_projection(fac, enumerate_simple_paths(f.source(), 3).curves);
  EXPECT_TRUE(c.has_flag("approximate"));
  EXPECT_TRUE(c.pass);
}

TEST(Pullback, LengthChainOnWinding) {
  const auto ch = length_chain(gen_winding(2, 1, 8), kCorpusExactCap);
  EXPECT_EQ(ch.multiplicity, 2u);
  EXPECT_TRUE(ch.certificate.pass) << ch.certificate.witness_kind;
  EXPECT_LE(ch.worst_ratio, 3.0 + 1e-12);
}

TEST(Pullback, LengthChainOnCorpus) {
  for (const auto& m : corpus_maps()) {
    if (!discreteness_failures(pullback_metric_bracket(m.f).lower).empty()) continue;
    const auto ch = length_chain(m.f, kCorpusExactCap);
    EXPECT_TRUE(ch.certificate.pass) << m.name << " " << ch.certificate.witness_kind;
  }
}

TEST(Pullback, LengthMetricOfPathMetricIsItself) {
  const auto g = gen_grid(3, 3);
  const auto lm = length_metric(g->dist(), *g);
  EXPECT_EQ(lm, g->dist());
}

TEST(Pullback, BldTransfersToLift) {
  for (const auto& m : corpus_maps()) {
    if (!discreteness_failures(pullback_metric_bracket(m.f).lower).empty()) continue;
    const auto fac = factorize(m.f, MetricChoice::exact, kCorpusExactCap);
    const auto c = bld_bdd_transfer_check(m.f, fac, enumerate_simple_paths(m.f.source(), 5).curves);
    EXPECT_TRUE(c.pass) << m.name << " " << c.witness_kind;
    EXPECT_NEAR(c.values.at("bld_f"), c.values.at("bld_g"), 1e-9) << m.name;
  }
}
