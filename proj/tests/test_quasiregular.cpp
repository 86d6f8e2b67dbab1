#include <gtest/gtest.h>

#include "corpus.hpp"
#include "qrgeom/quasiregular.hpp"

using namespace qrgeom;
using namespace qrgeom::testing;

namespace {

std::vector<ConnectSpec> end_to_end(const Space& s) {
  return {{{0}, {s.size() - 1}, all_vertices(s)}};
}

// every arc of n-1 edges around the n-cycle
std::vector<Curve> cycle_arcs(std::size_t n) {
  std::vector<Curve> out;
  for (std::size_t j = 0; j < n; ++j) {
    Curve c;
    for (std::size_t i = 0; i < n; ++i) c.vertices.push_back((j + i) % n);
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST(Quasiregular, IdentityIsOne) {
  for (const auto& s : corpus_spaces()) {
    const auto f = identity_map(s.space);
    for (double q : {2.0, 3.0}) {
      EXPECT_NEAR(ko_certificate(f, end_to_end(*s.space), q).certificate.estimate, 1.0, 1e-9) << s.name;
      EXPECT_NEAR(ki_certificate(f, end_to_end(*s.space), q).certificate.estimate, 1.0, 1e-9) << s.name;
      EXPECT_NEAR(analytic_qr_constant(f, q).certificate.estimate, 1.0, 1e-12) << s.name;
    }
  }
}

TEST(Quasiregular, StretchBounds) {
  // horizontal stretch by t on a grid: gradient t and Jacobian t give t^(Q-1) for Q = 2
  const auto f = gen_stretch(4, 3, 2.0);
  const auto an = analytic_qr_constant(f, 2.0);
  EXPECT_NEAR(an.certificate.estimate, 2.0, 1e-9);
  const auto ko = ko_certificate(f, end_to_end(f.source()), 2.0, 1.5);
  EXPECT_GE(ko.certificate.estimate, 1.0 / 2.0 - 1e-9);
  EXPECT_LE(ko.certificate.estimate, 2.0 + 1e-9);
}

TEST(Quasiregular, WindingMapIsConformalOffTheCenter) {
  double prev_ko = kInf, prev_ki = kInf;
  for (auto [L, S] : std::vector<std::pair<std::size_t, std::size_t>>{{4, 8}, {8, 16}}) {
    const auto f = gen_winding(2, L, S);
    const auto samples = winding_annuli(f, L);
    const auto ko = ko_certificate(f, samples, 2.0);
    const auto ki = ki_certificate(f, samples, 2.0);
    EXPECT_LE(ko.certificate.estimate, 1.2) << L;
    EXPECT_LE(ki.certificate.estimate, 1.2) << L;
    EXPECT_LE(ko.certificate.estimate, prev_ko + 1e-6);
    EXPECT_LE(ki.certificate.estimate, prev_ki + 1e-6);
    prev_ko = ko.certificate.estimate;
    prev_ki = ki.certificate.estimate;
    EXPECT_LE(analytic_qr_constant(f, 2.0).certificate.values.at("off_branch"), 1.2) << L;
  }
}

TEST(Quasiregular, VaisalaOnCycleCover) {
  for (std::size_t n : {5u, 8u}) {
    const auto f = gen_cycle_cover(n, 2);
    const auto image = cycle_arcs(n);
    const auto lifted = lift_curves(f, image);
    EXPECT_FALSE(lifted.ambiguous);
    for (const auto& l : lifted.lifts) EXPECT_EQ(l.size(), 2u);
    const auto v = vaisala_certificate(f, lifted.gamma, image, lifted.lifts, 2, 2.0, 1.0);
    EXPECT_TRUE(v.certificate.pass);
    EXPECT_NEAR(v.mod_image, v.mod_source / 2.0, 1e-6) << n;
  }
}

TEST(Quasiregular, VaisalaPreconditions) {
  const auto f = gen_cycle_cover(5, 2);
  const auto image = cycle_arcs(5);
  auto lifted = lift_curves(f, image);
  auto twice = lifted.lifts;
  twice[0] = {twice[0][0], twice[0][0]};
  const auto shared = vaisala_certificate(f, lifted.gamma, image, twice, 2, 2.0, 1.0);
  EXPECT_FALSE(shared.certificate.pass);
  EXPECT_TRUE(shared.certificate.has_flag("precondition"));
  EXPECT_FALSE(vaisala_certificate(f, lifted.gamma, image, lifted.lifts, 3, 2.0, 1.0).certificate.pass);
  EXPECT_THROW(vaisala_certificate(f, lifted.gamma, image, {}, 2, 2.0, 1.0), ValidationError);
}

TEST(Quasiregular, LiftsFollowTheMap) {
  const auto f = gen_winding(2, 2, 8);
  // radial curve out of the target center forks at the source center
  const Curve radial{{0, 1, 9}};
  const auto lifted = lift_curves(f, {radial});
  EXPECT_TRUE(lifted.ambiguous);
  ASSERT_EQ(lifted.lifts[0].size(), 1u);
  for (const auto& c : lifted.gamma) {
    ASSERT_EQ(c.vertices.size(), radial.vertices.size());
    for (std::size_t i = 0; i < c.vertices.size(); ++i) EXPECT_EQ(f(c.vertices[i]), radial.vertices[i]);
  }
  // a ring arc has one lift per fiber point
  const Curve arc{{1, 2, 3}};
  const auto two = lift_curves(f, {arc});
  EXPECT_FALSE(two.ambiguous);
  EXPECT_EQ(two.lifts[0].size(), 2u);
}

TEST(Quasiregular, BoundIsEnforced) {
  const auto f = gen_winding(2, 4, 8);
  const auto samples = winding_annuli(f, 4);
  EXPECT_FALSE(ko_certificate(f, samples, 2.0, 0.5).certificate.pass);
  EXPECT_TRUE(ko_certificate(f, samples, 2.0, 1.2).certificate.pass);
}
