#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "skagree/region_fb.hpp"

using namespace skagree;

namespace {

JointPMF random_fb_joint(std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, 111);
  const ChannelCards c{1 + seed % 2, 2, 2, 2, 2};
  const auto ch = oracle::random_channel(rng, c);
  return build_joint_fb(ch, oracle::random_fb(rng, c, 2, 2));
}

}  // namespace

TEST_CASE("eval_inner_fb examples") {
  const auto ch = fixtures::single_receiver();
  const auto p = eval_inner_fb(build_joint_fb(ch, fixtures::v1_is_y1(ch.cards())));
  CHECK(p.r1_max == doctest::Approx(1.0));
  CHECK(p.r2_max == 0.0);
  CHECK(p.sum_max == doctest::Approx(1.0));
  CHECK(p.contains(0.5, 0.0, 1e-9));
  CHECK_FALSE(p.contains(1.1, 0.0, 1e-9));

  Rng rng = make_stream(1, 0);
  const ChannelCards c{2, 2, 2, 2, 2};
  const auto r = oracle::random_channel(rng, c);
  const auto ind = make_feedback_scheme(c, 2, 2, oracle::rows(rng, 2, 2), {0.3, 0.7, 0.3, 0.7}, {0.6, 0.4, 0.6, 0.4});
  const auto q = eval_inner_fb(build_joint_fb(r, ind));
  CHECK(q.r1_max < 1e-12);
  CHECK(q.r2_max < 1e-12);
  CHECK(q.sum_max < 1e-12);
  CHECK_THROWS_AS(eval_inner_fb(build_joint_input(r, ConditionalPMF({{"X", 2}}, {{"S", 2}}, {0.5, 0.5, 0.5, 0.5}))),
                  std::invalid_argument);
}

TEST_CASE("eval_inner_fb matches the oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, 0, 121);
    const ChannelCards c{1 + seed % 2, 2, 2, 2, 2};
    const auto ch = oracle::random_channel(rng, c);
    const auto sc = oracle::random_fb(rng, c, 2, 3);
    const auto p = eval_inner_fb(build_joint_fb(ch, sc));
    const auto o = oracle::inner_fb(oracle::joint_fb(ch, sc));
    CHECK(std::abs(p.r1_max - o.r1) < 1e-9);
    CHECK(std::abs(p.r2_max - o.r2) < 1e-9);
    CHECK(std::abs(p.sum_max - o.sum) < 1e-9);
  }
}

TEST_CASE("one-receiver reduction") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, 0, 131);
    const ChannelCards c{1, 2, 2, 2, 2};
    const auto ch = reduce_to_wiretap(oracle::random_channel(rng, c), WiretapMode::fb_keep_rx1);
    const auto px = oracle::simplex(rng, 2);
    const auto vy = oracle::rows(rng, 2, 3);
    const auto sc = make_feedback_scheme(ch.cards(), 3, 1, px, vy, {1.0});
    const auto p = eval_inner_fb(build_joint_fb(ch, sc));
    std::vector<double> yz;  // [x][y1][z]
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t z = 0; z < 2; ++z) yz.push_back(ch.prob(x, 0, y, 0, z));
    CHECK(std::abs(p.r1_max - oracle::one_receiver_rate(px, yz, vy, 2, 2, 3)) < 1e-12);
    CHECK(p.r2_max == 0.0);
  }
}

TEST_CASE("build_fb_constraints") {
  const auto j = random_fb_joint(3);
  const auto s = build_fb_constraints(j);
  REQUIRE(s.rows.size() == 12);
  CHECK(s.variables == std::vector<std::string>{"R1", "R2", "Rp1", "Rp2"});
  CHECK(std::abs(-to_double(s.rows[0].bound) - entropy(j, {var::V1}, {var::X, var::S})) < 1e-9);
  CHECK(std::abs(-to_double(s.rows[2].bound) - entropy(j, {var::V1, var::V2}, {var::X, var::S})) < 1e-9);
  CHECK(std::abs(to_double(s.rows[3].bound) - entropy(j, {var::V1}, {var::Z})) < 1e-9);
  CHECK(std::abs(to_double(s.rows[5].bound) - entropy(j, {var::V1, var::V2}, {var::Z})) < 1e-9);
  CHECK(std::abs(to_double(s.rows[6].bound) - entropy(j, {var::V1}, {var::V2, var::Y2})) < 1e-9);
  CHECK(std::abs(to_double(s.rows[7].bound) - entropy(j, {var::V2}, {var::V1, var::Y1})) < 1e-9);
  CHECK(s.rows[7].coeffs[1] == 1);
  const auto lit = build_fb_constraints(j, CrossSecrecyReading::literal);
  CHECK(lit.rows[7].coeffs[0] == 1);
  CHECK(lit.rows[7].coeffs[1] == 0);

  // Constant V1, V2: only the origin survives.
  Rng rng = make_stream(2, 0);
  const ChannelCards c{1, 2, 2, 2, 2};
  const auto ch = oracle::random_channel(rng, c);
  const auto cst = make_feedback_scheme(c, 1, 1, {0.5, 0.5}, {1, 1}, {1, 1});
  const auto pz = fm_eliminate(build_fb_constraints(build_joint_fb(ch, cst)), {"Rp1", "Rp2"});
  const std::array<double, 2> origin{0, 0}, off{0.01, 0}, off2{0, 0.01};
  CHECK(pz.contains(origin, 1e-9));
  CHECK_FALSE(pz.contains(off, 1e-9));
  CHECK_FALSE(pz.contains(off2, 1e-9));

  // Noiseless single receiver: R1 <= 1.
  const auto sr = fixtures::single_receiver();
  const auto p1 = fm_eliminate(build_fb_constraints(build_joint_fb(sr, fixtures::v1_is_y1(sr.cards()))), {"Rp1", "Rp2"});
  const std::array<double, 2> a{1.0, 0}, b{1.01, 0};
  CHECK(p1.contains(a, 1e-9));
  CHECK_FALSE(p1.contains(b, 1e-9));
}

TEST_CASE("verify_fm_matches_closed_form examples") {
  Rng rng = make_stream(4, 0);
  const ChannelCards c{1, 2, 2, 2, 2};
  const auto ch = oracle::random_channel(rng, c);
  const auto cst = make_feedback_scheme(c, 1, 1, {0.5, 0.5}, {1, 1}, {1, 1});
  const auto r0 = verify_fm_matches_closed_form(build_joint_fb(ch, cst));
  CHECK(r0.agree());
  CHECK(r0.points_checked == 9);

  const auto sr = fixtures::single_receiver();
  const auto r1 = verify_fm_matches_closed_form(build_joint_fb(sr, fixtures::v1_is_y1(sr.cards())));
  CHECK(r1.agree());
  CHECK(r1.closed_form.r1_max == doctest::Approx(1.0));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = verify_fm_matches_closed_form(random_fb_joint(seed));
    CHECK(rep.identity_residual_1 < 1e-10);
    CHECK(rep.identity_residual_2 < 1e-10);
    CHECK(rep.points_checked > 0);
    CHECK(rep.examples.size() == std::min<std::size_t>(rep.disagreements, 8));
  }
  CHECK_THROWS_AS(verify_fm_matches_closed_form(random_fb_joint(1), 0.0), std::invalid_argument);
}

TEST_CASE("verification is worker-count independent") {
  const auto j = random_fb_joint(7);
  const auto a = verify_fm_matches_closed_form(j, 0.01, 1e-6, CrossSecrecyReading::symmetric, 1);
  const auto b = verify_fm_matches_closed_form(j, 0.01, 1e-6, CrossSecrecyReading::symmetric, 4);
  CHECK(a.disagreements == b.disagreements);
  CHECK(to_text(a.projected) == to_text(b.projected));
}
