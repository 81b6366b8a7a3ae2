#include <doctest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "skagree/sim_fb.hpp"
#include "skagree/sim_nofb.hpp"

using namespace skagree;

namespace {

// U0 = S through a BSC(0.4), U1 and U2 singletons, X = U0.
AuxScheme noisy_state_scheme() {
  const ChannelCards c{2, 2, 2, 2, 1};
  return make_aux_scheme(c, {2, 1, 1}, {0.6, 0.4, 0.4, 0.6}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 0, 0, 1, 1, 0, 0, 1});
}

BroadcastChannelSpec state_noiseless() {
  const ChannelCards c{2, 2, 2, 2, 1};
  return make_channel(c, {0.5, 0.5}, fixtures::table(c, [](auto x, auto, auto y1, auto y2, auto) {
                        return double(y1 == x && y2 == x);
                      }));
}

double covering_failure_rate(std::size_t n, double rt0, std::size_t trials, const AuxScheme& sc) {
  const auto ch = state_noiseless();
  const NofbModel model(ch, sc, {n, 0.5});
  const auto cb = gen_codebooks_nofb(model, {rt0, 0, 0, 0, 0, 0}, 5);
  std::size_t fail = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_stream(17, t);
    std::vector<Symbol> s(n);
    for (auto& x : s) x = static_cast<Symbol>(uniform_index(rng, 2));
    fail += !encode_nofb(model, cb, s, rng).covering_ok;
  }
  return double(fail) / double(trials);
}

}  // namespace

TEST_CASE("count_for_rate") {
  CHECK(count_for_rate(0.0, 8) == 1);
  CHECK(count_for_rate(1.0, 8) == 256);
  CHECK(count_for_rate(0.5, 8) == 16);
  CHECK(count_for_rate(0.3, 8) == 6);
  CHECK_THROWS_AS(count_for_rate(5.0, 8), std::length_error);
  CHECK_THROWS_AS((NofbRates{0.5, 0, 0, 0.6, 0, 0}.check()), std::invalid_argument);
}

TEST_CASE("nofb codebook") {
  const auto ch = fixtures::noiseless();
  const NofbModel model(ch, fixtures::u0_is_x(ch.cards()), {4, 0.5});
  const auto one = gen_codebooks_nofb(model, {0, 0, 0, 0, 0, 0}, 1);
  CHECK(one.words0 == 1);
  CHECK(one.u0.size() == 4);
  const auto a = gen_codebooks_nofb(model, {1, 0, 0, 0.5, 0, 0}, 9);
  const auto b = gen_codebooks_nofb(model, {1, 0, 0, 0.5, 0, 0}, 9);
  CHECK(a.u0 == b.u0);
  CHECK(a.bin0 == b.bin0);
  CHECK(a.words0 == 16);

  // Symbol frequencies of a biased U0 over 100 seeds.
  const auto biased = make_aux_scheme(ch.cards(), {2, 1, 1}, {0.3, 0.7}, {1, 1}, {1, 1}, {1, 0, 0, 1});
  const NofbModel bm(ch, biased, {4, 0.5});
  double zeros = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cb = gen_codebooks_nofb(bm, {1, 0, 0, 0, 0, 0}, seed);
    for (Symbol s : cb.u0) zeros += (s == 0);
    total += double(cb.u0.size());
  }
  CHECK(std::abs(zeros / total - 0.3) < 3 * std::sqrt(0.21 / total));

  // Bin labels are uniform.
  const auto big = gen_codebooks_nofb(model, {1, 0, 0, 0.5, 0, 0}, 3);
  NofbModel m8(ch, fixtures::u0_is_x(ch.cards()), {8, 0.5});
  const auto cb8 = gen_codebooks_nofb(m8, {1, 0, 0, 0.25, 0, 0}, 3);
  std::vector<double> h(cb8.bins0, 0.0);
  for (std::size_t i = 0; i < cb8.words0; ++i) h[extract_keys_nofb(cb8, {std::uint32_t(i), 0, 0}).k0] += 1;
  const double mean = double(cb8.words0) / double(cb8.bins0);
  for (double v : h) CHECK(std::abs(v - mean) < 3 * std::sqrt(mean * (1 - 1.0 / double(cb8.bins0))));
  CHECK(extract_keys_nofb(big, {3, 0, 0}).k0 == extract_keys_nofb(big, {3, 0, 0}).k0);
  CHECK_THROWS_AS(extract_keys_nofb(big, {99, 0, 0}), std::out_of_range);
  CHECK(extract_keys_nofb(one, {0, 0, 0}).k0 == 0);
}

TEST_CASE("encode and decode") {
  const auto ch = fixtures::noiseless();
  const NofbModel model(ch, fixtures::u0_is_x(ch.cards()), {8, 0.5});
  const auto cb = gen_codebooks_nofb(model, {0.6, 0, 0, 0.3, 0, 0}, 4);
  const std::vector<Symbol> s(8, 0);
  std::size_t covered = 0, decoded = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng = make_stream(t, 0);
    const auto e = encode_nofb(model, cb, s, rng);
    if (!e.covering_ok) continue;
    ++covered;
    // X = U0 and Y1 = X, so the sent word is always among the candidates.
    CHECK(std::vector<Symbol>(cb.word0(e.index.i).begin(), cb.word0(e.index.i).end()) == e.x);
    const auto d = decode_nofb(model, cb, e.x, 1);
    CHECK(d.candidates >= 1);
    if (d.ok) {
      CHECK(d.i == e.index.i);
      ++decoded;
    }
  }
  CHECK(covered > 0);
  CHECK(decoded > 0);
  CHECK_THROWS_AS(decode_nofb(model, cb, s, 3), std::invalid_argument);

  // Y independent of X: the receiver cannot single out a word.
  const ChannelCards c{1, 2, 2, 2, 1};
  const auto blind = make_channel(c, {1.0}, std::vector<double>(8, 0.25));
  const NofbModel bm(blind, fixtures::u0_is_x(c), {8, 0.5});
  const auto bcb = gen_codebooks_nofb(bm, {0.5, 0, 0, 0, 0, 0}, 4);
  std::size_t wrong = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng = make_stream(t, 1);
    const auto e = encode_nofb(bm, bcb, s, rng);
    std::vector<Symbol> y(8);
    for (auto& v : y) v = static_cast<Symbol>(uniform_index(rng, 2));
    const auto d = decode_nofb(bm, bcb, y, 1);
    wrong += !d.ok || d.i != e.index.i;
  }
  CHECK(wrong > 80);
}

TEST_CASE("covering") {
  // No codebook rate against U0 = S: almost always fails.
  const ChannelCards c{2, 2, 2, 2, 1};
  const auto copy = make_aux_scheme(c, {2, 1, 1}, {1, 0, 0, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 0, 0, 1, 1, 0, 0, 1});
  CHECK(covering_failure_rate(8, 0.0, 500, copy) > 0.9);
  const auto sc = noisy_state_scheme();
  // Rate I(U0;S) + 0.5: failures fall with n.
  const double ius = 1.0 - (-0.4 * std::log2(0.4) - 0.6 * std::log2(0.6));
  const double f4 = covering_failure_rate(4, ius + 0.5, 2000, sc);
  const double f8 = covering_failure_rate(8, ius + 0.5, 2000, sc);
  const double f12 = covering_failure_rate(12, ius + 0.5, 2000, sc);
  MESSAGE("covering failures " << f4 << " " << f8 << " " << f12);
  CHECK(f4 > f8);
  CHECK(f8 > f12);
}

TEST_CASE("run_nofb basics") {
  const auto ch = fixtures::noiseless();
  const auto sc = fixtures::u0_is_x(ch.cards());
  SimOptions o;
  o.trials = 200;
  o.seed = 3;
  const auto r = run_nofb(ch, sc, {0.5, 0, 0, 0.25, 0, 0}, {6, 0.5}, o);
  // Z is constant.
  CHECK(r.get("k012_z") == 0.0);
  CHECK(r.leakage_exact);
  const auto zero = run_nofb(ch, sc, {0.5, 0, 0, 0, 0, 0}, {6, 0.5}, o);
  CHECK(zero.get("any") == 0.0);
  CHECK(zero.get("k0") == 0.0);

  // Same result on any worker count.
  o.workers = 3;
  const auto r3 = run_nofb(ch, sc, {0.5, 0, 0, 0.25, 0, 0}, {6, 0.5}, o);
  CHECK(report_to_json(r) == report_to_json(r3));
  CHECK_THROWS_AS(run_nofb(ch, sc, {0.5, 0, 0, 0.25, 0, 0}, {6, 0.5}, SimOptions{0}), std::invalid_argument);
}

TEST_CASE("double-binned codebook") {
  const std::vector<double> det{0.0, 1.0};
  const auto d = gen_double_binned(det, {8, 0.2}, 0.5, 0.5, 1);
  REQUIRE(d.size() == 1);
  CHECK(d.bin[0] == 0);
  CHECK(d.subbin[0] == 0);
  const auto d0 = gen_double_binned(det, {8, 0.2}, 0.0, 0.0, 1);
  CHECK(d0.bins == 1);

  const std::vector<double> u{0.5, 0.5};
  const auto a = gen_double_binned(u, {8, 0.2}, 0.5, 0.25, 7);
  const auto b = gen_double_binned(u, {8, 0.2}, 0.5, 0.25, 7);
  CHECK(a.bin == b.bin);
  CHECK(a.subbin == b.subbin);
  CHECK(a.size() == 70);
  const double mean = 70.0 / double(a.bins);
  for (const auto& m : a.members) CHECK(std::abs(double(m.size()) - mean) < 3 * std::sqrt(mean));
  CHECK(a.find(a.word(5)) == 5);
  const std::vector<Symbol> constant(8, 0);
  CHECK(a.find(constant) == a.size());
}

TEST_CASE("receiver step") {
  const auto ch = fixtures::single_receiver();
  const FbModel m(ch, fixtures::v1_is_y1(ch.cards()), {8, 0.5});
  const auto cb = gen_double_binned(m.p_v(1), {8, 0.5}, 0.25, 0.25, 3);
  Rng rng = make_stream(1, 0);
  const std::vector<Symbol> y{0, 1, 1, 0, 1, 0, 0, 1};
  const auto r = fb_receiver_step(cb, y, m.kernel(1), rng);
  REQUIRE(r.ok);
  CHECK(cb.find(y) == r.word);
  CHECK(r.psi == cb.bin[r.word]);
  CHECK(r.key == cb.subbin[r.word]);

  // Constant V: psi = k = 0.
  const auto sc = make_feedback_scheme(ch.cards(), 1, 1, {0.5, 0.5}, {1, 1}, {1});
  const FbModel mc(ch, sc, {8, 0.5});
  const auto cbc = gen_double_binned(mc.p_v(1), {8, 0.5}, 0.5, 0.5, 3);
  const auto rc = fb_receiver_step(cbc, y, mc.kernel(1), rng);
  CHECK(rc.psi == 0);
  CHECK(rc.key == 0);

  // Stochastic kernel at eps = 0.2: a jointly typical v exists for every
  // typical y, and the receiver finds one.
  const ChannelCards c{1, 2, 2, 1, 1};
  const auto noisy = make_feedback_scheme(c, 2, 1, {0.5, 0.5}, {0.75, 0.25, 0.25, 0.75}, {1});
  const TypicalityParams tp{8, 0.2};
  const FbModel mn(ch, noisy, tp);
  const auto cbn = gen_double_binned(mn.p_v(1), tp, 0.25, 0.25, 3);
  const TypicalityChecker ty({2}, {0.5, 0.5}, tp);
  std::size_t typical_y = 0, hit = 0;
  for (std::size_t t = 0; t < 2000; ++t) {
    std::vector<Symbol> yy(8);
    for (auto& v : yy) v = static_cast<Symbol>(uniform_index(rng, 2));
    if (!ty.typical(yy)) continue;
    ++typical_y;
    const auto rr = fb_receiver_step(cbn, yy, mn.kernel(1), rng);
    hit += rr.ok && mn.kernel(1).joint.typical(cbn.word(rr.word), yy);
  }
  CHECK(typical_y > 300);
  CHECK(double(hit) >= 0.99 * double(typical_y));

  // The exact selection law matches the sampler.
  const std::vector<Symbol> y0{0, 0, 0, 0, 1, 1, 1, 1};
  const auto law = selection_distribution(cbn, y0, mn.kernel(1));
  double total = 0.0;
  for (const auto& [w, p] : law) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  std::map<std::uint32_t, double> freq;
  const int draws = 20000;
  for (int t = 0; t < draws; ++t) freq[fb_receiver_step(cbn, y0, mn.kernel(1), rng).word] += 1.0 / draws;
  for (const auto& [w, p] : law) CHECK(std::abs(freq[w] - p) < 4 * std::sqrt(p * (1 - p) / draws) + 1e-9);
}

TEST_CASE("transmitter recovery") {
  const auto ch = fixtures::single_receiver();
  const TypicalityParams tp{8, 0.5};
  const FbModel m(ch, fixtures::v1_is_y1(ch.cards()), tp);
  const auto cb1 = gen_double_binned(m.p_v(1), tp, 0.0, 0.5, 2);
  const auto cb2 = gen_double_binned(m.p_v(2), tp, 0.0, 0.0, 3);
  const std::vector<Symbol> x{1, 1, 0, 0, 1, 0, 1, 0}, s(8, 0);
  const auto r = tx_recover(m, x, s, 0, 0, cb1, cb2);
  REQUIRE(r.ok);
  CHECK(r.word1 == cb1.find(x));
  CHECK(r.k1 == cb1.subbin[cb1.find(x)]);
  CHECK_THROWS_AS(tx_recover(m, x, s, 1, 0, cb1, cb2), std::out_of_range);

  // One bin while H(V1|X) > 0: ambiguous most of the time.
  const auto bsc = fixtures::bsc_single(0.25);
  const auto rep = run_fb(bsc, fixtures::v1_is_y1(bsc.cards()), {0, 0, 0.5, 0}, tp, SimOptions{500, 1, 1, false});
  CHECK(rep.get("tx_recover") > 250);
}

TEST_CASE("run_fb basics") {
  const auto ch = fixtures::single_receiver();
  const auto sc = fixtures::v1_is_y1(ch.cards());
  const TypicalityParams tp{6, 0.5};
  SimOptions o;
  o.trials = 300;
  // Constant Z and a single public bin: nothing reaches the eavesdropper.
  const auto r = run_fb(ch, sc, {0, 0, 0.5, 0}, tp, o);
  CHECK(r.leakage_exact);
  CHECK(r.get("k12_z_psi") == 0.0);
  const auto zero = run_fb(ch, sc, {0.3, 0, 0, 0}, tp, o);
  CHECK(zero.get("any") == 0.0);
  CHECK(zero.find("k1").value() == 0.0);
  CHECK(zero.get("k2") == 0.0);

  o.workers = 4;
  const auto r4 = run_fb(ch, sc, {0, 0, 0.5, 0}, tp, o);
  CHECK(report_to_json(r) == report_to_json(r4));

  // Past the enumeration cap the estimate is flagged.
  o.enumeration_cap = 10;
  CHECK_FALSE(run_fb(ch, sc, {0, 0, 0.5, 0}, tp, o).leakage_exact);
}
