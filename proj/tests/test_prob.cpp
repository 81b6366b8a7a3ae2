#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "skagree/prob.hpp"

using namespace skagree;

namespace {

JointPMF pair_pmf(std::vector<double> m) { return JointPMF({{"X", 2}, {"Y", 2}}, std::move(m)); }

JointPMF random_pmf(Rng& rng, std::size_t nvars) {
  std::vector<Variable> vars;
  std::size_t cells = 1;
  for (std::size_t k = 0; k < nvars; ++k) {
    const std::size_t card = 2 + uniform_index(rng, 3);
    vars.push_back({"V" + std::to_string(k), card});
    cells *= card;
  }
  auto m = oracle::simplex(rng, cells);
  // Some exact zeros so the 0 log 0 paths get exercised.
  for (auto& x : m)
    if (uniform01(rng) < 0.15) x = 0.0;
  double t = 0.0;
  for (double x : m) t += x;
  if (t == 0.0) m[0] = t = 1.0;
  for (auto& x : m) x /= t;
  return JointPMF(vars, m);
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(pair_pmf({0.25, 0.25, 0.25, 0.25})).ok());
  auto r = validate(pair_pmf({0.3, 0.3, 0.2, 0.1}));
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations[0].find("mass sum 0.9") != std::string::npos);
  r = validate(pair_pmf({-0.1, 0.5, 0.3, 0.3}));
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations[0].find("negative mass") != std::string::npos);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(JointPMF({{"X", 2}, {"X", 2}}, {0.25, 0.25, 0.25, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(JointPMF({{"X", 2}}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(JointPMF({{"X", 0}}, {}), std::invalid_argument);
}

TEST_CASE("marginalize") {
  const auto p = pair_pmf({0.4, 0.1, 0.1, 0.4});
  const auto mx = marginalize(p, {"X"});
  CHECK(mx.mass()[0] == doctest::Approx(0.5));
  CHECK(mx.mass()[1] == doctest::Approx(0.5));
  const auto same = marginalize(p, {"X", "Y"});
  for (std::size_t i = 0; i < 4; ++i) CHECK(same.mass()[i] == p.mass()[i]);
  const auto u = marginalize(pair_pmf({0.25, 0.25, 0.25, 0.25}), {"Y"});
  CHECK(u.mass()[0] == 0.5);
  CHECK_THROWS_AS(marginalize(p, {"W"}), std::invalid_argument);

  // Reordering keeps the requested order.
  const auto r = marginal_in_order(pair_pmf({0.1, 0.2, 0.3, 0.4}), {"Y", "X"});
  CHECK(r.variables()[0].name == "Y");
  CHECK(r.mass()[1] == doctest::Approx(0.3));
}

TEST_CASE("condition") {
  const auto c = condition(pair_pmf({0.4, 0.1, 0.1, 0.4}), {"Y"}, {"X"});
  CHECK(c.prob(0, 0) == doctest::Approx(0.8));
  CHECK(c.prob(0, 1) == doctest::Approx(0.2));
  const auto id = condition(pair_pmf({0.5, 0.0, 0.0, 0.5}), {"Y"}, {"X"});
  CHECK(id.prob(0, 0) == 1.0);
  CHECK(id.prob(1, 1) == 1.0);
  const auto ind = condition(pair_pmf({0.12, 0.28, 0.18, 0.42}), {"Y"}, {"X"});
  CHECK(ind.prob(0, 0) == doctest::Approx(0.3));
  CHECK(ind.prob(1, 0) == doctest::Approx(0.3));
  // Zero-mass conditioning cell is flagged.
  const auto z = condition(pair_pmf({0.5, 0.5, 0.0, 0.0}), {"Y"}, {"X"});
  CHECK(z.constrained(0));
  CHECK_FALSE(z.constrained(1));
  CHECK_THROWS_AS(condition(pair_pmf({0.4, 0.1, 0.1, 0.4}), {"X"}, {"X"}), std::invalid_argument);
}

TEST_CASE("compose") {
  const JointPMF root({{"S", 2}}, {0.5, 0.5});
  const ConditionalPMF ident({{"X", 2}}, {{"S", 2}}, {1, 0, 0, 1});
  const std::array<ConditionalPMF, 1> f{ident};
  const auto j = compose(f, root);
  CHECK(j.mass()[0] == 0.5);
  CHECK(j.mass()[1] == 0.0);
  CHECK(j.mass()[3] == 0.5);

  const ConditionalPMF indep({{"Y", 2}}, {}, {0.3, 0.7});
  const std::array<ConditionalPMF, 1> g{indep};
  const auto prod = compose(g, root);
  CHECK(prod.mass()[1] == doctest::Approx(0.35));

  const ConditionalPMF dangling({{"Y", 2}}, {{"W", 2}}, {1, 0, 0, 1});
  const std::array<ConditionalPMF, 1> d{dangling};
  CHECK_THROWS_AS(compose(d, root), std::invalid_argument);
  const ConditionalPMF dup({{"S", 2}}, {}, {0.5, 0.5});
  const std::array<ConditionalPMF, 1> e{dup};
  CHECK_THROWS_AS(compose(e, root), std::invalid_argument);
}

TEST_CASE("compose recovers its factors") {
  Rng rng = make_stream(3, 0);
  const JointPMF root({{"A", 3}}, oracle::simplex(rng, 3));
  const ConditionalPMF fb({{"B", 2}}, {{"A", 3}}, oracle::rows(rng, 3, 2));
  const ConditionalPMF fc({{"C", 4}}, {{"A", 3}, {"B", 2}}, oracle::rows(rng, 6, 4));
  const std::array<ConditionalPMF, 2> f{fb, fc};
  const auto j = compose(f, root);
  const auto back = condition(j, {"C"}, {"A", "B"});
  for (std::size_t i = 0; i < fc.table().size(); ++i) CHECK(back.table()[i] == doctest::Approx(fc.table()[i]).epsilon(1e-12));
}

TEST_CASE("entropy and mutual information examples") {
  const JointPMF u4({{"X", 4}}, {0.25, 0.25, 0.25, 0.25});
  CHECK(entropy(u4, {"X"}) == doctest::Approx(2.0).epsilon(1e-15));
  const JointPMF det({{"X", 3}}, {0.0, 1.0, 0.0});
  CHECK(entropy(det, {"X"}) == 0.0);
  const JointPMF q({{"X", 2}}, {0.25, 0.75});
  CHECK(std::abs(entropy(q, {"X"}) - 0.811278) < 1e-6);

  CHECK(std::abs(mutual_information(pair_pmf({0.25, 0.25, 0.25, 0.25}), {"X"}, {"Y"})) < 1e-15);
  CHECK(mutual_information(pair_pmf({0.5, 0.0, 0.0, 0.5}), {"X"}, {"Y"}) == doctest::Approx(1.0));
  CHECK(std::abs(mutual_information(pair_pmf({0.4, 0.1, 0.1, 0.4}), {"X"}, {"Y"}) - 0.278072) < 1e-6);
  CHECK_THROWS_AS(entropy(u4, {"W"}), std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(pair_pmf({0.4, 0.1, 0.1, 0.4}), {"X"}, {"X"}), std::invalid_argument);
}

TEST_CASE("measures match the oracle and obey the identities") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_stream(seed, 0, 11);
    const std::size_t nv = 3 + seed % 2;
    const auto p = random_pmf(rng, nv);
    oracle::Dense d;
    for (const auto& v : p.variables()) d.cards.push_back(v.card);
    d.p.assign(p.mass().begin(), p.mass().end());

    const VarNames a{"V0"}, b{"V1"}, c{"V2"};
    const double i_abc = mutual_information(p, {"V0", "V1"}, c);
    CHECK(i_abc == doctest::Approx(oracle::mi(d, {0, 1}, {2})).epsilon(1e-9));
    CHECK(entropy(p, a, c) == doctest::Approx(oracle::h(d, {0}, {2})).epsilon(1e-9));
    // chain rule
    CHECK(std::abs(i_abc - mutual_information(p, a, c) - mutual_information(p, b, c, a)) < 1e-9);
    // non-negativity and conditioning bounds
    const double cmi = mutual_information(p, a, b, c);
    CHECK(cmi >= -1e-12);
    CHECK(cmi <= std::min(entropy(p, a, c), entropy(p, b, c)) + 1e-9);
    CHECK(entropy(p, a, b) <= entropy(p, a) + 1e-9);

    EntropyCache cache(p);
    CHECK(std::abs(cache.I(a, b, c) - cmi) < 1e-12);
    CHECK(std::abs(cache.H({"V0", "V2"}, b) - entropy(p, {"V0", "V2"}, b)) < 1e-12);
  }
}
