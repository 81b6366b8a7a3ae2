#include "skagree/sim_fb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "skagree/leakage.hpp"
#include "skagree/parallel.hpp"

namespace skagree {

namespace {

constexpr std::uint64_t kBinSalt = 0xb1b1;
constexpr std::uint64_t kTrialSalt = 0xfeedbac;

std::vector<double> mass_of(const JointPMF& joint, const VarNames& order) {
  const JointPMF marg = marginal_in_order(joint, order);
  return {marg.mass().begin(), marg.mass().end()};
}

TypicalityChecker checker(const JointPMF& joint, const VarNames& order, TypicalityParams tp) {
  std::vector<std::size_t> cards;
  for (const auto& name : order) cards.push_back(joint.variable(name).card);
  return TypicalityChecker(std::move(cards), mass_of(joint, order), tp);
}

VKernel make_kernel(const JointPMF& joint, const ConditionalPMF& v_given_y, const std::string& v,
                    const std::string& y, TypicalityParams tp) {
  VKernel k;
  k.card_y = joint.variable(y).card;
  k.card_v = joint.variable(v).card;
  k.v_given_y.assign(v_given_y.table().begin(), v_given_y.table().end());
  k.joint = checker(joint, {v, y}, tp);
  return k;
}

double sequence_prob(std::span<const Symbol> v, std::span<const Symbol> y, const VKernel& k) {
  double p = 1.0;
  for (std::size_t t = 0; t < v.size() && p > 0.0; ++t) p *= k.row(y[t])[v[t]];
  return p;
}

double ipow(double base, std::size_t e) { return std::pow(base, static_cast<double>(e)); }

}  // namespace

void FbRates::check() const {
  if (!(rp1 >= 0.0 && rp2 >= 0.0 && r1 >= 0.0 && r2 >= 0.0)) throw std::invalid_argument("rates must be non-negative");
}

std::size_t DoubleBinnedCodebook::find(std::span<const Symbol> seq) const {
  const std::uint64_t r = sequence_index(seq, card);
  auto it = std::lower_bound(ranks.begin(), ranks.end(), r);
  if (it == ranks.end() || *it != r) return size();
  return static_cast<std::size_t>(it - ranks.begin());
}

DoubleBinnedCodebook gen_double_binned(std::span<const double> v_pmf, TypicalityParams tp, double rprime, double r,
                                       std::uint64_t seed) {
  if (!(rprime >= 0.0 && r >= 0.0)) throw std::invalid_argument("rates must be non-negative");
  DoubleBinnedCodebook cb;
  cb.n = tp.n;
  cb.card = v_pmf.size();
  cb.seed = seed;
  cb.words = enumerate_typical_set(v_pmf, tp);
  const std::size_t size = cb.words.size() / tp.n;
  cb.bins = count_for_rate(rprime, tp.n);
  cb.subbins = count_for_rate(r, tp.n);
  cb.ranks.resize(size);
  for (std::size_t i = 0; i < size; ++i) cb.ranks[i] = sequence_index(cb.word(i), cb.card);
  Rng rng = make_stream(seed, 0, kBinSalt);
  cb.bin.resize(size);
  cb.subbin.resize(size);
  // A lone word (deterministic V) keeps labels 0.
  for (std::size_t i = 0; i < size && size > 1; ++i) {
    cb.bin[i] = static_cast<std::uint32_t>(uniform_index(rng, cb.bins));
    cb.subbin[i] = static_cast<std::uint32_t>(uniform_index(rng, cb.subbins));
  }
  cb.members.assign(cb.bins, {});
  for (std::size_t i = 0; i < size; ++i) cb.members[cb.bin[i]].push_back(static_cast<std::uint32_t>(i));
  return cb;
}

ReceiverResult fb_receiver_step(const DoubleBinnedCodebook& cb, std::span<const Symbol> y_seq, const VKernel& kernel,
                                Rng& rng) {
  if (y_seq.size() != cb.n) throw std::invalid_argument("output sequence length differs from n");
  ReceiverResult r;
  auto take = [&](std::size_t w) {
    r.word = static_cast<std::uint32_t>(w);
    r.psi = cb.bin[w];
    r.key = cb.subbin[w];
  };
  if (cb.size() == 0) throw std::logic_error("empty typical set");
  std::vector<Symbol> v(cb.n);
  for (std::size_t d = 0; d < kReceiverDraws; ++d) {
    for (std::size_t t = 0; t < cb.n; ++t) v[t] = static_cast<Symbol>(sample_from(kernel.row(y_seq[t]), rng));
    if (!kernel.joint.typical(v, y_seq)) continue;
    const std::size_t w = cb.find(v);
    if (w < cb.size()) {
      r.ok = true;
      take(w);
      return r;
    }
  }
  for (std::size_t w = 0; w < cb.size(); ++w) {
    if (kernel.joint.typical(cb.word(w), y_seq)) {
      r.ok = true;
      take(w);
      return r;
    }
  }
  take(uniform_index(rng, cb.size()));
  return r;
}

std::vector<std::pair<std::uint32_t, double>> selection_distribution(const DoubleBinnedCodebook& cb,
                                                                     std::span<const Symbol> y_seq,
                                                                     const VKernel& kernel) {
  std::vector<std::pair<std::uint32_t, double>> out;
  double q = 0.0;
  for (std::size_t w = 0; w < cb.size(); ++w) {
    if (!kernel.joint.typical(cb.word(w), y_seq)) continue;
    const double p = sequence_prob(cb.word(w), y_seq, kernel);
    out.emplace_back(static_cast<std::uint32_t>(w), p);
    q += p;
  }
  if (out.empty()) {
    const double u = 1.0 / static_cast<double>(cb.size());
    for (std::size_t w = 0; w < cb.size(); ++w) out.emplace_back(static_cast<std::uint32_t>(w), u);
    return out;
  }
  const double miss = std::pow(1.0 - q, static_cast<double>(kReceiverDraws));
  for (auto& [w, p] : out) p = (1.0 - miss) * p / q;
  out.front().second += miss;
  return out;
}

FbModel::FbModel(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme, TypicalityParams tp)
    : channel_(channel), tp_(tp), joint_(build_joint_fb(channel, scheme)) {
  using namespace var;
  tp_.check();
  p_v1_ = mass_of(joint_, {V1});
  p_v2_ = mass_of(joint_, {V2});
  p_x_.assign(scheme.x_given_s.table().begin(), scheme.x_given_s.table().end());
  k1_ = make_kernel(joint_, scheme.v1_given_y1, V1, Y1, tp_);
  k2_ = make_kernel(joint_, scheme.v2_given_y2, V2, Y2, tp_);
  sxv1_ = checker(joint_, {S, X, V1}, tp_);
  sxv2_ = checker(joint_, {S, X, V2}, tp_);
  sxv12_ = checker(joint_, {S, X, V1, V2}, tp_);
}

std::span<const double> FbModel::p_x_given_s(std::size_t s) const {
  const std::size_t cx = channel_.cards().x;
  return {p_x_.data() + s * cx, cx};
}

RecoverResult tx_recover(const FbModel& model, std::span<const Symbol> x_seq, std::span<const Symbol> s_seq,
                         std::uint32_t psi1, std::uint32_t psi2, const DoubleBinnedCodebook& cb1,
                         const DoubleBinnedCodebook& cb2) {
  if (psi1 >= cb1.bins || psi2 >= cb2.bins) throw std::out_of_range("bin index out of range");
  std::vector<std::uint32_t> c1, c2;
  for (auto w : cb1.members[psi1]) {
    if (model.sx_v(1).typical(s_seq, x_seq, cb1.word(w))) c1.push_back(w);
  }
  for (auto w : cb2.members[psi2]) {
    if (model.sx_v(2).typical(s_seq, x_seq, cb2.word(w))) c2.push_back(w);
  }
  RecoverResult r;
  for (auto a : c1) {
    for (auto b : c2) {
      if (!model.sx_v1_v2().typical(s_seq, x_seq, cb1.word(a), cb2.word(b))) continue;
      if (r.candidates == 0) {
        r.word1 = a;
        r.word2 = b;
      }
      if (++r.candidates >= 2) break;
    }
    if (r.candidates >= 2) break;
  }
  r.ok = r.candidates == 1;
  if (r.ok) {
    r.k1 = cb1.subbin[r.word1];
    r.k2 = cb2.subbin[r.word2];
  }
  return r;
}

namespace {

struct FbTrial {
  bool ok1 = false, ok2 = false, recovered = false;
  std::uint32_t psi1 = 0, psi2 = 0, k1 = 0, k2 = 0, k1_tx = 0, k2_tx = 0;
  std::uint64_t y1 = 0, y2 = 0, z = 0;
};

struct Label {
  std::uint32_t psi = 0, key = 0;
  double p = 0.0;
};

std::vector<Label> label_distribution(const DoubleBinnedCodebook& cb, std::span<const Symbol> y, const VKernel& k) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> agg;
  for (const auto& [w, p] : selection_distribution(cb, y, k)) agg[{cb.bin[w], cb.subbin[w]}] += p;
  std::vector<Label> out;
  for (const auto& [lab, p] : agg) out.push_back({lab.first, lab.second, p});
  return out;
}

std::vector<Symbol> unrank(std::uint64_t idx, std::size_t card, std::size_t n) {
  std::vector<Symbol> seq(n);
  for (std::size_t t = n; t-- > 0;) {
    seq[t] = static_cast<Symbol>(idx % card);
    idx /= card;
  }
  return seq;
}

}  // namespace

SimulationReport run_fb(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme, const FbRates& rates,
                        TypicalityParams tp, const SimOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("trials must be at least 1");
  rates.check();
  const FbModel model(channel, scheme, tp);
  const auto cb1 = gen_double_binned(model.p_v(1), tp, rates.rp1, rates.r1, splitmix64(opts.seed) ^ 1);
  const auto cb2 = gen_double_binned(model.p_v(2), tp, rates.rp2, rates.r2, splitmix64(opts.seed) ^ 2);
  const auto& c = channel.cards();
  const std::size_t n = tp.n;

  std::vector<FbTrial> trials(opts.trials);
  parallel_for(opts.trials, opts.workers, [&](std::size_t t) {
    Rng rng = make_stream(opts.seed, t, kTrialSalt);
    std::vector<Symbol> s(n), x(n), y1(n), y2(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<Symbol>(sample_from(channel.state().mass(), rng));
      x[i] = static_cast<Symbol>(sample_from(model.p_x_given_s(s[i]), rng));
      const std::size_t out = sample_from(channel.transition().row(x[i] * c.s + s[i]), rng);
      z[i] = static_cast<Symbol>(out % c.z);
      y2[i] = static_cast<Symbol>((out / c.z) % c.y2);
      y1[i] = static_cast<Symbol>(out / (c.z * c.y2));
    }
    const auto r1 = fb_receiver_step(cb1, y1, model.kernel(1), rng);
    const auto r2 = fb_receiver_step(cb2, y2, model.kernel(2), rng);
    const auto rec = tx_recover(model, x, s, r1.psi, r2.psi, cb1, cb2);
    FbTrial& r = trials[t];
    r.ok1 = r1.ok;
    r.ok2 = r2.ok;
    r.recovered = rec.ok;
    r.psi1 = r1.psi;
    r.psi2 = r2.psi;
    r.k1 = r1.key;
    r.k2 = r2.key;
    r.k1_tx = rec.k1;
    r.k2_tx = rec.k2;
    r.y1 = sequence_index(y1, c.y1);
    r.y2 = sequence_index(y2, c.y2);
    r.z = sequence_index(z, c.z);
  });

  const bool multi1 = cb1.subbins > 1, multi2 = cb2.subbins > 1;
  std::size_t e1 = 0, e2 = 0, any = 0, f1 = 0, f2 = 0, frec = 0;
  std::vector<std::uint64_t> h1(cb1.subbins), h2(cb2.subbins);
  for (const auto& r : trials) {
    const bool err1 = multi1 && (!r.ok1 || !r.recovered || r.k1_tx != r.k1);
    const bool err2 = multi2 && (!r.ok2 || !r.recovered || r.k2_tx != r.k2);
    e1 += err1;
    e2 += err2;
    any += err1 || err2;
    f1 += !r.ok1;
    f2 += !r.ok2;
    frec += !r.recovered;
    ++h1[r.k1];
    ++h2[r.k2];
  }
  const double T = static_cast<double>(opts.trials);
  const double dn = static_cast<double>(n);
  auto realized = [&](std::size_t count) { return std::log2(static_cast<double>(count)) / dn; };

  SimulationReport rep;
  rep.protocol = "fb";
  rep.tp = tp;
  rep.trials = opts.trials;
  rep.seed = opts.seed;
  rep.nominal_rates = {{"Rp1", rates.rp1}, {"Rp2", rates.rp2}, {"R1", rates.r1}, {"R2", rates.r2}};
  rep.realized_rates = {{"Rp1", realized(cb1.bins)}, {"Rp2", realized(cb2.bins)},
                        {"R1", realized(cb1.subbins)}, {"R2", realized(cb2.subbins)},
                        {"typical_set_v1", realized(std::max<std::size_t>(cb1.size(), 1))},
                        {"typical_set_v2", realized(std::max<std::size_t>(cb2.size(), 1))}};
  rep.error_rates = {{"k1", static_cast<double>(e1) / T},
                     {"k2", static_cast<double>(e2) / T},
                     {"any", static_cast<double>(any) / T}};
  rep.key_entropy = {{"k1", histogram_entropy(h1) / dn}, {"k2", histogram_entropy(h2) / dn}};
  rep.failures = {{"select_rx1", static_cast<double>(f1)},
                  {"select_rx2", static_cast<double>(f2)},
                  {"tx_recover", static_cast<double>(frec)}};

  if (!opts.measure_leakage) {
    rep.leakage_exact = false;
    return rep;
  }

  JointCounter leak1, leak2, leak_z;
  const std::uint64_t psi_radix = cb2.bins;
  const std::uint64_t key_radix = cb2.subbins;

  // Outputs are i.i.d. from the single-letter p(y1,y2,z).
  struct Tuple {
    Symbol y1, y2, z;
    double p;
  };
  std::vector<Tuple> support;
  {
    const auto m = mass_of(model.joint(), {var::Y1, var::Y2, var::Z});
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] <= 0.0) continue;
      support.push_back({static_cast<Symbol>(i / (c.z * c.y2)), static_cast<Symbol>((i / c.z) % c.y2),
                         static_cast<Symbol>(i % c.z), m[i]});
    }
  }
  const double size = ipow(static_cast<double>(support.size()), n) * static_cast<double>(cb1.size()) *
                      static_cast<double>(cb2.size());
  rep.enumeration_size = size > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(size);

  if (size <= static_cast<double>(opts.enumeration_cap)) {
    rep.leakage_exact = true;
    std::map<std::uint64_t, std::vector<Label>> cache1, cache2;
    auto labels = [&](std::map<std::uint64_t, std::vector<Label>>& cache, std::uint64_t idx, std::size_t card,
                      const DoubleBinnedCodebook& cb, const VKernel& k) -> const std::vector<Label>& {
      auto it = cache.find(idx);
      if (it == cache.end()) it = cache.emplace(idx, label_distribution(cb, unrank(idx, card, n), k)).first;
      return it->second;
    };
    const auto total = static_cast<std::size_t>(ipow(static_cast<double>(support.size()), n));
    std::vector<std::size_t> odo(n, 0);
    for (std::size_t e = 0; e < total; ++e) {
      double p = 1.0;
      std::uint64_t y1 = 0, y2 = 0, z = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const Tuple& tu = support[odo[t]];
        p *= tu.p;
        y1 = y1 * c.y1 + tu.y1;
        y2 = y2 * c.y2 + tu.y2;
        z = z * c.z + tu.z;
      }
      const auto& l1 = labels(cache1, y1, c.y1, cb1, model.kernel(1));
      const auto& l2 = labels(cache2, y2, c.y2, cb2, model.kernel(2));
      for (const auto& a : l1) {
        for (const auto& b : l2) {
          const double w = p * a.p * b.p;
          const std::uint64_t psi = a.psi * psi_radix + b.psi;
          leak1.add(a.key, {y2, psi, 0}, w);
          leak2.add(b.key, {y1, psi, 0}, w);
          leak_z.add(a.key * key_radix + b.key, {z, psi, 0}, w);
        }
      }
      for (std::size_t k = n; k-- > 0;) {
        if (++odo[k] < support.size()) break;
        odo[k] = 0;
      }
    }
  } else {
    rep.leakage_exact = false;
    for (const auto& r : trials) {
      const std::uint64_t psi = r.psi1 * psi_radix + r.psi2;
      leak1.add(r.k1, {r.y2, psi, 0}, 1.0);
      leak2.add(r.k2, {r.y1, psi, 0}, 1.0);
      leak_z.add(r.k1 * key_radix + r.k2, {r.z, psi, 0}, 1.0);
    }
  }
  rep.leakage = {{"k1_y2_psi", leak1.mutual_information() / dn},
                 {"k2_y1_psi", leak2.mutual_information() / dn},
                 {"k12_z_psi", leak_z.mutual_information() / dn}};
  return rep;
}

}  // namespace skagree
