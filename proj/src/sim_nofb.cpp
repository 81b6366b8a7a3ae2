#include "skagree/sim_nofb.hpp"

#include <cmath>
#include <stdexcept>

#include "skagree/leakage.hpp"
#include "skagree/parallel.hpp"

namespace skagree {

namespace {

constexpr std::uint64_t kCodebookSalt = 0xc0deb00c;
constexpr std::uint64_t kTrialSalt = 0x7a1a1;

std::vector<double> mass_of(const JointPMF& joint, const VarNames& order) {
  const JointPMF marg = marginal_in_order(joint, order);
  return {marg.mass().begin(), marg.mass().end()};
}

TypicalityChecker checker(const JointPMF& joint, const VarNames& order, TypicalityParams tp) {
  std::vector<std::size_t> cards;
  for (const auto& name : order) cards.push_back(joint.variable(name).card);
  return TypicalityChecker(std::move(cards), mass_of(joint, order), tp);
}

// Distribution of o^n under independent per-symbol kernels.
std::vector<double> product_distribution(const std::vector<std::span<const double>>& kernels) {
  std::vector<double> d{1.0};
  for (const auto& k : kernels) {
    std::vector<double> next(d.size() * k.size(), 0.0);
    for (std::size_t a = 0; a < d.size(); ++a) {
      if (d[a] == 0.0) continue;
      for (std::size_t o = 0; o < k.size(); ++o) next[a * k.size() + o] = d[a] * k[o];
    }
    d = std::move(next);
  }
  return d;
}

double ipow(double base, std::size_t e) { return std::pow(base, static_cast<double>(e)); }

}  // namespace

std::size_t count_for_rate(double rate, std::size_t n) {
  if (!(rate >= 0.0)) throw std::invalid_argument("rates must be non-negative");
  const double c = std::ceil(std::exp2(static_cast<double>(n) * rate) - 1e-9);
  if (c > 4e9) throw std::length_error("rate too large for blocklength (count exceeds 2^32)");
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

void NofbRates::check() const {
  const double rt[3] = {rt0, rt1, rt2};
  const double r[3] = {r0, r1, r2};
  for (int i = 0; i < 3; ++i) {
    if (!(r[i] >= 0.0)) throw std::invalid_argument("key rates must be non-negative");
    if (!(rt[i] >= r[i])) throw std::invalid_argument("codebook rate must be at least the key rate");
  }
}

NofbModel::NofbModel(const BroadcastChannelSpec& channel, const AuxScheme& scheme, TypicalityParams tp)
    : channel_(channel), aux_(scheme.cards()), tp_(tp) {
  using namespace var;
  tp_.check();
  const JointPMF joint = build_joint_nofb(channel, scheme);
  p_u0_ = mass_of(joint, {U0});
  {
    auto c1 = condition(joint, {U1}, {U0});
    p_u1_.assign(c1.table().begin(), c1.table().end());
    auto c2 = condition(joint, {U2}, {U0});
    p_u2_.assign(c2.table().begin(), c2.table().end());
  }
  p_x_.assign(scheme.x_given_all.table().begin(), scheme.x_given_all.table().end());

  enc1_ = checker(joint, {S, U0}, tp_);
  enc2_ = checker(joint, {S, U0, U1}, tp_);
  enc3_ = checker(joint, {S, U0, U1, U2}, tp_);
  dec1a_ = checker(joint, {U0, Y1}, tp_);
  dec1b_ = checker(joint, {U0, U1, Y1}, tp_);
  dec2a_ = checker(joint, {U0, Y2}, tp_);
  dec2b_ = checker(joint, {U0, U2, Y2}, tp_);

  const auto& c = channel_.cards();
  const std::size_t cells = c.s * aux_.u0 * aux_.u1 * aux_.u2;
  p_obs_[0].assign(cells * c.z, 0.0);
  p_obs_[1].assign(cells * c.y1, 0.0);
  p_obs_[2].assign(cells * c.y2, 0.0);
  for (std::size_t s = 0; s < c.s; ++s)
    for (std::size_t u0 = 0; u0 < aux_.u0; ++u0)
      for (std::size_t u1 = 0; u1 < aux_.u1; ++u1)
        for (std::size_t u2 = 0; u2 < aux_.u2; ++u2) {
          const std::size_t a = aux_index(s, u0, u1, u2);
          const auto px = p_x_given(s, u0, u1, u2);
          for (std::size_t x = 0; x < c.x; ++x) {
            if (px[x] == 0.0) continue;
            for (std::size_t y1 = 0; y1 < c.y1; ++y1)
              for (std::size_t y2 = 0; y2 < c.y2; ++y2)
                for (std::size_t z = 0; z < c.z; ++z) {
                  const double p = px[x] * channel_.prob(x, s, y1, y2, z);
                  p_obs_[0][a * c.z + z] += p;
                  p_obs_[1][a * c.y1 + y1] += p;
                  p_obs_[2][a * c.y2 + y2] += p;
                }
          }
        }
}

std::span<const double> NofbModel::p_x_given(std::size_t s, std::size_t u0, std::size_t u1, std::size_t u2) const {
  const std::size_t cx = channel_.cards().x;
  return {p_x_.data() + aux_index(s, u0, u1, u2) * cx, cx};
}

std::size_t NofbModel::obs_card(int which) const {
  const auto& c = channel_.cards();
  return which == 0 ? c.z : which == 1 ? c.y1 : c.y2;
}

std::span<const double> NofbModel::p_obs_given(int which, std::size_t s, std::size_t u0, std::size_t u1,
                                               std::size_t u2) const {
  const std::size_t card = obs_card(which);
  return {p_obs_[which].data() + aux_index(s, u0, u1, u2) * card, card};
}

Codebook gen_codebooks_nofb(const NofbModel& model, const NofbRates& rates, std::uint64_t seed) {
  rates.check();
  const std::size_t n = model.tp().n;
  Codebook cb;
  cb.n = n;
  cb.seed = seed;
  cb.words0 = count_for_rate(rates.rt0, n);
  cb.words1 = count_for_rate(rates.rt1, n);
  cb.words2 = count_for_rate(rates.rt2, n);
  cb.bins0 = count_for_rate(rates.r0, n);
  cb.bins1 = count_for_rate(rates.r1, n);
  cb.bins2 = count_for_rate(rates.r2, n);
  const double symbols = static_cast<double>(cb.words0) *
                         (1.0 + static_cast<double>(cb.words1) + static_cast<double>(cb.words2)) *
                         static_cast<double>(n);
  if (symbols > static_cast<double>(kMaxCodebookSymbols)) {
    throw std::length_error("codebook exceeds memory cap (" + std::to_string(kMaxCodebookSymbols) + " symbols)");
  }

  Rng rng = make_stream(seed, 0, kCodebookSalt);
  cb.u0.resize(cb.words0 * n);
  for (auto& sym : cb.u0) sym = static_cast<Symbol>(sample_from(model.p_u0(), rng));
  cb.u1.resize(cb.words0 * cb.words1 * n);
  cb.u2.resize(cb.words0 * cb.words2 * n);
  for (std::size_t i = 0; i < cb.words0; ++i) {
    const auto w0 = cb.word0(i);
    for (std::size_t j = 0; j < cb.words1; ++j)
      for (std::size_t t = 0; t < n; ++t)
        cb.u1[(i * cb.words1 + j) * n + t] = static_cast<Symbol>(sample_from(model.p_u1_given_u0(w0[t]), rng));
    for (std::size_t k = 0; k < cb.words2; ++k)
      for (std::size_t t = 0; t < n; ++t)
        cb.u2[(i * cb.words2 + k) * n + t] = static_cast<Symbol>(sample_from(model.p_u2_given_u0(w0[t]), rng));
  }
  auto label = [&](std::size_t count, std::size_t bins) {
    std::vector<std::uint32_t> out(count);
    for (auto& b : out) b = static_cast<std::uint32_t>(uniform_index(rng, bins));
    return out;
  };
  cb.bin0 = label(cb.words0, cb.bins0);
  cb.bin1 = label(cb.words0 * cb.words1, cb.bins1);
  cb.bin2 = label(cb.words0 * cb.words2, cb.bins2);
  return cb;
}

std::vector<Triple> typical_triples(const NofbModel& model, const Codebook& cb, std::span<const Symbol> s_seq) {
  if (s_seq.size() != cb.n) throw std::invalid_argument("state sequence length differs from n");
  std::vector<Triple> out;
  for (std::size_t i = 0; i < cb.words0; ++i) {
    const auto w0 = cb.word0(i);
    if (!model.enc_s_u0().typical(s_seq, w0)) continue;
    for (std::size_t j = 0; j < cb.words1; ++j) {
      const auto w1 = cb.word1(i, j);
      if (!model.enc_s_u0_u1().typical(s_seq, w0, w1)) continue;
      for (std::size_t k = 0; k < cb.words2; ++k) {
        if (model.enc_full().typical(s_seq, w0, w1, cb.word2(i, k))) {
          out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k)});
        }
      }
    }
  }
  return out;
}

EncodeResult encode_nofb(const NofbModel& model, const Codebook& cb, std::span<const Symbol> s_seq, Rng& rng) {
  EncodeResult r;
  const auto candidates = typical_triples(model, cb, s_seq);
  if (candidates.empty()) {
    r.covering_ok = false;
    r.index.i = static_cast<std::uint32_t>(uniform_index(rng, cb.words0));
    r.index.j = static_cast<std::uint32_t>(uniform_index(rng, cb.words1));
    r.index.k = static_cast<std::uint32_t>(uniform_index(rng, cb.words2));
  } else {
    r.covering_ok = true;
    r.index = candidates[uniform_index(rng, candidates.size())];
  }
  const auto w0 = cb.word0(r.index.i);
  const auto w1 = cb.word1(r.index.i, r.index.j);
  const auto w2 = cb.word2(r.index.i, r.index.k);
  r.x.resize(cb.n);
  for (std::size_t t = 0; t < cb.n; ++t) {
    r.x[t] = static_cast<Symbol>(sample_from(model.p_x_given(s_seq[t], w0[t], w1[t], w2[t]), rng));
  }
  return r;
}

DecodeResult decode_nofb(const NofbModel& model, const Codebook& cb, std::span<const Symbol> y_seq, int receiver) {
  if (receiver != 1 && receiver != 2) throw std::invalid_argument("receiver must be 1 or 2");
  if (y_seq.size() != cb.n) throw std::invalid_argument("output sequence length differs from n");
  const std::size_t words = receiver == 1 ? cb.words1 : cb.words2;
  DecodeResult r;
  for (std::size_t i = 0; i < cb.words0 && r.candidates < 2; ++i) {
    const auto w0 = cb.word0(i);
    if (!model.dec_prefix(receiver).typical(w0, y_seq)) continue;
    for (std::size_t m = 0; m < words && r.candidates < 2; ++m) {
      const auto wj = receiver == 1 ? cb.word1(i, m) : cb.word2(i, m);
      if (model.dec_full(receiver).typical(w0, wj, y_seq)) {
        if (r.candidates == 0) {
          r.i = static_cast<std::uint32_t>(i);
          r.m = static_cast<std::uint32_t>(m);
        }
        ++r.candidates;
      }
    }
  }
  r.ok = r.candidates == 1;
  return r;
}

KeyTriple extract_keys_nofb(const Codebook& cb, const Triple& index) {
  if (index.i >= cb.words0 || index.j >= cb.words1 || index.k >= cb.words2) {
    throw std::out_of_range("codeword index out of range");
  }
  return {cb.bin0[index.i], cb.bin1[index.i * cb.words1 + index.j], cb.bin2[index.i * cb.words2 + index.k]};
}

namespace {

struct NofbTrial {
  bool covering_ok = false, ok1 = false, ok2 = false;
  KeyTriple keys;
  std::uint32_t k0_rx1 = 0, k1_rx1 = 0, k0_rx2 = 0, k2_rx2 = 0;
  std::uint64_t obs[3] = {0, 0, 0};  // z, y1, y2 sequence indices
};

}  // namespace

SimulationReport run_nofb(const BroadcastChannelSpec& channel, const AuxScheme& scheme, const NofbRates& rates,
                          TypicalityParams tp, const SimOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("trials must be at least 1");
  rates.check();
  const NofbModel model(channel, scheme, tp);
  const Codebook cb = gen_codebooks_nofb(model, rates, opts.seed);
  const auto& c = channel.cards();
  const std::size_t n = tp.n;

  std::vector<NofbTrial> trials(opts.trials);
  parallel_for(opts.trials, opts.workers, [&](std::size_t t) {
    Rng rng = make_stream(opts.seed, t, kTrialSalt);
    std::vector<Symbol> s(n), y1(n), y2(n), z(n);
    for (auto& sym : s) sym = static_cast<Symbol>(sample_from(channel.state().mass(), rng));
    const EncodeResult enc = encode_nofb(model, cb, s, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t out = sample_from(channel.transition().row(enc.x[i] * c.s + s[i]), rng);
      z[i] = static_cast<Symbol>(out % c.z);
      y2[i] = static_cast<Symbol>((out / c.z) % c.y2);
      y1[i] = static_cast<Symbol>(out / (c.z * c.y2));
    }
    const DecodeResult d1 = decode_nofb(model, cb, y1, 1);
    const DecodeResult d2 = decode_nofb(model, cb, y2, 2);
    NofbTrial& r = trials[t];
    r.covering_ok = enc.covering_ok;
    r.keys = extract_keys_nofb(cb, enc.index);
    r.ok1 = d1.ok;
    r.ok2 = d2.ok;
    if (d1.ok) {
      r.k0_rx1 = cb.bin0[d1.i];
      r.k1_rx1 = cb.bin1[d1.i * cb.words1 + d1.m];
    }
    if (d2.ok) {
      r.k0_rx2 = cb.bin0[d2.i];
      r.k2_rx2 = cb.bin2[d2.i * cb.words2 + d2.m];
    }
    r.obs[0] = sequence_index(z, c.z);
    r.obs[1] = sequence_index(y1, c.y1);
    r.obs[2] = sequence_index(y2, c.y2);
  });

  // A key with a single possible value cannot be wrong; otherwise any
  // covering or decoding failure counts against it.
  const bool multi0 = cb.bins0 > 1, multi1 = cb.bins1 > 1, multi2 = cb.bins2 > 1;
  std::size_t e0 = 0, e1 = 0, e2 = 0, any = 0, cover_fail = 0, fail1 = 0, fail2 = 0;
  std::vector<std::uint64_t> h0(cb.bins0), h1(cb.bins1), h2(cb.bins2);
  for (const auto& r : trials) {
    const bool err0 = multi0 && (!r.covering_ok || !r.ok1 || !r.ok2 || r.k0_rx1 != r.keys.k0 || r.k0_rx2 != r.keys.k0);
    const bool err1 = multi1 && (!r.covering_ok || !r.ok1 || r.k1_rx1 != r.keys.k1);
    const bool err2 = multi2 && (!r.covering_ok || !r.ok2 || r.k2_rx2 != r.keys.k2);
    e0 += err0;
    e1 += err1;
    e2 += err2;
    any += err0 || err1 || err2;
    cover_fail += !r.covering_ok;
    fail1 += !r.ok1;
    fail2 += !r.ok2;
    ++h0[r.keys.k0];
    ++h1[r.keys.k1];
    ++h2[r.keys.k2];
  }
  const double T = static_cast<double>(opts.trials);
  const double dn = static_cast<double>(n);

  SimulationReport rep;
  rep.protocol = "nofb";
  rep.tp = tp;
  rep.trials = opts.trials;
  rep.seed = opts.seed;
  rep.nominal_rates = {{"Rt0", rates.rt0}, {"Rt1", rates.rt1}, {"Rt2", rates.rt2},
                       {"R0", rates.r0},   {"R1", rates.r1},   {"R2", rates.r2}};
  auto realized = [&](std::size_t count) { return std::log2(static_cast<double>(count)) / dn; };
  rep.realized_rates = {{"Rt0", realized(cb.words0)}, {"Rt1", realized(cb.words1)}, {"Rt2", realized(cb.words2)},
                        {"R0", realized(cb.bins0)},   {"R1", realized(cb.bins1)},   {"R2", realized(cb.bins2)}};
  rep.error_rates = {{"k0", static_cast<double>(e0) / T},
                     {"k1", static_cast<double>(e1) / T},
                     {"k2", static_cast<double>(e2) / T},
                     {"any", static_cast<double>(any) / T}};
  rep.key_entropy = {{"k0", histogram_entropy(h0) / dn},
                     {"k1", histogram_entropy(h1) / dn},
                     {"k2", histogram_entropy(h2) / dn}};
  rep.failures = {{"covering", static_cast<double>(cover_fail)},
                  {"packing_rx1", static_cast<double>(fail1)},
                  {"packing_rx2", static_cast<double>(fail2)}};

  if (!opts.measure_leakage) {
    rep.leakage_exact = false;
    return rep;
  }

  // All keys vs Z^n, K1 vs Y2^n, K2 vs Y1^n.
  JointCounter leak_z, leak_k1, leak_k2;
  auto all_keys = [&](const KeyTriple& k) {
    return (static_cast<std::uint64_t>(k.k0) * cb.bins1 + k.k1) * cb.bins2 + k.k2;
  };
  const double triples = static_cast<double>(cb.words0 * cb.words1 * cb.words2);
  const double size = ipow(static_cast<double>(c.s), n) * triples *
                      (ipow(static_cast<double>(c.z), n) + ipow(static_cast<double>(c.y1), n) +
                       ipow(static_cast<double>(c.y2), n));
  rep.enumeration_size = size > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(size);

  if (size <= static_cast<double>(opts.enumeration_cap)) {
    rep.leakage_exact = true;
    const auto states = static_cast<std::size_t>(ipow(static_cast<double>(c.s), n));
    const auto ps = channel.state().mass();
    std::vector<Symbol> s(n, 0);
    for (std::size_t si = 0; si < states; ++si) {
      double p_s = 1.0;
      for (auto sym : s) p_s *= ps[sym];
      if (p_s > 0.0) {
        auto cands = typical_triples(model, cb, s);
        if (cands.empty()) {
          for (std::uint32_t i = 0; i < cb.words0; ++i)
            for (std::uint32_t j = 0; j < cb.words1; ++j)
              for (std::uint32_t k = 0; k < cb.words2; ++k) cands.push_back({i, j, k});
        }
        const double w = p_s / static_cast<double>(cands.size());
        for (const auto& tr : cands) {
          const KeyTriple keys = extract_keys_nofb(cb, tr);
          const auto w0 = cb.word0(tr.i);
          const auto w1 = cb.word1(tr.i, tr.j);
          const auto w2 = cb.word2(tr.i, tr.k);
          for (int which = 0; which < 3; ++which) {
            std::vector<std::span<const double>> kernels(n);
            for (std::size_t t = 0; t < n; ++t) kernels[t] = model.p_obs_given(which, s[t], w0[t], w1[t], w2[t]);
            const auto dist = product_distribution(kernels);
            JointCounter& ctr = which == 0 ? leak_z : which == 1 ? leak_k2 : leak_k1;
            const std::uint64_t key = which == 0 ? all_keys(keys) : which == 1 ? keys.k2 : keys.k1;
            for (std::size_t o = 0; o < dist.size(); ++o) ctr.add(key, {o, 0, 0}, w * dist[o]);
          }
        }
      }
      for (std::size_t k = n; k-- > 0;) {
        if (++s[k] < c.s) break;
        s[k] = 0;
      }
    }
  } else {
    rep.leakage_exact = false;
    for (const auto& r : trials) {
      leak_z.add(all_keys(r.keys), {r.obs[0], 0, 0}, 1.0);
      leak_k2.add(r.keys.k2, {r.obs[1], 0, 0}, 1.0);
      leak_k1.add(r.keys.k1, {r.obs[2], 0, 0}, 1.0);
    }
  }
  rep.leakage = {{"k012_z", leak_z.mutual_information() / dn},
                 {"k1_y2", leak_k1.mutual_information() / dn},
                 {"k2_y1", leak_k2.mutual_information() / dn}};
  return rep;
}

}  // namespace skagree
