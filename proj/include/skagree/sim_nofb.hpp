// Finite-blocklength simulator of the superposition / random binning scheme
// without public feedback.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skagree/channel.hpp"
#include "skagree/random.hpp"
#include "skagree/report.hpp"
#include "skagree/typicality.hpp"

namespace skagree {

/// Word count ceil(2^{nR}) (with 1e-9 slack so 2^{n*1} is exact).
std::size_t count_for_rate(double rate, std::size_t n);

/// Upper bound on codebook symbols held in memory.
inline constexpr std::size_t kMaxCodebookSymbols = 50'000'000;

struct NofbRates {
  // Codebook rates (tilde) and key (bin) rates.
  double rt0 = 0.0, rt1 = 0.0, rt2 = 0.0;
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;

  /// Throws unless rt >= r >= 0 componentwise.
  void check() const;
};

struct SimOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool measure_leakage = true;
  /// Largest exact enumeration before falling back to plug-in estimates.
  std::size_t enumeration_cap = 1'000'000;
};

struct Codebook {
  std::size_t n = 0;
  std::size_t words0 = 1, words1 = 1, words2 = 1;  // words1, words2 per u0 word
  std::size_t bins0 = 1, bins1 = 1, bins2 = 1;
  std::vector<Symbol> u0, u1, u2;
  std::vector<std::uint32_t> bin0, bin1, bin2;  // bin1[i*words1 + j]
  std::uint64_t seed = 0;

  std::span<const Symbol> word0(std::size_t i) const { return {u0.data() + i * n, n}; }
  std::span<const Symbol> word1(std::size_t i, std::size_t j) const { return {u1.data() + (i * words1 + j) * n, n}; }
  std::span<const Symbol> word2(std::size_t i, std::size_t k) const { return {u2.data() + (i * words2 + k) * n, n}; }
};

/// Channel, scheme and the typicality tests the protocol needs.
class NofbModel {
 public:
  NofbModel(const BroadcastChannelSpec& channel, const AuxScheme& scheme, TypicalityParams tp);

  const BroadcastChannelSpec& channel() const { return channel_; }
  const AuxCards& aux() const { return aux_; }
  const TypicalityParams& tp() const { return tp_; }

  std::span<const double> p_u0() const { return p_u0_; }
  std::span<const double> p_u1_given_u0(std::size_t u0) const { return {p_u1_.data() + u0 * aux_.u1, aux_.u1}; }
  std::span<const double> p_u2_given_u0(std::size_t u0) const { return {p_u2_.data() + u0 * aux_.u2, aux_.u2}; }
  std::span<const double> p_x_given(std::size_t s, std::size_t u0, std::size_t u1, std::size_t u2) const;
  /// p(o | s,u0,u1,u2) for o in Z (which=0), Y1 (1), Y2 (2).
  std::span<const double> p_obs_given(int which, std::size_t s, std::size_t u0, std::size_t u1, std::size_t u2) const;
  std::size_t obs_card(int which) const;

  const TypicalityChecker& enc_s_u0() const { return enc1_; }
  const TypicalityChecker& enc_s_u0_u1() const { return enc2_; }
  const TypicalityChecker& enc_full() const { return enc3_; }
  const TypicalityChecker& dec_prefix(int receiver) const { return receiver == 1 ? dec1a_ : dec2a_; }
  const TypicalityChecker& dec_full(int receiver) const { return receiver == 1 ? dec1b_ : dec2b_; }

 private:
  std::size_t aux_index(std::size_t s, std::size_t u0, std::size_t u1, std::size_t u2) const {
    return ((s * aux_.u0 + u0) * aux_.u1 + u1) * aux_.u2 + u2;
  }

  BroadcastChannelSpec channel_;
  AuxCards aux_;
  TypicalityParams tp_;
  std::vector<double> p_u0_, p_u1_, p_u2_;
  std::vector<double> p_x_;
  std::vector<double> p_obs_[3];
  TypicalityChecker enc1_, enc2_, enc3_, dec1a_, dec1b_, dec2a_, dec2b_;
};

/// Words are i.i.d. from p(U0), then per u0 word i.i.d. from p(U1|U0) and
/// p(U2|U0); bin labels are uniform. Throws std::length_error over the cap.
Codebook gen_codebooks_nofb(const NofbModel& model, const NofbRates& rates, std::uint64_t seed);

struct Triple {
  std::uint32_t i = 0, j = 0, k = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Every index triple jointly typical with s^n, in lexicographic order.
std::vector<Triple> typical_triples(const NofbModel& model, const Codebook& cb, std::span<const Symbol> s_seq);

struct EncodeResult {
  bool covering_ok = false;
  Triple index;
  std::vector<Symbol> x;
};

/// Picks uniformly among the typical triples (a uniformly random triple on
/// covering failure) and draws x^n symbol by symbol.
EncodeResult encode_nofb(const NofbModel& model, const Codebook& cb, std::span<const Symbol> s_seq, Rng& rng);

struct DecodeResult {
  bool ok = false;
  std::uint32_t i = 0;  // u0 index
  std::uint32_t m = 0;  // u1 or u2 index
  std::size_t candidates = 0;  // capped at 2
};

/// Unique (u0, u_j) pair jointly typical with y_j^n. Zero or several
/// candidates is a failure.
DecodeResult decode_nofb(const NofbModel& model, const Codebook& cb, std::span<const Symbol> y_seq, int receiver);

struct KeyTriple {
  std::uint32_t k0 = 0, k1 = 0, k2 = 0;
};

KeyTriple extract_keys_nofb(const Codebook& cb, const Triple& index);

SimulationReport run_nofb(const BroadcastChannelSpec& channel, const AuxScheme& scheme, const NofbRates& rates,
                          TypicalityParams tp, const SimOptions& opts);

}  // namespace skagree
