// Finite-blocklength simulator of the double-binning scheme with one round of
// public feedback.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skagree/channel.hpp"
#include "skagree/random.hpp"
#include "skagree/report.hpp"
#include "skagree/sim_nofb.hpp"
#include "skagree/typicality.hpp"

namespace skagree {

struct FbRates {
  double rp1 = 0.0, rp2 = 0.0;  // public bin rates
  double r1 = 0.0, r2 = 0.0;    // key (sub-bin) rates

  void check() const;
};

/// Typical set of V with a (bin, sub-bin) label on every word.
struct DoubleBinnedCodebook {
  std::size_t n = 0;
  std::size_t card = 1;
  std::vector<Symbol> words;            // lexicographic, flattened
  std::vector<std::uint64_t> ranks;     // sequence_index of each word, ascending
  std::vector<std::uint32_t> bin, subbin;
  std::size_t bins = 1, subbins = 1;
  std::vector<std::vector<std::uint32_t>> members;  // word indices per bin
  std::uint64_t seed = 0;

  std::size_t size() const { return bin.size(); }
  std::span<const Symbol> word(std::size_t i) const { return {words.data() + i * n, n}; }
  /// Index of a sequence in the codebook, or size() if it is not typical.
  std::size_t find(std::span<const Symbol> seq) const;
};

DoubleBinnedCodebook gen_double_binned(std::span<const double> v_pmf, TypicalityParams tp, double rprime, double r,
                                       std::uint64_t seed);

/// p(v|y) together with the joint typicality test for (V, Y).
struct VKernel {
  std::size_t card_y = 1, card_v = 1;
  std::vector<double> v_given_y;  // [y][v]
  TypicalityChecker joint;        // over (V, Y)

  std::span<const double> row(std::size_t y) const { return {v_given_y.data() + y * card_v, card_v}; }
};

/// Attempts at drawing v^n from the kernel before falling back to a scan.
inline constexpr std::size_t kReceiverDraws = 256;

struct ReceiverResult {
  bool ok = false;
  std::uint32_t word = 0;
  std::uint32_t psi = 0;  // public bin index
  std::uint32_t key = 0;  // sub-bin index
};

/// Draws v^n from p(v|y) up to kReceiverDraws times and keeps the first draw
/// jointly typical with y^n; if none is, takes the first jointly typical word
/// in scan order. With no jointly typical word at all the step fails and a
/// uniformly random typical word is announced instead.
ReceiverResult fb_receiver_step(const DoubleBinnedCodebook& cb, std::span<const Symbol> y_seq, const VKernel& kernel,
                                Rng& rng);

/// Exact distribution of the word chosen by fb_receiver_step for a fixed
/// y^n, as (word index, probability) pairs.
std::vector<std::pair<std::uint32_t, double>> selection_distribution(const DoubleBinnedCodebook& cb,
                                                                     std::span<const Symbol> y_seq,
                                                                     const VKernel& kernel);

class FbModel {
 public:
  FbModel(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme, TypicalityParams tp);

  const BroadcastChannelSpec& channel() const { return channel_; }
  const TypicalityParams& tp() const { return tp_; }
  const JointPMF& joint() const { return joint_; }
  std::span<const double> p_v(int j) const { return j == 1 ? p_v1_ : p_v2_; }
  const VKernel& kernel(int j) const { return j == 1 ? k1_ : k2_; }
  std::span<const double> p_x_given_s(std::size_t s) const;

  const TypicalityChecker& sx_v(int j) const { return j == 1 ? sxv1_ : sxv2_; }
  const TypicalityChecker& sx_v1_v2() const { return sxv12_; }

 private:
  BroadcastChannelSpec channel_;
  TypicalityParams tp_;
  JointPMF joint_;
  std::vector<double> p_v1_, p_v2_, p_x_;
  VKernel k1_, k2_;
  TypicalityChecker sxv1_, sxv2_, sxv12_;
};

struct RecoverResult {
  bool ok = false;
  std::uint32_t word1 = 0, word2 = 0;
  std::uint32_t k1 = 0, k2 = 0;
  std::size_t candidates = 0;  // capped at 2
};

/// Unique pair in bin psi1 x bin psi2 jointly typical with (s^n, x^n).
RecoverResult tx_recover(const FbModel& model, std::span<const Symbol> x_seq, std::span<const Symbol> s_seq,
                         std::uint32_t psi1, std::uint32_t psi2, const DoubleBinnedCodebook& cb1,
                         const DoubleBinnedCodebook& cb2);

SimulationReport run_fb(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme, const FbRates& rates,
                        TypicalityParams tp, const SimOptions& opts);

}  // namespace skagree
