// The state-dependent three-receiver broadcast channel and the two
// designer-chosen input/auxiliary schemes.
#pragma once

#include <cstddef>
#include <string>

#include "skagree/prob.hpp"

namespace skagree {

namespace var {
inline const std::string S = "S";
inline const std::string X = "X";
inline const std::string Y1 = "Y1";
inline const std::string Y2 = "Y2";
inline const std::string Z = "Z";
inline const std::string U0 = "U0";
inline const std::string U1 = "U1";
inline const std::string U2 = "U2";
inline const std::string V1 = "V1";
inline const std::string V2 = "V2";
}  // namespace var

struct ChannelCards {
  std::size_t s = 1, x = 2, y1 = 2, y2 = 2, z = 2;
  friend bool operator==(const ChannelCards&, const ChannelCards&) = default;
};

/// p(S) and p(Y1,Y2,Z | X,S). The transition is indexed [x][s] -> (y1,y2,z).
class BroadcastChannelSpec {
 public:
  BroadcastChannelSpec(JointPMF state, ConditionalPMF transition);

  const JointPMF& state() const { return state_; }
  const ConditionalPMF& transition() const { return transition_; }
  const ChannelCards& cards() const { return cards_; }

  /// p(y1,y2,z | x,s) by symbol.
  double prob(std::size_t x, std::size_t s, std::size_t y1, std::size_t y2, std::size_t z) const;

 private:
  JointPMF state_;
  ConditionalPMF transition_;
  ChannelCards cards_;
};

/// Builds a channel from a p(S) vector and a [x][s][y1][y2][z] table.
BroadcastChannelSpec make_channel(const ChannelCards& cards, std::vector<double> state_pmf,
                                  std::vector<double> transition);

struct AuxCards {
  std::size_t u0 = 3, u1 = 3, u2 = 3;
  friend bool operator==(const AuxCards&, const AuxCards&) = default;
};

/// Default auxiliary cardinality: |X| + 1.
AuxCards default_aux_cards(const ChannelCards& c);

/// p(U0|S) p(U1|S,U0) p(U2|S,U0) p(X|S,U0,U1,U2).
struct AuxScheme {
  ConditionalPMF u0_given_s;
  ConditionalPMF u1_given_u0_s;
  ConditionalPMF u2_given_u0_s;
  ConditionalPMF x_given_all;

  AuxCards cards() const;
};

/// p(X|S) p(V1|Y1) p(V2|Y2).
struct FeedbackScheme {
  ConditionalPMF x_given_s;
  ConditionalPMF v1_given_y1;
  ConditionalPMF v2_given_y2;

  std::size_t card_v1() const { return v1_given_y1.target().front().card; }
  std::size_t card_v2() const { return v2_given_y2.target().front().card; }
};

/// Tables in the natural layouts: u0[s][u0], u1[s][u0][u1], u2[s][u0][u2],
/// x[s][u0][u1][u2][x]. Throws std::invalid_argument on shape mismatch.
AuxScheme make_aux_scheme(const ChannelCards& ch, const AuxCards& aux, std::vector<double> u0_given_s,
                          std::vector<double> u1_given_u0_s, std::vector<double> u2_given_u0_s,
                          std::vector<double> x_given_all);

/// Tables: x[s][x], v1[y1][v1], v2[y2][v2].
FeedbackScheme make_feedback_scheme(const ChannelCards& ch, std::size_t card_v1, std::size_t card_v2,
                                    std::vector<double> x_given_s, std::vector<double> v1_given_y1,
                                    std::vector<double> v2_given_y2);

/// Joint over (S,U0,U1,U2,X,Y1,Y2,Z), in that order.
JointPMF build_joint_nofb(const BroadcastChannelSpec& channel, const AuxScheme& scheme);

/// Joint over (S,X,Y1,Y2,Z,V1,V2), in that order.
JointPMF build_joint_fb(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme);

/// Joint over (S,X,Y1,Y2,Z) for a given p(X|S).
JointPMF build_joint_input(const BroadcastChannelSpec& channel, const ConditionalPMF& x_given_s);

/// p(X|S) induced by an auxiliary scheme.
ConditionalPMF induced_input(const BroadcastChannelSpec& channel, const AuxScheme& scheme);

enum class WiretapMode { nofb, fb_keep_rx1, fb_keep_rx2 };

WiretapMode parse_wiretap_mode(const std::string& s);
std::string to_string(WiretapMode m);

/// nofb: requires identical Y1 and Y2 kernels (1e-12) and returns a channel
/// whose Y2 is a copy of Y1. fb modes collapse the dropped receiver's output
/// to a singleton alphabet.
BroadcastChannelSpec reduce_to_wiretap(const BroadcastChannelSpec& channel, WiretapMode mode);

}  // namespace skagree
