#include "skagree/channel.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skagree {

namespace {

Variable v(const std::string& name, std::size_t card) { return Variable{name, card}; }

}  // namespace

BroadcastChannelSpec::BroadcastChannelSpec(JointPMF state, ConditionalPMF transition)
    : state_(std::move(state)), transition_(std::move(transition)) {
  if (state_.variables().size() != 1 || state_.variables()[0].name != var::S) {
    throw std::invalid_argument("channel state distribution must be over S alone");
  }
  if (auto r = validate(state_); !r.ok()) throw std::invalid_argument("state pmf: " + r.violations.front());

  const auto& t = transition_.target();
  const auto& g = transition_.given();
  if (t.size() != 3 || t[0].name != var::Y1 || t[1].name != var::Y2 || t[2].name != var::Z) {
    throw std::invalid_argument("channel transition targets must be (Y1,Y2,Z)");
  }
  if (g.size() != 2 || g[0].name != var::X || g[1].name != var::S) {
    throw std::invalid_argument("channel transition must be conditioned on (X,S)");
  }
  cards_ = {state_.variables()[0].card, g[0].card, t[0].card, t[1].card, t[2].card};
  if (g[1].card != cards_.s) throw std::invalid_argument("channel: |S| differs between state and transition");
  for (std::size_t i = 0; i < transition_.given_cells(); ++i) {
    if (!transition_.constrained(i)) {
      throw std::invalid_argument("channel transition row " + std::to_string(i) + " is empty");
    }
  }
}

double BroadcastChannelSpec::prob(std::size_t x, std::size_t s, std::size_t y1, std::size_t y2,
                                  std::size_t z) const {
  return transition_.prob(x * cards_.s + s, (y1 * cards_.y2 + y2) * cards_.z + z);
}

BroadcastChannelSpec make_channel(const ChannelCards& c, std::vector<double> state_pmf,
                                  std::vector<double> transition) {
  double total = 0.0;
  for (double p : state_pmf) total += p;
  if (std::abs(total - 1.0) <= 1e-9 && total != 1.0) {
    for (double& p : state_pmf) p /= total;
  }
  JointPMF state({v(var::S, c.s)}, std::move(state_pmf));
  ConditionalPMF kernel({v(var::Y1, c.y1), v(var::Y2, c.y2), v(var::Z, c.z)}, {v(var::X, c.x), v(var::S, c.s)},
                        std::move(transition));
  return BroadcastChannelSpec(std::move(state), std::move(kernel));
}

AuxCards default_aux_cards(const ChannelCards& c) { return {c.x + 1, c.x + 1, c.x + 1}; }

AuxCards AuxScheme::cards() const {
  return {u0_given_s.target().front().card, u1_given_u0_s.target().front().card,
          u2_given_u0_s.target().front().card};
}

AuxScheme make_aux_scheme(const ChannelCards& ch, const AuxCards& a, std::vector<double> u0, std::vector<double> u1,
                          std::vector<double> u2, std::vector<double> x) {
  return AuxScheme{
      ConditionalPMF({v(var::U0, a.u0)}, {v(var::S, ch.s)}, std::move(u0)),
      ConditionalPMF({v(var::U1, a.u1)}, {v(var::S, ch.s), v(var::U0, a.u0)}, std::move(u1)),
      ConditionalPMF({v(var::U2, a.u2)}, {v(var::S, ch.s), v(var::U0, a.u0)}, std::move(u2)),
      ConditionalPMF({v(var::X, ch.x)},
                     {v(var::S, ch.s), v(var::U0, a.u0), v(var::U1, a.u1), v(var::U2, a.u2)}, std::move(x)),
  };
}

FeedbackScheme make_feedback_scheme(const ChannelCards& ch, std::size_t card_v1, std::size_t card_v2,
                                    std::vector<double> x_given_s, std::vector<double> v1_given_y1,
                                    std::vector<double> v2_given_y2) {
  return FeedbackScheme{
      ConditionalPMF({v(var::X, ch.x)}, {v(var::S, ch.s)}, std::move(x_given_s)),
      ConditionalPMF({v(var::V1, card_v1)}, {v(var::Y1, ch.y1)}, std::move(v1_given_y1)),
      ConditionalPMF({v(var::V2, card_v2)}, {v(var::Y2, ch.y2)}, std::move(v2_given_y2)),
  };
}

JointPMF build_joint_nofb(const BroadcastChannelSpec& channel, const AuxScheme& scheme) {
  const std::array<ConditionalPMF, 5> chain = {scheme.u0_given_s, scheme.u1_given_u0_s, scheme.u2_given_u0_s,
                                               scheme.x_given_all, channel.transition()};
  return compose(chain, channel.state());
}

JointPMF build_joint_fb(const BroadcastChannelSpec& channel, const FeedbackScheme& scheme) {
  const std::array<ConditionalPMF, 4> chain = {scheme.x_given_s, channel.transition(), scheme.v1_given_y1,
                                               scheme.v2_given_y2};
  return compose(chain, channel.state());
}

JointPMF build_joint_input(const BroadcastChannelSpec& channel, const ConditionalPMF& x_given_s) {
  const std::array<ConditionalPMF, 2> chain = {x_given_s, channel.transition()};
  return compose(chain, channel.state());
}

ConditionalPMF induced_input(const BroadcastChannelSpec& channel, const AuxScheme& scheme) {
  const std::array<ConditionalPMF, 4> chain = {scheme.u0_given_s, scheme.u1_given_u0_s, scheme.u2_given_u0_s,
                                               scheme.x_given_all};
  const JointPMF joint = compose(chain, channel.state());
  auto cond = condition(joint, {var::X}, {var::S});
  // States with zero probability still need a valid input row.
  std::vector<double> table(cond.table().begin(), cond.table().end());
  const std::size_t nx = channel.cards().x;
  for (std::size_t s = 0; s < cond.given_cells(); ++s) {
    if (!cond.constrained(s)) {
      for (std::size_t x = 0; x < nx; ++x) table[s * nx + x] = 1.0 / static_cast<double>(nx);
    }
  }
  return ConditionalPMF(cond.target(), cond.given(), std::move(table));
}

WiretapMode parse_wiretap_mode(const std::string& s) {
  if (s == "nofb") return WiretapMode::nofb;
  if (s == "fb_keep_rx1") return WiretapMode::fb_keep_rx1;
  if (s == "fb_keep_rx2") return WiretapMode::fb_keep_rx2;
  throw std::invalid_argument("unknown wiretap mode '" + s + "' (expected nofb, fb_keep_rx1, fb_keep_rx2)");
}

std::string to_string(WiretapMode m) {
  switch (m) {
    case WiretapMode::nofb: return "nofb";
    case WiretapMode::fb_keep_rx1: return "fb_keep_rx1";
    case WiretapMode::fb_keep_rx2: return "fb_keep_rx2";
  }
  return "?";
}

BroadcastChannelSpec reduce_to_wiretap(const BroadcastChannelSpec& channel, WiretapMode mode) {
  const auto& c = channel.cards();
  std::vector<double> state(channel.state().mass().begin(), channel.state().mass().end());

  if (mode == WiretapMode::nofb) {
    if (c.y1 != c.y2) throw std::invalid_argument("kernels differ: |Y1| != |Y2|");
    // p(y,z|x,s) from the Y1 marginal, checked against the Y2 marginal.
    std::vector<double> merged(c.x * c.s * c.y1 * c.y1 * c.z, 0.0);
    for (std::size_t x = 0; x < c.x; ++x) {
      for (std::size_t s = 0; s < c.s; ++s) {
        for (std::size_t y = 0; y < c.y1; ++y) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t o = 0; o < c.y2; ++o) {
            for (std::size_t z = 0; z < c.z; ++z) {
              m1 += channel.prob(x, s, y, o, z);
              m2 += channel.prob(x, s, o, y, z);
            }
          }
          if (std::abs(m1 - m2) > 1e-12) {
            std::ostringstream os;
            os << "kernels differ: p(Y1=" << y << "|x=" << x << ",s=" << s << ")=" << m1 << " but p(Y2=" << y
               << "|...)=" << m2;
            throw std::invalid_argument(os.str());
          }
          for (std::size_t z = 0; z < c.z; ++z) {
            double p = 0.0;
            for (std::size_t o = 0; o < c.y2; ++o) p += channel.prob(x, s, y, o, z);
            merged[(((x * c.s + s) * c.y1 + y) * c.y1 + y) * c.z + z] = p;
          }
        }
      }
    }
    return make_channel(c, std::move(state), std::move(merged));
  }

  ChannelCards out = c;
  const bool keep1 = mode == WiretapMode::fb_keep_rx1;
  if (keep1) out.y2 = 1;
  else out.y1 = 1;
  std::vector<double> table(out.x * out.s * out.y1 * out.y2 * out.z, 0.0);
  for (std::size_t x = 0; x < c.x; ++x) {
    for (std::size_t s = 0; s < c.s; ++s) {
      for (std::size_t y1 = 0; y1 < c.y1; ++y1) {
        for (std::size_t y2 = 0; y2 < c.y2; ++y2) {
          for (std::size_t z = 0; z < c.z; ++z) {
            const std::size_t a = keep1 ? y1 : 0;
            const std::size_t b = keep1 ? 0 : y2;
            table[(((x * out.s + s) * out.y1 + a) * out.y2 + b) * out.z + z] += channel.prob(x, s, y1, y2, z);
          }
        }
      }
    }
  }
  return make_channel(out, std::move(state), std::move(table));
}

}  // namespace skagree
