// Small hand-built channels and schemes shared by the tests.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "skagree/channel.hpp"

namespace fixtures {

using skagree::ChannelCards;

/// Transition table [x][s][y1][y2][z] from a cell function.
inline std::vector<double> table(const ChannelCards& c,
                                 const std::function<double(std::size_t, std::size_t, std::size_t, std::size_t,
                                                            std::size_t)>& f) {
  std::vector<double> t;
  for (std::size_t x = 0; x < c.x; ++x)
    for (std::size_t s = 0; s < c.s; ++s)
      for (std::size_t y1 = 0; y1 < c.y1; ++y1)
        for (std::size_t y2 = 0; y2 < c.y2; ++y2)
          for (std::size_t z = 0; z < c.z; ++z) t.push_back(f(x, s, y1, y2, z));
  return t;
}

/// |S| = 1, Y1 = Y2 = X, Z constant.
inline skagree::BroadcastChannelSpec noiseless() {
  ChannelCards c{1, 2, 2, 2, 1};
  return skagree::make_channel(c, {1.0}, table(c, [](auto x, auto, auto y1, auto y2, auto) {
                                 return double(y1 == x && y2 == x);
                               }));
}

/// |S| = 1, Y1 = Y2 = Z = X.
inline skagree::BroadcastChannelSpec all_see() {
  ChannelCards c{1, 2, 2, 2, 2};
  return skagree::make_channel(c, {1.0}, table(c, [](auto x, auto, auto y1, auto y2, auto z) {
                                 return double(y1 == x && y2 == x && z == x);
                               }));
}

/// |S| = 1, Y1 = X, Y2 and Z constant.
inline skagree::BroadcastChannelSpec single_receiver() {
  ChannelCards c{1, 2, 2, 1, 1};
  return skagree::make_channel(c, {1.0}, table(c, [](auto x, auto, auto y1, auto, auto) { return double(y1 == x); }));
}

/// |S| = 1, Y1 = X through BSC(p), Y2 and Z constant.
inline skagree::BroadcastChannelSpec bsc_single(double p) {
  ChannelCards c{1, 2, 2, 1, 1};
  return skagree::make_channel(c, {1.0}, table(c, [p](auto x, auto, auto y1, auto, auto) {
                                 return y1 == x ? 1.0 - p : p;
                               }));
}

/// U0 = X uniform, U1 and U2 singletons.
inline skagree::AuxScheme u0_is_x(const ChannelCards& c) {
  std::vector<double> u0(c.s * 2, 0.5), x;
  for (std::size_t s = 0; s < c.s; ++s)
    for (std::size_t u = 0; u < 2; ++u)
      for (std::size_t k = 0; k < 2; ++k) x.push_back(double(u == k));
  return skagree::make_aux_scheme(c, {2, 1, 1}, u0, std::vector<double>(c.s * 2, 1.0),
                                  std::vector<double>(c.s * 2, 1.0), x);
}

/// x uniform, V1 = Y1 (binary), V2 constant.
inline skagree::FeedbackScheme v1_is_y1(const ChannelCards& c) {
  std::vector<double> v2(c.y2, 1.0);
  return skagree::make_feedback_scheme(c, 2, 1, std::vector<double>(c.s * c.x, 1.0 / double(c.x)),
                                       {1.0, 0.0, 0.0, 1.0}, v2);
}

}  // namespace fixtures
