// Mutual information between a key and an observation from a sparse joint
// mass table, filled either exactly (by enumeration) or from samples.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace skagree {

using ObsKey = std::array<std::uint64_t, 3>;

class JointCounter {
 public:
  void add(std::uint64_t key, const ObsKey& obs, double mass) {
    if (mass > 0.0) cells_[{key, obs}] += mass;
  }
  std::size_t cells() const { return cells_.size(); }

  /// I(K; O) in bits, normalized by the accumulated total mass. A constant
  /// key or observation gives exactly 0.
  double mutual_information() const;

 private:
  std::map<std::pair<std::uint64_t, ObsKey>, double> cells_;
};

/// Plug-in entropy (bits) of a histogram given as raw counts.
double histogram_entropy(std::span<const std::uint64_t> counts);

}  // namespace skagree
