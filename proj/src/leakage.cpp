#include "skagree/leakage.hpp"

#include <cmath>

namespace skagree {

double JointCounter::mutual_information() const {
  std::map<std::uint64_t, double> pk;
  std::map<ObsKey, double> po;
  double total = 0.0;
  for (const auto& [cell, p] : cells_) {
    pk[cell.first] += p;
    po[cell.second] += p;
    total += p;
  }
  if (pk.size() <= 1 || po.size() <= 1) return 0.0;
  double mi = 0.0;
  for (const auto& [cell, p] : cells_) {
    mi += p * std::log2(p * total / (pk.at(cell.first) * po.at(cell.second)));
  }
  mi /= total;
  return mi < 0.0 && mi > -1e-12 ? 0.0 : mi;
}

double histogram_entropy(std::span<const std::uint64_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace skagree
