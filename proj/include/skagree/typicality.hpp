// Robust joint typicality for short sequences over small alphabets.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace skagree {

using Symbol = std::uint8_t;

struct TypicalityParams {
  std::size_t n = 8;
  double eps = 0.2;

  /// Throws std::invalid_argument unless n >= 1 and 0 < eps < 1.
  void check() const;
};

/// Tests whether a tuple of aligned sequences is robustly typical for a
/// joint pmf: every tuple's empirical frequency is within eps * p of p, and
/// zero-probability tuples never occur. Joint typicality implies typicality of
/// every sub-tuple, which the searches below rely on for pruning.
class TypicalityChecker {
 public:
  TypicalityChecker() = default;
  /// `p` is row-major over `cards`, first component most significant.
  TypicalityChecker(std::vector<std::size_t> cards, std::vector<double> p, TypicalityParams tp);

  const std::vector<std::size_t>& cards() const { return cards_; }
  std::size_t cells() const { return lo_.size(); }
  const TypicalityParams& params() const { return tp_; }

  /// One sequence per component, each of length n.
  bool typical(std::span<const std::span<const Symbol>> seqs) const;
  bool typical(std::span<const Symbol> a) const;
  bool typical(std::span<const Symbol> a, std::span<const Symbol> b) const;
  bool typical(std::span<const Symbol> a, std::span<const Symbol> b, std::span<const Symbol> c) const;
  bool typical(std::span<const Symbol> a, std::span<const Symbol> b, std::span<const Symbol> c,
               std::span<const Symbol> d) const;

  /// Checks a histogram over the flattened tuple space.
  bool typical_counts(std::span<const std::uint32_t> counts) const;

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::uint32_t> lo_, hi_;
  TypicalityParams tp_;
};

/// All typical sequences of a single-variable pmf, in lexicographic order,
/// flattened (word i occupies [i*n, (i+1)*n)). Throws std::length_error when
/// |alphabet|^n exceeds the enumeration cap.
std::vector<Symbol> enumerate_typical_set(std::span<const double> p, TypicalityParams tp);

/// Lexicographic rank of a sequence in the full product space.
std::uint64_t sequence_index(std::span<const Symbol> seq, std::size_t card);

}  // namespace skagree
