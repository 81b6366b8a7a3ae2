#include "skagree/typicality.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "skagree/prob.hpp"

namespace skagree {

void TypicalityParams::check() const {
  if (n < 1) throw std::invalid_argument("blocklength must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("typicality eps must lie in (0,1)");
  if (n > 64) throw std::invalid_argument("blocklength above 64 is not supported");
}

TypicalityChecker::TypicalityChecker(std::vector<std::size_t> cards, std::vector<double> p, TypicalityParams tp)
    : cards_(std::move(cards)), tp_(tp) {
  tp_.check();
  std::size_t total = 1;
  for (auto c : cards_) {
    if (c == 0 || c > 256) throw std::invalid_argument("typicality: alphabet size must be in [1,256]");
    total *= c;
  }
  if (p.size() != total) throw std::invalid_argument("typicality: pmf size differs from alphabet product");
  lo_.resize(total);
  hi_.resize(total);
  const double n = static_cast<double>(tp_.n);
  for (std::size_t i = 0; i < total; ++i) {
    if (p[i] <= 0.0) {
      lo_[i] = hi_[i] = 0;
      continue;
    }
    // |c/n - p| <= eps p, with a little room for rounding at the edges.
    const double lo = std::ceil(n * p[i] * (1.0 - tp_.eps) - 1e-9);
    const double hi = std::floor(n * p[i] * (1.0 + tp_.eps) + 1e-9);
    lo_[i] = static_cast<std::uint32_t>(std::max(0.0, lo));
    hi_[i] = static_cast<std::uint32_t>(std::max(0.0, hi));
  }
}

bool TypicalityChecker::typical_counts(std::span<const std::uint32_t> counts) const {
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (counts[i] < lo_[i] || counts[i] > hi_[i]) return false;
  }
  return true;
}

bool TypicalityChecker::typical(std::span<const std::span<const Symbol>> seqs) const {
  if (seqs.size() != cards_.size()) throw std::invalid_argument("typicality: wrong number of sequences");
  for (const auto& s : seqs) {
    if (s.size() != tp_.n) throw std::invalid_argument("typicality: sequence length differs from n");
  }
  // Small alphabets in practice; a stack buffer avoids allocation in hot loops.
  constexpr std::size_t kStack = 512;
  std::array<std::uint32_t, kStack> stack{};
  std::vector<std::uint32_t> heap;
  std::uint32_t* counts = stack.data();
  if (lo_.size() > kStack) {
    heap.assign(lo_.size(), 0);
    counts = heap.data();
  }
  for (std::size_t t = 0; t < tp_.n; ++t) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < seqs.size(); ++k) idx = idx * cards_[k] + seqs[k][t];
    if (++counts[idx] > hi_[idx]) return false;
  }
  return typical_counts({counts, lo_.size()});
}

bool TypicalityChecker::typical(std::span<const Symbol> a) const {
  const std::array<std::span<const Symbol>, 1> s = {a};
  return typical(std::span<const std::span<const Symbol>>(s));
}

bool TypicalityChecker::typical(std::span<const Symbol> a, std::span<const Symbol> b) const {
  const std::array<std::span<const Symbol>, 2> s = {a, b};
  return typical(std::span<const std::span<const Symbol>>(s));
}

bool TypicalityChecker::typical(std::span<const Symbol> a, std::span<const Symbol> b,
                                std::span<const Symbol> c) const {
  const std::array<std::span<const Symbol>, 3> s = {a, b, c};
  return typical(std::span<const std::span<const Symbol>>(s));
}

bool TypicalityChecker::typical(std::span<const Symbol> a, std::span<const Symbol> b, std::span<const Symbol> c,
                                std::span<const Symbol> d) const {
  const std::array<std::span<const Symbol>, 4> s = {a, b, c, d};
  return typical(std::span<const std::span<const Symbol>>(s));
}

std::vector<Symbol> enumerate_typical_set(std::span<const double> p, TypicalityParams tp) {
  tp.check();
  const std::size_t card = p.size();
  if (card == 0) throw std::invalid_argument("typical set: empty alphabet");
  double space = std::pow(static_cast<double>(card), static_cast<double>(tp.n));
  if (space > static_cast<double>(kMaxCells)) {
    throw std::length_error("typical set enumeration exceeds cap (" + std::to_string(kMaxCells) + " sequences)");
  }
  TypicalityChecker chk({card}, std::vector<double>(p.begin(), p.end()), tp);
  std::vector<Symbol> out;
  std::vector<Symbol> seq(tp.n, 0);
  const auto total = static_cast<std::size_t>(space);
  for (std::size_t i = 0; i < total; ++i) {
    if (chk.typical(seq)) out.insert(out.end(), seq.begin(), seq.end());
    // Odometer, last position fastest.
    for (std::size_t k = tp.n; k-- > 0;) {
      if (++seq[k] < card) break;
      seq[k] = 0;
    }
  }
  return out;
}

std::uint64_t sequence_index(std::span<const Symbol> seq, std::size_t card) {
  std::uint64_t idx = 0;
  for (Symbol s : seq) idx = idx * card + s;
  return idx;
}

}  // namespace skagree
