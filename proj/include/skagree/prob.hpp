// Exact finite-alphabet distributions over named variables.
//
// All information measures are in bits. Tables are dense and row-major:
// the first variable of a distribution is the most significant index.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace skagree {

/// Largest dense table we are willing to allocate.
inline constexpr std::size_t kMaxCells = 10'000'000;

/// Tolerance used when checking that a table is normalized.
inline constexpr double kNormTolerance = 1e-12;

struct Variable {
  std::string name;
  std::size_t card = 1;

  friend bool operator==(const Variable&, const Variable&) = default;
};

using VarNames = std::vector<std::string>;

std::size_t product_of_cards(std::span<const Variable> vars);

class JointPMF {
 public:
  JointPMF() = default;
  /// Throws std::invalid_argument on duplicate names, zero cardinality,
  /// a table whose size differs from the alphabet product, or a table
  /// larger than kMaxCells. Mass values are not checked here; see validate().
  JointPMF(std::vector<Variable> vars, std::vector<double> mass);

  const std::vector<Variable>& variables() const { return vars_; }
  std::span<const double> mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Position of a variable; throws std::invalid_argument if unknown.
  std::size_t position(std::string_view name) const;
  const Variable& variable(std::string_view name) const { return vars_[position(name)]; }

  std::vector<std::size_t> strides() const;
  double at(std::span<const std::size_t> index) const;

 private:
  std::vector<Variable> vars_;
  std::vector<double> mass_;
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate(const JointPMF& pmf);

/// p(target | given). The table is laid out given-major:
/// table[g * target_cells + t].
class ConditionalPMF {
 public:
  ConditionalPMF() = default;
  /// Rows must sum to one within `tol` (they are then renormalized) or be
  /// identically zero, in which case the row is marked unconstrained.
  ConditionalPMF(std::vector<Variable> target, std::vector<Variable> given,
                 std::vector<double> table, double tol = 1e-9);

  const std::vector<Variable>& target() const { return target_; }
  const std::vector<Variable>& given() const { return given_; }
  std::size_t target_cells() const { return target_cells_; }
  std::size_t given_cells() const { return given_cells_; }

  std::span<const double> row(std::size_t given_index) const {
    return {table_.data() + given_index * target_cells_, target_cells_};
  }
  double prob(std::size_t given_index, std::size_t target_index) const {
    return table_[given_index * target_cells_ + target_index];
  }
  bool constrained(std::size_t given_index) const { return constrained_[given_index] != 0; }
  std::span<const double> table() const { return table_; }

 private:
  std::vector<Variable> target_;
  std::vector<Variable> given_;
  std::size_t target_cells_ = 1;
  std::size_t given_cells_ = 1;
  std::vector<double> table_;
  std::vector<std::uint8_t> constrained_;
};

/// Sums out every variable not in `keep`. The result keeps the variable
/// order of `pmf`.
JointPMF marginalize(const JointPMF& pmf, const VarNames& keep);

/// Reorders (and restricts to) `order`, summing out everything else.
JointPMF marginal_in_order(const JointPMF& pmf, const VarNames& order);

ConditionalPMF condition(const JointPMF& pmf, const VarNames& target, const VarNames& given);

/// Chain-rule product root * factors[0] * factors[1] * ... . Each factor's
/// given variables must already be present; its targets must be new.
JointPMF compose(std::span<const ConditionalPMF> factors, const JointPMF& root);

/// H(vars | given) in bits.
double entropy(const JointPMF& pmf, const VarNames& vars, const VarNames& given = {});

/// I(a; b | given) = H(a|given) - H(a|b,given), in bits.
double mutual_information(const JointPMF& pmf, const VarNames& a, const VarNames& b,
                          const VarNames& given = {});

/// -sum p log2 p over a probability vector, with 0 log 0 = 0.
double entropy_bits(std::span<const double> probs);

/// Memoizes joint entropies of variable subsets of one distribution.
/// Subsets are bitmasks over the distribution's variable positions.
class EntropyCache {
 public:
  explicit EntropyCache(const JointPMF& pmf);

  std::uint32_t mask(const VarNames& names) const;
  double joint(std::uint32_t mask);
  double cond(std::uint32_t vars, std::uint32_t given) { return joint(vars | given) - joint(given); }
  double mi(std::uint32_t a, std::uint32_t b, std::uint32_t given = 0) {
    return joint(a | given) + joint(b | given) - joint(given) - joint(a | b | given);
  }

  double H(const VarNames& vars, const VarNames& given = {}) { return cond(mask(vars), mask(given)); }
  double I(const VarNames& a, const VarNames& b, const VarNames& given = {}) {
    return mi(mask(a), mask(b), mask(given));
  }

 private:
  const JointPMF* pmf_;
  std::unordered_map<std::uint32_t, double> memo_;
};

}  // namespace skagree
