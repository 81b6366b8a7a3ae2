// Exact rational linear inequality systems and Fourier-Motzkin projection.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <string>
#include <vector>

namespace skagree {

using Rational = boost::multiprecision::cpp_rational;

/// coeffs . vars <= bound
struct Inequality {
  std::vector<Rational> coeffs;
  Rational bound;

  friend bool operator==(const Inequality&, const Inequality&) = default;
};

struct LinearInequalitySystem {
  std::vector<std::string> variables;
  std::vector<Inequality> rows;
  /// Set when elimination produced 0 <= negative constant.
  bool infeasible = false;

  void add(std::vector<Rational> coeffs, Rational bound);
  /// Membership of a real point, allowing each row a violation of `tol`.
  bool contains(std::span<const double> point, double tol) const;
  std::size_t index_of(const std::string& name) const;
};

/// The same system with every number converted to double, for fast
/// repeated membership tests.
struct DoubleSystem {
  std::size_t width = 0;
  bool infeasible = false;
  std::vector<double> coeffs;  // row-major
  std::vector<double> bounds;

  explicit DoubleSystem(const LinearInequalitySystem& sys);
  bool contains(std::span<const double> point, double tol) const;
};

/// Rounds to the nearest rational with denominator 10^digits.
Rational to_rational(double x, int digits = 12);
double to_double(const Rational& r);

/// Decimal text when the denominator has only factors 2 and 5, p/q otherwise.
std::string format_rational(const Rational& r);
Rational parse_rational(const std::string& text);

/// One inequality per line: `c1*R1 + c2*R2 + ... <= b`.
std::string to_text(const LinearInequalitySystem& sys);
/// Inverse of to_text for the given variable order. A line reading
/// `0 <= -1` style infeasibility is not representable; `infeasible` lines
/// are written as `# infeasible`.
LinearInequalitySystem parse_system(const std::string& text, const std::vector<std::string>& variables);

/// Removes trivially true rows and exact duplicates, scales every row so its
/// first nonzero coefficient has magnitude one, and keeps only the tightest
/// bound among rows with identical coefficient vectors.
LinearInequalitySystem normalize(const LinearInequalitySystem& sys);

/// Exact projection eliminating `drop` one variable at a time. The result is
/// over the remaining variables, in their original order.
LinearInequalitySystem fm_eliminate(const LinearInequalitySystem& sys, const std::vector<std::string>& drop);

}  // namespace skagree
