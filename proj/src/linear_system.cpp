#include "skagree/linear_system.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace skagree {

namespace {

using boost::multiprecision::cpp_int;

bool all_zero(const std::vector<Rational>& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& r) { return r == 0; });
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void LinearInequalitySystem::add(std::vector<Rational> coeffs, Rational bound) {
  if (coeffs.size() != variables.size()) throw std::invalid_argument("inequality width differs from variable count");
  rows.push_back({std::move(coeffs), std::move(bound)});
}

std::size_t LinearInequalitySystem::index_of(const std::string& name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) throw std::invalid_argument("unknown system variable '" + name + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

bool LinearInequalitySystem::contains(std::span<const double> point, double tol) const {
  return DoubleSystem(*this).contains(point, tol);
}

DoubleSystem::DoubleSystem(const LinearInequalitySystem& sys)
    : width(sys.variables.size()), infeasible(sys.infeasible) {
  for (const auto& row : sys.rows) {
    for (const auto& c : row.coeffs) coeffs.push_back(to_double(c));
    bounds.push_back(to_double(row.bound));
  }
}

bool DoubleSystem::contains(std::span<const double> point, double tol) const {
  if (point.size() != width) throw std::invalid_argument("point dimension differs from system");
  if (infeasible) return false;
  for (std::size_t r = 0; r < bounds.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < width; ++i) lhs += coeffs[r * width + i] * point[i];
    if (lhs > bounds[r] + tol) return false;
  }
  return true;
}

Rational to_rational(double x, int digits) {
  if (!std::isfinite(x)) throw std::invalid_argument("to_rational: non-finite value");
  const double scaled = std::round(x * std::pow(10.0, digits));
  if (std::abs(scaled) > 9e18) throw std::invalid_argument("to_rational: value out of range");
  cpp_int den = 1;
  for (int i = 0; i < digits; ++i) den *= 10;
  return Rational(cpp_int(static_cast<long long>(scaled)), den);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string format_rational(const Rational& r) {
  cpp_int num = boost::multiprecision::numerator(r);
  cpp_int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  cpp_int d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return num.str() + "/" + den.str();
  const int digits = std::max(twos, fives);
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  cpp_int scaled = num * (scale / den);
  const bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string s = scaled.str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits - static_cast<int>(s.size()) + 1), '0');
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return neg ? "-" + s : s;
}

Rational parse_rational(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty rational");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    return Rational(cpp_int(trim(text.substr(0, slash))), cpp_int(trim(text.substr(slash + 1))));
  }
  bool neg = false;
  std::string t = text;
  if (t[0] == '-' || t[0] == '+') {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  const auto dot = t.find('.');
  cpp_int den = 1;
  std::string digits = t;
  if (dot != std::string::npos) {
    const std::string frac = t.substr(dot + 1);
    digits = t.substr(0, dot) + frac;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  }
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
  // cpp_int reads a leading 0 as an octal prefix.
  const auto nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  Rational r(cpp_int(digits), den);
  return neg ? Rational(-r) : r;
}

std::string to_text(const LinearInequalitySystem& sys) {
  std::ostringstream os;
  if (sys.infeasible) os << "# infeasible\n";
  for (const auto& row : sys.rows) {
    bool first = true;
    for (std::size_t i = 0; i < row.coeffs.size(); ++i) {
      Rational c = row.coeffs[i];
      if (first) {
        os << format_rational(c) << "*" << sys.variables[i];
        first = false;
      } else {
        os << (c < 0 ? " - " : " + ") << format_rational(c < 0 ? Rational(-c) : c) << "*" << sys.variables[i];
      }
    }
    if (first) os << "0";
    os << " <= " << format_rational(row.bound) << "\n";
  }
  return os.str();
}

LinearInequalitySystem parse_system(const std::string& text, const std::vector<std::string>& variables) {
  LinearInequalitySystem sys;
  sys.variables = variables;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line == "# infeasible") {
      sys.infeasible = true;
      continue;
    }
    const auto le = line.find("<=");
    if (le == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": missing '<='");
    std::vector<Rational> coeffs(variables.size(), Rational(0));
    std::string lhs = trim(line.substr(0, le));
    // Split into signed terms.
    std::vector<std::pair<bool, std::string>> terms;
    bool neg = false;
    std::string cur;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const char ch = lhs[i];
      const bool sep = (ch == '+' || ch == '-') && i > 0 && lhs[i - 1] == ' ';
      if (sep) {
        if (!trim(cur).empty()) terms.emplace_back(neg, trim(cur));
        neg = ch == '-';
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) terms.emplace_back(neg, trim(cur));
    for (const auto& [negative, term] : terms) {
      if (term == "0") continue;
      const auto star = term.find('*');
      if (star == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": bad term '" + term + "'");
      Rational c = parse_rational(term.substr(0, star));
      const std::string name = trim(term.substr(star + 1));
      auto it = std::find(variables.begin(), variables.end(), name);
      if (it == variables.end()) throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown variable '" + name + "'");
      coeffs[static_cast<std::size_t>(it - variables.begin())] += negative ? Rational(-c) : c;
    }
    sys.add(std::move(coeffs), parse_rational(line.substr(le + 2)));
  }
  return sys;
}

LinearInequalitySystem normalize(const LinearInequalitySystem& sys) {
  LinearInequalitySystem out;
  out.variables = sys.variables;
  out.infeasible = sys.infeasible;
  // Keyed by the scaled coefficient vector; value is the tightest bound.
  std::map<std::vector<Rational>, Rational> tightest;
  std::vector<std::vector<Rational>> order;
  for (const auto& row : sys.rows) {
    if (all_zero(row.coeffs)) {
      if (row.bound < 0) out.infeasible = true;
      continue;
    }
    Rational lead = 0;
    for (const auto& c : row.coeffs) {
      if (c != 0) {
        lead = c < 0 ? Rational(-c) : c;
        break;
      }
    }
    std::vector<Rational> scaled;
    scaled.reserve(row.coeffs.size());
    for (const auto& c : row.coeffs) scaled.push_back(c / lead);
    Rational b = row.bound / lead;
    auto it = tightest.find(scaled);
    if (it == tightest.end()) {
      order.push_back(scaled);
      tightest.emplace(std::move(scaled), std::move(b));
    } else if (b < it->second) {
      it->second = std::move(b);
    }
  }
  for (auto& coeffs : order) {
    Rational b = tightest.at(coeffs);
    out.rows.push_back({std::move(coeffs), std::move(b)});
  }
  return out;
}

LinearInequalitySystem fm_eliminate(const LinearInequalitySystem& sys, const std::vector<std::string>& drop) {
  for (const auto& d : drop) sys.index_of(d);
  LinearInequalitySystem cur = normalize(sys);

  for (const auto& name : drop) {
    const std::size_t k = cur.index_of(name);
    LinearInequalitySystem next;
    for (std::size_t i = 0; i < cur.variables.size(); ++i) {
      if (i != k) next.variables.push_back(cur.variables[i]);
    }
    next.infeasible = cur.infeasible;
    auto without_k = [&](const std::vector<Rational>& c) {
      std::vector<Rational> r;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i != k) r.push_back(c[i]);
      }
      return r;
    };
    std::vector<const Inequality*> pos, neg;
    for (const auto& row : cur.rows) {
      if (row.coeffs[k] > 0) pos.push_back(&row);
      else if (row.coeffs[k] < 0) neg.push_back(&row);
      else next.rows.push_back({without_k(row.coeffs), row.bound});
    }
    for (const auto* p : pos) {
      for (const auto* q : neg) {
        const Rational a = p->coeffs[k];
        const Rational b = -q->coeffs[k];
        std::vector<Rational> c(cur.variables.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = b * p->coeffs[i] + a * q->coeffs[i];
        next.rows.push_back({without_k(c), b * p->bound + a * q->bound});
      }
    }
    cur = normalize(next);
  }
  return cur;
}

}  // namespace skagree
