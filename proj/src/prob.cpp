#include "skagree/prob.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace skagree {

namespace {

void check_disjoint(const VarNames& a, const VarNames& b, const char* what) {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) {
      throw std::invalid_argument(std::string(what) + ": variable '" + x + "' appears in both sets");
    }
  }
}

// Sums `mass` (laid out over `cards`) onto the positions with nonzero
// marginal stride. Row-major odometer walk, no per-cell division.
std::vector<double> sum_onto(std::span<const double> mass, std::span<const std::size_t> cards,
                             std::span<const std::size_t> mstride, std::size_t msize) {
  std::vector<double> out(msize, 0.0);
  const std::size_t k = cards.size();
  std::vector<std::size_t> digit(k, 0);
  std::size_t mi = 0;
  for (std::size_t c = 0; c < mass.size(); ++c) {
    out[mi] += mass[c];
    for (std::size_t p = k; p-- > 0;) {
      ++digit[p];
      mi += mstride[p];
      if (digit[p] < cards[p]) break;
      mi -= mstride[p] * cards[p];
      digit[p] = 0;
    }
  }
  return out;
}

}  // namespace

std::size_t product_of_cards(std::span<const Variable> vars) {
  std::size_t n = 1;
  for (const auto& v : vars) {
    if (v.card == 0) throw std::invalid_argument("variable '" + v.name + "' has cardinality 0");
    if (n > kMaxCells / v.card) throw std::invalid_argument("alphabet product exceeds dense table cap");
    n *= v.card;
  }
  return n;
}

JointPMF::JointPMF(std::vector<Variable> vars, std::vector<double> mass)
    : vars_(std::move(vars)), mass_(std::move(mass)) {
  std::unordered_set<std::string> seen;
  for (const auto& v : vars_) {
    if (!seen.insert(v.name).second) throw std::invalid_argument("duplicate variable '" + v.name + "'");
  }
  const std::size_t cells = product_of_cards(vars_);
  if (cells != mass_.size()) {
    std::ostringstream os;
    os << "shape mismatch: table has " << mass_.size() << " cells, alphabets need " << cells;
    throw std::invalid_argument(os.str());
  }
}

std::optional<std::size_t> JointPMF::find(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t JointPMF::position(std::string_view name) const {
  if (auto p = find(name)) return *p;
  throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
}

std::vector<std::size_t> JointPMF::strides() const {
  std::vector<std::size_t> s(vars_.size(), 1);
  for (std::size_t p = vars_.size(); p-- > 1;) s[p - 1] = s[p] * vars_[p].card;
  return s;
}

double JointPMF::at(std::span<const std::size_t> index) const {
  if (index.size() != vars_.size()) throw std::invalid_argument("index rank mismatch");
  const auto s = strides();
  std::size_t flat = 0;
  for (std::size_t p = 0; p < index.size(); ++p) {
    if (index[p] >= vars_[p].card) throw std::out_of_range("index out of range");
    flat += index[p] * s[p];
  }
  return mass_[flat];
}

ValidationResult validate(const JointPMF& pmf) {
  ValidationResult r;
  double sum = 0.0;
  bool negative = false;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double m = pmf.mass()[i];
    if (!std::isfinite(m)) {
      r.violations.push_back("non-finite mass at cell " + std::to_string(i));
      continue;
    }
    if (m < 0.0 && !negative) {
      negative = true;
      r.violations.push_back("negative mass at cell " + std::to_string(i));
    }
    sum += m;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "mass sum " << sum << " ≠ 1";
    r.violations.push_back(os.str());
  }
  return r;
}

ConditionalPMF::ConditionalPMF(std::vector<Variable> target, std::vector<Variable> given,
                               std::vector<double> table, double tol)
    : target_(std::move(target)), given_(std::move(given)), table_(std::move(table)) {
  if (target_.empty()) throw std::invalid_argument("conditional distribution needs a target");
  std::unordered_set<std::string> seen;
  for (const auto& v : target_) {
    if (!seen.insert(v.name).second) throw std::invalid_argument("duplicate variable '" + v.name + "'");
  }
  for (const auto& v : given_) {
    if (!seen.insert(v.name).second) throw std::invalid_argument("variable '" + v.name + "' is both target and given");
  }
  target_cells_ = product_of_cards(target_);
  given_cells_ = product_of_cards(given_);
  if (table_.size() != target_cells_ * given_cells_) {
    throw std::invalid_argument("conditional table shape mismatch");
  }
  constrained_.assign(given_cells_, 1);
  for (std::size_t g = 0; g < given_cells_; ++g) {
    double sum = 0.0;
    for (std::size_t t = 0; t < target_cells_; ++t) {
      const double p = table_[g * target_cells_ + t];
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("conditional row " + std::to_string(g) + " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (sum == 0.0) {
      constrained_[g] = 0;
      continue;
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "conditional row " << g << " sums to " << sum;
      throw std::invalid_argument(os.str());
    }
    for (std::size_t t = 0; t < target_cells_; ++t) table_[g * target_cells_ + t] /= sum;
  }
}

JointPMF marginal_in_order(const JointPMF& pmf, const VarNames& order) {
  const auto& vars = pmf.variables();
  std::vector<std::size_t> cards(vars.size());
  for (std::size_t p = 0; p < vars.size(); ++p) cards[p] = vars[p].card;

  std::vector<Variable> out_vars;
  std::vector<std::size_t> mstride(vars.size(), 0);
  std::unordered_set<std::string> seen;
  for (const auto& name : order) {
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate variable '" + name + "'");
    out_vars.push_back(vars[pmf.position(name)]);
  }
  std::size_t stride = 1;
  for (std::size_t i = out_vars.size(); i-- > 0;) {
    mstride[pmf.position(out_vars[i].name)] = stride;
    stride *= out_vars[i].card;
  }
  auto mass = sum_onto(pmf.mass(), cards, mstride, stride);
  return JointPMF(std::move(out_vars), std::move(mass));
}

JointPMF marginalize(const JointPMF& pmf, const VarNames& keep) {
  for (const auto& k : keep) pmf.position(k);
  VarNames order;
  for (const auto& v : pmf.variables()) {
    if (std::find(keep.begin(), keep.end(), v.name) != keep.end()) order.push_back(v.name);
  }
  return marginal_in_order(pmf, order);
}

ConditionalPMF condition(const JointPMF& pmf, const VarNames& target, const VarNames& given) {
  check_disjoint(target, given, "condition");
  if (target.empty()) throw std::invalid_argument("condition: empty target set");
  VarNames order = given;
  order.insert(order.end(), target.begin(), target.end());
  const JointPMF m = marginal_in_order(pmf, order);

  std::vector<Variable> gv(m.variables().begin(), m.variables().begin() + static_cast<std::ptrdiff_t>(given.size()));
  std::vector<Variable> tv(m.variables().begin() + static_cast<std::ptrdiff_t>(given.size()), m.variables().end());
  const std::size_t tc = product_of_cards(tv);
  const std::size_t gc = product_of_cards(gv);
  std::vector<double> table(m.mass().begin(), m.mass().end());
  for (std::size_t g = 0; g < gc; ++g) {
    double sum = 0.0;
    for (std::size_t t = 0; t < tc; ++t) sum += table[g * tc + t];
    for (std::size_t t = 0; t < tc; ++t) table[g * tc + t] = sum > 0.0 ? table[g * tc + t] / sum : 0.0;
  }
  return ConditionalPMF(std::move(tv), std::move(gv), std::move(table), 1e-9);
}

JointPMF compose(std::span<const ConditionalPMF> factors, const JointPMF& root) {
  std::vector<Variable> vars = root.variables();
  std::vector<double> mass(root.mass().begin(), root.mass().end());

  for (const auto& f : factors) {
    std::unordered_set<std::string> present;
    for (const auto& v : vars) present.insert(v.name);
    for (const auto& t : f.target()) {
      if (present.count(t.name)) throw std::invalid_argument("compose: duplicate target '" + t.name + "'");
    }

    // Stride of each current position within the factor's given index.
    std::vector<std::size_t> gstride(vars.size(), 0);
    std::size_t stride = 1;
    for (std::size_t i = f.given().size(); i-- > 0;) {
      const auto& g = f.given()[i];
      auto it = std::find_if(vars.begin(), vars.end(), [&](const Variable& v) { return v.name == g.name; });
      if (it == vars.end()) throw std::invalid_argument("compose: dangling conditioning variable '" + g.name + "'");
      if (it->card != g.card) throw std::invalid_argument("compose: cardinality mismatch for '" + g.name + "'");
      gstride[static_cast<std::size_t>(it - vars.begin())] = stride;
      stride *= g.card;
    }

    std::vector<std::size_t> cards(vars.size());
    for (std::size_t p = 0; p < vars.size(); ++p) cards[p] = vars[p].card;
    const std::size_t tc = f.target_cells();
    if (mass.size() > kMaxCells / tc) throw std::invalid_argument("compose: joint exceeds dense table cap");

    std::vector<double> next(mass.size() * tc, 0.0);
    std::vector<std::size_t> digit(vars.size(), 0);
    std::size_t gi = 0;
    for (std::size_t c = 0; c < mass.size(); ++c) {
      const double m = mass[c];
      if (m != 0.0) {
        auto row = f.row(gi);
        for (std::size_t t = 0; t < tc; ++t) next[c * tc + t] = m * row[t];
      }
      for (std::size_t p = vars.size(); p-- > 0;) {
        ++digit[p];
        gi += gstride[p];
        if (digit[p] < cards[p]) break;
        gi -= gstride[p] * cards[p];
        digit[p] = 0;
      }
    }
    vars.insert(vars.end(), f.target().begin(), f.target().end());
    mass = std::move(next);
  }
  return JointPMF(std::move(vars), std::move(mass));
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double entropy(const JointPMF& pmf, const VarNames& vars, const VarNames& given) {
  if (vars.empty()) throw std::invalid_argument("entropy: empty variable set");
  check_disjoint(vars, given, "entropy");
  EntropyCache cache(pmf);
  return cache.H(vars, given);
}

double mutual_information(const JointPMF& pmf, const VarNames& a, const VarNames& b, const VarNames& given) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mutual_information: empty argument set");
  check_disjoint(a, b, "mutual_information");
  check_disjoint(a, given, "mutual_information");
  check_disjoint(b, given, "mutual_information");
  EntropyCache cache(pmf);
  return cache.I(a, b, given);
}

EntropyCache::EntropyCache(const JointPMF& pmf) : pmf_(&pmf) {
  if (pmf.variables().size() > 31) throw std::invalid_argument("EntropyCache supports at most 31 variables");
}

std::uint32_t EntropyCache::mask(const VarNames& names) const {
  std::uint32_t m = 0;
  for (const auto& n : names) m |= 1u << pmf_->position(n);
  return m;
}

double EntropyCache::joint(std::uint32_t mask) {
  if (mask == 0) return 0.0;
  if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
  const auto& vars = pmf_->variables();
  std::vector<std::size_t> cards(vars.size());
  std::vector<std::size_t> mstride(vars.size(), 0);
  std::size_t stride = 1;
  for (std::size_t p = vars.size(); p-- > 0;) {
    cards[p] = vars[p].card;
    if (mask & (1u << p)) {
      mstride[p] = stride;
      stride *= vars[p].card;
    }
  }
  const auto marg = sum_onto(pmf_->mass(), cards, mstride, stride);
  const double h = entropy_bits(marg);
  memo_.emplace(mask, h);
  return h;
}

}  // namespace skagree
