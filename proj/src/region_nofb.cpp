#include "skagree/region_nofb.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "skagree/parallel.hpp"
#include "skagree/random.hpp"

namespace skagree {

namespace {

void require_exact_vars(const JointPMF& joint, std::initializer_list<std::string> names, const char* who) {
  std::set<std::string> want(names.begin(), names.end());
  std::set<std::string> have;
  for (const auto& v : joint.variables()) have.insert(v.name);
  if (want != have) {
    std::string msg = std::string(who) + ": wrong variable set, expected {";
    for (const auto& n : names) msg += n + " ";
    msg += "}";
    throw std::invalid_argument(msg);
  }
}

// All inner-bound terms only involve S, the auxiliaries and the outputs, so
// the same routine serves joints with or without X.
InnerPointNofb inner_from_cache(EntropyCache& c) {
  using namespace var;
  const double i_u0_y1 = c.I({U0}, {Y1});
  const double i_u0_y2 = c.I({U0}, {Y2});
  const double i_u0_z = c.I({U0}, {Z});
  const double i_u0_s = c.I({U0}, {S});
  const double i_u1_y1 = c.I({U1}, {Y1}, {U0});
  const double i_u2_y2 = c.I({U2}, {Y2}, {U0});
  const double i_u1_y2u2 = c.I({U1}, {Y2, U2}, {U0});
  const double i_u2_y1u1 = c.I({U2}, {Y1, U1}, {U0});
  const double i_u1_s = c.I({U1}, {S}, {U0});
  const double i_u2_s = c.I({U2}, {S}, {U0});
  const double i_u0u1_z = c.I({U0, U1}, {Z});
  const double i_u0u2_z = c.I({U0, U2}, {Z});
  const double i_all_z = c.I({U0, U1, U2}, {Z});
  const double i_u1_u2 = c.I({U1}, {U2}, {U0});

  const double common = std::min(i_u0_y1, i_u0_y2);
  InnerPointNofb p;
  p.r0 = positive_part(common - i_u0_z);
  p.r1 = positive_part(i_u1_y1 - i_u1_y2u2);
  p.r2 = positive_part(i_u2_y2 - i_u2_y1u1);
  p.r0_plus_r1 = positive_part(common + i_u1_y1 - i_u0u1_z);
  p.r0_plus_r2 = positive_part(common + i_u2_y2 - i_u0u2_z);
  p.r0_plus_r1_plus_r2 = positive_part(common + i_u1_y1 + i_u2_y2 - i_all_z - i_u1_u2);
  p.constraint_slacks = {i_u0_y1 - i_u0_s, i_u0_y2 - i_u0_s, i_u1_y1 - i_u1_s, i_u2_y2 - i_u2_s};
  p.feasible = std::all_of(p.constraint_slacks.begin(), p.constraint_slacks.end(),
                           [](double s) { return s >= kFeasibilitySlack; });
  return p;
}

OuterBox outer_from_cache(EntropyCache& c) {
  using namespace var;
  OuterBox b;
  const double y1_z = c.I({X, S}, {Y1}, {Z});
  const double y2_z = c.I({X, S}, {Y2}, {Z});
  b.r0_max = std::max(0.0, std::min(y1_z, y2_z));
  b.r1_max = std::max(0.0, std::min(c.I({X, S}, {Y1}, {Y2}), y1_z));
  b.r2_max = std::max(0.0, std::min(c.I({X, S}, {Y2}, {Y1}), y2_z));
  return b;
}

// ---------------------------------------------------------------------------
// Softmax parameterization shared by both searches.

struct Block {
  std::size_t offset = 0;
  std::size_t size = 0;
};

constexpr double kLogitClamp = 40.0;

void softmax_rows(std::span<const double> logits, std::span<const Block> blocks, std::vector<double>& out) {
  out.resize(logits.size());
  for (const auto& b : blocks) {
    double mx = -1e300;
    for (std::size_t i = 0; i < b.size; ++i) mx = std::max(mx, logits[b.offset + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < b.size; ++i) {
      out[b.offset + i] = std::exp(logits[b.offset + i] - mx);
      sum += out[b.offset + i];
    }
    for (std::size_t i = 0; i < b.size; ++i) out[b.offset + i] /= sum;
  }
}

std::vector<Block> make_blocks(std::size_t rows, std::size_t width, std::size_t& offset) {
  std::vector<Block> blocks;
  for (std::size_t r = 0; r < rows; ++r) {
    blocks.push_back({offset, width});
    offset += width;
  }
  return blocks;
}

struct Score {
  bool feasible = false;
  double value = -std::numeric_limits<double>::infinity();
  double min_slack = -std::numeric_limits<double>::infinity();
};

bool better(const Score& a, const Score& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.value > b.value;
  return a.min_slack > b.min_slack;
}

// Block coordinate ascent: perturb one row's logits along a random direction,
// keep the better of +/- step when it improves. Step grows on success and
// decays on failure, resetting once it collapses.
template <class Objective>
std::pair<std::vector<double>, Score> coordinate_ascent(std::vector<double> theta, std::span<const Block> blocks,
                                                        const SearchBudget& budget, Rng& rng, Objective&& objective) {
  Score cur = objective(theta);
  double step = budget.initial_step;
  std::vector<double> dir, cand;
  for (std::size_t it = 0; it < budget.iterations; ++it) {
    const Block& b = blocks[uniform_index(rng, blocks.size())];
    dir.resize(b.size);
    for (auto& d : dir) d = standard_normal(rng);
    Score best = cur;
    std::vector<double> best_theta;
    for (double sign : {1.0, -1.0}) {
      cand = theta;
      for (std::size_t i = 0; i < b.size; ++i) {
        cand[b.offset + i] = std::clamp(cand[b.offset + i] + sign * step * dir[i], -kLogitClamp, kLogitClamp);
      }
      const Score sc = objective(cand);
      if (better(sc, best)) {
        best = sc;
        best_theta = cand;
      }
    }
    if (!best_theta.empty()) {
      theta = std::move(best_theta);
      cur = best;
      step = std::min(step / budget.step_decay, 8.0);
    } else {
      step *= budget.step_decay;
      if (step < 1e-3) step = budget.initial_step;
    }
  }
  return {std::move(theta), cur};
}

// Snaps each row to every one-hot vertex in turn, keeping improvements.
template <class Objective>
void polish_vertices(std::vector<double>& theta, Score& cur, std::span<const Block> blocks, Objective&& objective) {
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k < b.size; ++k) {
      auto cand = theta;
      for (std::size_t i = 0; i < b.size; ++i) cand[b.offset + i] = i == k ? kLogitClamp : -kLogitClamp;
      const Score sc = objective(cand);
      if (better(sc, cur)) {
        theta = std::move(cand);
        cur = sc;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Inner search.

class InnerProblem {
 public:
  InnerProblem(const BroadcastChannelSpec& ch, const AuxCards& a) : ch_(ch), a_(a) {
    const auto& c = ch.cards();
    std::size_t off = 0;
    auto b0 = make_blocks(c.s, a.u0, off);
    u1_off_ = off;
    auto b1 = make_blocks(c.s * a.u0, a.u1, off);
    u2_off_ = off;
    auto b2 = make_blocks(c.s * a.u0, a.u2, off);
    x_off_ = off;
    auto bx = make_blocks(c.s * a.u0 * a.u1 * a.u2, c.x, off);
    dim_ = off;
    for (auto* v : {&b0, &b1, &b2, &bx}) blocks_.insert(blocks_.end(), v->begin(), v->end());
    out_cells_ = c.y1 * c.y2 * c.z;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  AuxScheme scheme(std::span<const double> theta) const {
    std::vector<double> p;
    softmax_rows(theta, blocks_, p);
    auto slice = [&](std::size_t from, std::size_t to) {
      return std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(from),
                                 p.begin() + static_cast<std::ptrdiff_t>(to));
    };
    return make_aux_scheme(ch_.cards(), a_, slice(0, u1_off_), slice(u1_off_, u2_off_), slice(u2_off_, x_off_),
                           slice(x_off_, dim_));
  }

  // Joint over (S,U0,U1,U2,Y1,Y2,Z) with X summed out.
  JointPMF reduced_joint(std::span<const double> theta) const {
    const auto& c = ch_.cards();
    std::vector<double> p;
    softmax_rows(theta, blocks_, p);
    const double* pu0 = p.data();
    const double* pu1 = p.data() + u1_off_;
    const double* pu2 = p.data() + u2_off_;
    const double* px = p.data() + x_off_;
    const auto kernel = ch_.transition().table();
    std::vector<double> mass(c.s * a_.u0 * a_.u1 * a_.u2 * out_cells_, 0.0);
    std::vector<double> out(out_cells_);
    for (std::size_t s = 0; s < c.s; ++s) {
      const double ps = ch_.state().mass()[s];
      for (std::size_t u0 = 0; u0 < a_.u0; ++u0) {
        const double w0 = ps * pu0[s * a_.u0 + u0];
        for (std::size_t u1 = 0; u1 < a_.u1; ++u1) {
          const double w1 = w0 * pu1[(s * a_.u0 + u0) * a_.u1 + u1];
          for (std::size_t u2 = 0; u2 < a_.u2; ++u2) {
            const double w2 = w1 * pu2[(s * a_.u0 + u0) * a_.u2 + u2];
            const std::size_t cell = ((s * a_.u0 + u0) * a_.u1 + u1) * a_.u2 + u2;
            std::fill(out.begin(), out.end(), 0.0);
            for (std::size_t x = 0; x < c.x; ++x) {
              const double wx = px[cell * c.x + x];
              if (wx == 0.0) continue;
              const double* row = kernel.data() + (x * c.s + s) * out_cells_;
              for (std::size_t o = 0; o < out_cells_; ++o) out[o] += wx * row[o];
            }
            double* dst = mass.data() + cell * out_cells_;
            for (std::size_t o = 0; o < out_cells_; ++o) dst[o] = w2 * out[o];
          }
        }
      }
    }
    return JointPMF({{var::S, c.s},
                     {var::U0, a_.u0},
                     {var::U1, a_.u1},
                     {var::U2, a_.u2},
                     {var::Y1, c.y1},
                     {var::Y2, c.y2},
                     {var::Z, c.z}},
                    std::move(mass));
  }

  InnerPointNofb point(std::span<const double> theta) const {
    const JointPMF j = reduced_joint(theta);
    EntropyCache cache(j);
    return inner_from_cache(cache);
  }

 private:
  const BroadcastChannelSpec& ch_;
  AuxCards a_;
  std::vector<Block> blocks_;
  std::size_t u1_off_ = 0, u2_off_ = 0, x_off_ = 0, dim_ = 0, out_cells_ = 1;
};

std::string serialize_scheme(const AuxScheme& s) {
  std::ostringstream os;
  os.precision(17);
  for (const auto* t : {&s.u0_given_s, &s.u1_given_u0_s, &s.u2_given_u0_s, &s.x_given_all}) {
    for (double v : t->table()) os << v << ',';
    os << ';';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Outer search.

class OuterProblem {
 public:
  explicit OuterProblem(const BroadcastChannelSpec& ch) : ch_(ch) {
    std::size_t off = 0;
    blocks_ = make_blocks(ch.cards().s, ch.cards().x, off);
    dim_ = off;
  }
  std::size_t dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  ConditionalPMF kernel(std::span<const double> theta) const {
    std::vector<double> p;
    softmax_rows(theta, blocks_, p);
    return ConditionalPMF({{var::X, ch_.cards().x}}, {{var::S, ch_.cards().s}}, std::move(p));
  }
  OuterBox box(const ConditionalPMF& k) const {
    const JointPMF j = build_joint_input(ch_, k);
    EntropyCache cache(j);
    return outer_from_cache(cache);
  }
  OuterBox box(std::span<const double> theta) const { return box(kernel(theta)); }

 private:
  const BroadcastChannelSpec& ch_;
  std::vector<Block> blocks_;
  std::size_t dim_ = 0;
};

void raise(OuterBox& acc, const OuterBox& b) {
  acc.r0_max = std::max(acc.r0_max, b.r0_max);
  acc.r1_max = std::max(acc.r1_max, b.r1_max);
  acc.r2_max = std::max(acc.r2_max, b.r2_max);
}

double coord(const OuterBox& b, std::size_t i) { return i == 0 ? b.r0_max : i == 1 ? b.r1_max : b.r2_max; }

}  // namespace

RateTriple InnerPointNofb::reach() const {
  RateTriple t;
  t.r0 = std::min({r0, r0_plus_r1, r0_plus_r2, r0_plus_r1_plus_r2});
  t.r1 = std::min({r1, r0_plus_r1, r0_plus_r1_plus_r2});
  t.r2 = std::min({r2, r0_plus_r2, r0_plus_r1_plus_r2});
  return t;
}

InnerPointNofb eval_inner_nofb(const JointPMF& joint) {
  using namespace var;
  require_exact_vars(joint, {S, U0, U1, U2, X, Y1, Y2, Z}, "eval_inner_nofb");
  EntropyCache cache(joint);
  return inner_from_cache(cache);
}

OuterBox eval_outer_nofb(const JointPMF& joint) {
  using namespace var;
  require_exact_vars(joint, {S, X, Y1, Y2, Z}, "eval_outer_nofb");
  EntropyCache cache(joint);
  return outer_from_cache(cache);
}

OuterBox eval_outer_nofb(const JointPMF& joint, const BroadcastChannelSpec& channel) {
  using namespace var;
  require_exact_vars(joint, {S, X, Y1, Y2, Z}, "eval_outer_nofb");
  const JointPMF ps = marginalize(joint, {S});
  const auto& c = channel.cards();
  if (ps.variables()[0].card != c.s) throw std::invalid_argument("eval_outer_nofb: |S| mismatch with channel");
  for (std::size_t s = 0; s < c.s; ++s) {
    if (std::abs(ps.mass()[s] - channel.state().mass()[s]) > 1e-9) {
      throw std::invalid_argument("eval_outer_nofb: joint inconsistent with channel state distribution");
    }
  }
  const ConditionalPMF k = condition(joint, {Y1, Y2, Z}, {X, S});
  if (k.given_cells() != channel.transition().given_cells() ||
      k.target_cells() != channel.transition().target_cells()) {
    throw std::invalid_argument("eval_outer_nofb: alphabet mismatch with channel");
  }
  for (std::size_t g = 0; g < k.given_cells(); ++g) {
    if (!k.constrained(g)) continue;
    for (std::size_t t = 0; t < k.target_cells(); ++t) {
      if (std::abs(k.prob(g, t) - channel.transition().prob(g, t)) > 1e-9) {
        throw std::invalid_argument("eval_outer_nofb: joint inconsistent with channel kernel at (x,s) cell " +
                                    std::to_string(g));
      }
    }
  }
  return eval_outer_nofb(joint);
}

RateTriple best_rates(const InnerPointNofb& p, const std::array<double, 3>& w) {
  const std::array<std::array<double, 3>, 9> a = {{{1, 0, 0},
                                                   {0, 1, 0},
                                                   {0, 0, 1},
                                                   {1, 1, 0},
                                                   {1, 0, 1},
                                                   {1, 1, 1},
                                                   {-1, 0, 0},
                                                   {0, -1, 0},
                                                   {0, 0, -1}}};
  const std::array<double, 9> b = {p.r0, p.r1, p.r2, p.r0_plus_r1, p.r0_plus_r2, p.r0_plus_r1_plus_r2, 0, 0, 0};
  auto det3 = [](const std::array<double, 3>& r0, const std::array<double, 3>& r1, const std::array<double, 3>& r2) {
    return r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0]) +
           r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
  };
  RateTriple best;
  double best_val = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = i + 1; j < 9; ++j) {
      for (std::size_t k = j + 1; k < 9; ++k) {
        const double d = det3(a[i], a[j], a[k]);
        if (std::abs(d) < 1e-12) continue;
        std::array<double, 3> x{};
        for (std::size_t col = 0; col < 3; ++col) {
          auto ri = a[i], rj = a[j], rk = a[k];
          ri[col] = b[i];
          rj[col] = b[j];
          rk[col] = b[k];
          x[col] = det3(ri, rj, rk) / d;
        }
        bool ok = true;
        for (std::size_t r = 0; r < 9 && ok; ++r) {
          ok = a[r][0] * x[0] + a[r][1] * x[1] + a[r][2] * x[2] <= b[r] + 1e-12;
        }
        if (!ok) continue;
        const double val = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
        if (val > best_val) {
          best_val = val;
          best = {std::max(0.0, x[0]), std::max(0.0, x[1]), std::max(0.0, x[2])};
        }
      }
    }
  }
  return best;
}

bool check_containment(const InnerPointNofb& inner, const OuterBox& outer) {
  const RateTriple r = inner.reach();
  return r.r0 <= outer.r0_max + kContainmentSlack && r.r1 <= outer.r1_max + kContainmentSlack &&
         r.r2 <= outer.r2_max + kContainmentSlack;
}

RateRegionReport maximize_inner_nofb(const BroadcastChannelSpec& channel, const AuxCards& cards,
                                     const std::array<double, 3>& weights, const SearchBudget& budget) {
  if (budget.restarts == 0 || budget.iterations == 0) throw std::invalid_argument("maximize_inner_nofb: zero budget");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; }) ||
      std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    throw std::invalid_argument("maximize_inner_nofb: weights must be non-negative and not all zero");
  }
  const InnerProblem prob(channel, cards);
  auto objective = [&](std::span<const double> theta) {
    const InnerPointNofb p = prob.point(theta);
    Score sc;
    sc.feasible = p.feasible;
    sc.min_slack = *std::min_element(p.constraint_slacks.begin(), p.constraint_slacks.end());
    if (p.feasible) {
      const RateTriple r = best_rates(p, weights);
      sc.value = weights[0] * r.r0 + weights[1] * r.r1 + weights[2] * r.r2;
    }
    return sc;
  };

  struct RestartResult {
    std::vector<double> theta;
    Score score;
  };
  std::vector<RestartResult> results(budget.restarts);
  parallel_for(budget.restarts, budget.workers, [&](std::size_t r) {
    Rng rng = make_stream(budget.seed, r, 0x1a2b);
    std::vector<double> theta(prob.dim(), 0.0);
    // Restart 0 starts from the all-uniform scheme, which is always feasible.
    if (r > 0) {
      for (auto& t : theta) t = 2.0 * standard_normal(rng);
    }
    auto [th, sc] = coordinate_ascent(std::move(theta), prob.blocks(), budget, rng, objective);
    results[r] = {std::move(th), sc};
  });

  RateRegionReport report;
  std::size_t best = 0;
  std::string best_key = serialize_scheme(prob.scheme(results[0].theta));
  for (std::size_t r = 0; r < results.size(); ++r) {
    report.search_trace.push_back({r, results[r].score.feasible ? results[r].score.value
                                                                 : -std::numeric_limits<double>::infinity()});
    if (r == 0) continue;
    const auto& a = results[r].score;
    const auto& b = results[best].score;
    if (better(a, b)) {
      best = r;
      best_key = serialize_scheme(prob.scheme(results[r].theta));
    } else if (a.feasible == b.feasible && a.value == b.value) {
      auto key = serialize_scheme(prob.scheme(results[r].theta));
      if (key < best_key) {
        best = r;
        best_key = std::move(key);
      }
    }
  }

  std::vector<double> theta = results[best].theta;
  Score score = results[best].score;
  polish_vertices(theta, score, prob.blocks(), objective);

  report.best_scheme = prob.scheme(theta);
  const JointPMF full = build_joint_nofb(channel, report.best_scheme);
  report.best_point = eval_inner_nofb(full);
  report.best_rates = report.best_point.feasible ? best_rates(report.best_point, weights) : RateTriple{};
  report.objective = report.best_point.feasible ? weights[0] * report.best_rates.r0 +
                                                      weights[1] * report.best_rates.r1 +
                                                      weights[2] * report.best_rates.r2
                                                : -std::numeric_limits<double>::infinity();
  report.outer = eval_outer_nofb(marginalize(full, {var::S, var::X, var::Y1, var::Y2, var::Z}));
  return report;
}

OuterBox maximize_outer_nofb(const BroadcastChannelSpec& channel, const SearchBudget& budget) {
  if (budget.restarts == 0 || budget.iterations == 0) throw std::invalid_argument("maximize_outer_nofb: zero budget");
  const OuterProblem prob(channel);
  const auto& c = channel.cards();

  std::vector<OuterBox> per_restart(budget.restarts);
  parallel_for(budget.restarts, budget.workers, [&](std::size_t r) {
    Rng rng = make_stream(budget.seed, r, 0x0b0c);
    OuterBox acc;
    for (std::size_t coordinate = 0; coordinate < 3; ++coordinate) {
      std::vector<double> theta(prob.dim(), 0.0);
      if (r > 0) {
        for (auto& t : theta) t = 2.0 * standard_normal(rng);
      }
      auto objective = [&](std::span<const double> th) {
        const OuterBox b = prob.box(th);
        raise(acc, b);
        Score sc;
        sc.feasible = true;
        sc.value = coord(b, coordinate);
        return sc;
      };
      auto [th, sc] = coordinate_ascent(std::move(theta), prob.blocks(), budget, rng, objective);
      polish_vertices(th, sc, prob.blocks(), objective);
    }
    per_restart[r] = acc;
  });

  OuterBox box;
  for (const auto& b : per_restart) raise(box, b);

  // Deterministic input kernels are cheap to enumerate exhaustively when few.
  double count = std::pow(static_cast<double>(c.x), static_cast<double>(c.s));
  if (count <= 4096.0) {
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t code = 0; code < n; ++code) {
      std::vector<double> table(c.s * c.x, 0.0);
      std::size_t rest = code;
      for (std::size_t s = 0; s < c.s; ++s) {
        table[s * c.x + rest % c.x] = 1.0;
        rest /= c.x;
      }
      raise(box, prob.box(ConditionalPMF({{var::X, c.x}}, {{var::S, c.s}}, std::move(table))));
    }
  }
  return box;
}

}  // namespace skagree
