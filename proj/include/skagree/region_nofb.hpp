// Inner and outer bounds on the secret-key region without public feedback.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "skagree/channel.hpp"
#include "skagree/prob.hpp"

namespace skagree {

inline constexpr double kFeasibilitySlack = -1e-9;
inline constexpr double kContainmentSlack = 1e-6;

inline double positive_part(double x) { return x >= 0.0 ? x : 0.0; }

struct RateTriple {
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;
};

/// The six right-hand sides of the inner bound (after [.]^+) and the four
/// covering slacks.
struct InnerPointNofb {
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;
  double r0_plus_r1 = 0.0, r0_plus_r2 = 0.0, r0_plus_r1_plus_r2 = 0.0;
  bool feasible = false;
  std::array<double, 4> constraint_slacks{};

  /// Largest value each rate can take inside the polytope with the others
  /// at zero, i.e. the region's projection onto each axis.
  RateTriple reach() const;
};

struct OuterBox {
  double r0_max = 0.0, r1_max = 0.0, r2_max = 0.0;
};

/// Joint must be over exactly {S,U0,U1,U2,X,Y1,Y2,Z}.
InnerPointNofb eval_inner_nofb(const JointPMF& joint);

/// Joint must be over exactly {S,X,Y1,Y2,Z}.
OuterBox eval_outer_nofb(const JointPMF& joint);

/// Checks that `joint` is consistent with the channel (p(S) and the kernel on
/// positive-mass cells), then evaluates the outer box.
OuterBox eval_outer_nofb(const JointPMF& joint, const BroadcastChannelSpec& channel);

/// Maximizes w . R over the inner polytope of a single point; returns the
/// maximizing rate triple (a vertex).
RateTriple best_rates(const InnerPointNofb& point, const std::array<double, 3>& weights);

bool check_containment(const InnerPointNofb& inner, const OuterBox& outer);

struct SearchBudget {
  std::size_t restarts = 64;
  std::size_t iterations = 500;
  double step_decay = 0.95;
  double initial_step = 1.0;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct TracePoint {
  std::size_t restart = 0;
  double objective = 0.0;
};

struct RateRegionReport {
  InnerPointNofb best_point;
  RateTriple best_rates;
  double objective = -std::numeric_limits<double>::infinity();
  AuxScheme best_scheme;
  OuterBox outer;
  std::vector<TracePoint> search_trace;
};

/// Random-restart block coordinate ascent over softmax-parameterized
/// auxiliary schemes. Infeasible schemes score -inf. The result is the best
/// scheme found, not a certified optimum. `outer` is filled by evaluating the
/// outer box at the best scheme's induced input distribution.
RateRegionReport maximize_inner_nofb(const BroadcastChannelSpec& channel, const AuxCards& cards,
                                     const std::array<double, 3>& weights, const SearchBudget& budget);

/// Coordinatewise maximum of the outer box over searched p(X|S). The three
/// maxima may come from different input distributions.
OuterBox maximize_outer_nofb(const BroadcastChannelSpec& channel, const SearchBudget& budget);

}  // namespace skagree
