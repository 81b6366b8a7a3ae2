// Inner bound on the private-key region with one round of public feedback,
// and its rederivation by projecting the binning constraints.
#pragma once

#include <string>
#include <vector>

#include "skagree/linear_system.hpp"
#include "skagree/prob.hpp"

namespace skagree {

struct FbInnerPoint {
  double r1_max = 0.0, r2_max = 0.0, sum_max = 0.0;

  // Terms behind each bound.
  double i_xs_v1 = 0.0, i_v1_y2 = 0.0, i_v1_z = 0.0;
  double i_xs_v2 = 0.0, i_v2_y1 = 0.0, i_v2_z = 0.0;
  double i_xs_v1v2 = 0.0, i_v1v2_z = 0.0;

  /// Closed-form membership (with `tol` slack on every inequality).
  bool contains(double r1, double r2, double tol) const;
};

/// Joint must be over exactly {S,X,Y1,Y2,Z,V1,V2}.
FbInnerPoint eval_inner_fb(const JointPMF& joint);

/// How to read the second line of the receiver-secrecy constraints. The
/// literal form bounds R1+R'1 by H(V2|V1,Y1); the symmetric reading bounds
/// R2+R'2 by it.
enum class CrossSecrecyReading { symmetric, literal };

inline constexpr const char* kLiteralCrossSecrecyText = "R_1+R'_1 <= H(V_2|V_1,Y_1)";

/// Variables (R1, R2, Rp1, Rp2). Entropies are rounded to 12 decimals.
LinearInequalitySystem build_fb_constraints(const JointPMF& joint,
                                            CrossSecrecyReading reading = CrossSecrecyReading::symmetric);

struct GridDisagreement {
  double r1 = 0.0, r2 = 0.0;
  bool in_projection = false;
  bool in_closed_form = false;
};

struct EquivalenceReport {
  double step = 0.01;
  double tolerance = 1e-6;
  std::size_t points_checked = 0;
  std::size_t disagreements = 0;
  std::vector<GridDisagreement> examples;  // first few only
  bool projection_infeasible = false;
  /// |H(V1|V2,Y2) - H(V1|Y2)| and |H(V2|V1,Y1) - H(V2|Y1)|.
  double identity_residual_1 = 0.0;
  double identity_residual_2 = 0.0;
  CrossSecrecyReading reading = CrossSecrecyReading::symmetric;
  std::string literal_text = kLiteralCrossSecrecyText;
  LinearInequalitySystem projected;
  FbInnerPoint closed_form;

  bool agree() const { return disagreements == 0; }
};

/// Projects (R'1,R'2) out of the constraint system and compares the result
/// to the closed form on a grid of (R1,R2) points.
EquivalenceReport verify_fm_matches_closed_form(const JointPMF& joint, double step = 0.01, double tol = 1e-6,
                                                CrossSecrecyReading reading = CrossSecrecyReading::symmetric,
                                                std::size_t workers = 1);

std::string to_string(CrossSecrecyReading r);

}  // namespace skagree
