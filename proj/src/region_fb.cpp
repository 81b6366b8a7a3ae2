#include "skagree/region_fb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "skagree/channel.hpp"
#include "skagree/parallel.hpp"
#include "skagree/region_nofb.hpp"

namespace skagree {

namespace {

void require_fb_vars(const JointPMF& joint, const char* who) {
  using namespace var;
  const std::set<std::string> want = {S, X, Y1, Y2, Z, V1, V2};
  std::set<std::string> have;
  for (const auto& v : joint.variables()) have.insert(v.name);
  if (want != have) throw std::invalid_argument(std::string(who) + ": wrong variable set, expected {S,X,Y1,Y2,Z,V1,V2}");
}

}  // namespace

bool FbInnerPoint::contains(double r1, double r2, double tol) const {
  return r1 >= -tol && r2 >= -tol && r1 <= r1_max + tol && r2 <= r2_max + tol && r1 + r2 <= sum_max + tol;
}

FbInnerPoint eval_inner_fb(const JointPMF& joint) {
  using namespace var;
  require_fb_vars(joint, "eval_inner_fb");
  EntropyCache c(joint);
  FbInnerPoint p;
  p.i_xs_v1 = c.I({X, S}, {V1});
  p.i_v1_y2 = c.I({V1}, {Y2});
  p.i_v1_z = c.I({V1}, {Z});
  p.i_xs_v2 = c.I({X, S}, {V2});
  p.i_v2_y1 = c.I({V2}, {Y1});
  p.i_v2_z = c.I({V2}, {Z});
  p.i_xs_v1v2 = c.I({X, S}, {V1, V2});
  p.i_v1v2_z = c.I({V1, V2}, {Z});
  p.r1_max = positive_part(p.i_xs_v1 - std::max(p.i_v1_y2, p.i_v1_z));
  p.r2_max = positive_part(p.i_xs_v2 - std::max(p.i_v2_y1, p.i_v2_z));
  p.sum_max = positive_part(p.i_xs_v1v2 - p.i_v1v2_z);
  return p;
}

LinearInequalitySystem build_fb_constraints(const JointPMF& joint, CrossSecrecyReading reading) {
  using namespace var;
  require_fb_vars(joint, "build_fb_constraints");
  EntropyCache c(joint);
  const Rational h_v1_xs = to_rational(c.H({V1}, {X, S}));
  const Rational h_v2_xs = to_rational(c.H({V2}, {X, S}));
  const Rational h_v12_xs = to_rational(c.H({V1, V2}, {X, S}));
  const Rational h_v1_z = to_rational(c.H({V1}, {Z}));
  const Rational h_v2_z = to_rational(c.H({V2}, {Z}));
  const Rational h_v12_z = to_rational(c.H({V1, V2}, {Z}));
  const Rational h_v1_v2y2 = to_rational(c.H({V1}, {V2, Y2}));
  const Rational h_v2_v1y1 = to_rational(c.H({V2}, {V1, Y1}));

  LinearInequalitySystem sys;
  sys.variables = {"R1", "R2", "Rp1", "Rp2"};
  auto row = [&](std::array<int, 4> c4, Rational b) {
    std::vector<Rational> coeffs;
    for (int v : c4) coeffs.emplace_back(v);
    sys.add(std::move(coeffs), std::move(b));
  };
  // Slepian-Wolf recovery at the transmitter.
  row({0, 0, -1, 0}, -h_v1_xs);
  row({0, 0, 0, -1}, -h_v2_xs);
  row({0, 0, -1, -1}, -h_v12_xs);
  // Secrecy against the eavesdropper.
  row({1, 0, 1, 0}, h_v1_z);
  row({0, 1, 0, 1}, h_v2_z);
  row({1, 1, 1, 1}, h_v12_z);
  // Secrecy against the other legitimate receiver.
  row({1, 0, 1, 0}, h_v1_v2y2);
  if (reading == CrossSecrecyReading::symmetric) row({0, 1, 0, 1}, h_v2_v1y1);
  else row({1, 0, 1, 0}, h_v2_v1y1);
  row({-1, 0, 0, 0}, Rational(0));
  row({0, -1, 0, 0}, Rational(0));
  row({0, 0, -1, 0}, Rational(0));
  row({0, 0, 0, -1}, Rational(0));
  return sys;
}

EquivalenceReport verify_fm_matches_closed_form(const JointPMF& joint, double step, double tol,
                                                CrossSecrecyReading reading, std::size_t workers) {
  using namespace var;
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  EquivalenceReport rep;
  rep.step = step;
  rep.tolerance = tol;
  rep.reading = reading;
  rep.closed_form = eval_inner_fb(joint);
  rep.projected = fm_eliminate(build_fb_constraints(joint, reading), {"Rp1", "Rp2"});
  rep.projection_infeasible = rep.projected.infeasible;

  EntropyCache c(joint);
  rep.identity_residual_1 = std::abs(c.H({V1}, {V2, Y2}) - c.H({V1}, {Y2}));
  rep.identity_residual_2 = std::abs(c.H({V2}, {V1, Y1}) - c.H({V2}, {Y1}));

  const double extent = std::max(c.H({V1}), c.H({V2})) + 2.0 * step;
  const auto n = static_cast<std::size_t>(std::floor(extent / step)) + 1;

  const DoubleSystem projected(rep.projected);
  std::vector<std::vector<GridDisagreement>> per_row(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const double r1 = static_cast<double>(i) * step;
    for (std::size_t j = 0; j < n; ++j) {
      const double r2 = static_cast<double>(j) * step;
      const std::array<double, 2> pt = {r1, r2};
      const bool in_fm = projected.contains(pt, tol);
      const bool in_cf = rep.closed_form.contains(r1, r2, tol);
      if (in_fm != in_cf) per_row[i].push_back({r1, r2, in_fm, in_cf});
    }
  });
  rep.points_checked = n * n;
  for (const auto& r : per_row) {
    rep.disagreements += r.size();
    for (const auto& d : r) {
      if (rep.examples.size() < 8) rep.examples.push_back(d);
    }
  }
  return rep;
}

std::string to_string(CrossSecrecyReading r) {
  return r == CrossSecrecyReading::symmetric ? "symmetric" : "literal";
}

}  // namespace skagree
