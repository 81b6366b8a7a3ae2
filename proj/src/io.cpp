#include "skagree/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace skagree {

namespace {

std::string cell_path(const std::string& base, std::span<const std::size_t> idx) {
  std::string p = base;
  for (auto i : idx) p += "[" + std::to_string(i) + "]";
  return p;
}

void flatten_into(const Json& j, std::span<const std::size_t> shape, std::vector<std::size_t>& idx,
                  const std::string& name, std::vector<double>& out) {
  const std::size_t depth = idx.size();
  if (depth == shape.size()) {
    if (!j.is_number()) throw ValidationError(cell_path(name, idx) + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(cell_path(name, idx) + ": negative or non-finite mass");
    out.push_back(v);
    return;
  }
  if (!j.is_array() || j.size() != shape[depth]) {
    throw ValidationError(cell_path(name, idx) + ": expected an array of " + std::to_string(shape[depth]) +
                          " entries");
  }
  for (std::size_t i = 0; i < shape[depth]; ++i) {
    idx.push_back(i);
    flatten_into(j[i], shape, idx, name, out);
    idx.pop_back();
  }
}

std::vector<double> flatten(const Json& j, const char* key, std::vector<std::size_t> shape) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  std::vector<double> out;
  std::vector<std::size_t> idx;
  flatten_into(j.at(key), shape, idx, key, out);
  return out;
}

Json nest(std::span<const double> flat, std::span<const std::size_t> shape, std::size_t& pos, std::size_t depth = 0) {
  if (depth == shape.size()) return flat[pos++];
  Json arr = Json::array();
  for (std::size_t i = 0; i < shape[depth]; ++i) arr.push_back(nest(flat, shape, pos, depth + 1));
  return arr;
}

Json nest(std::span<const double> flat, std::vector<std::size_t> shape) {
  std::size_t pos = 0;
  return nest(flat, shape, pos);
}

// Every row of `width` consecutive entries must sum to one.
void check_rows(const std::vector<double>& flat, std::size_t width, const char* name,
                const std::vector<std::size_t>& row_shape, const std::vector<std::string>& row_names) {
  const std::size_t rows = flat.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < width; ++k) sum += flat[r * width + k];
    if (std::abs(sum - 1.0) > 1e-9) {
      std::string cell;
      std::size_t rem = r;
      std::vector<std::size_t> idx(row_shape.size());
      for (std::size_t d = row_shape.size(); d-- > 0;) {
        idx[d] = rem % row_shape[d];
        rem /= row_shape[d];
      }
      for (std::size_t d = 0; d < idx.size(); ++d) {
        cell += (d ? ", " : "") + row_names[d] + "=" + std::to_string(idx[d]);
      }
      throw ValidationError(std::string(name) + " row (" + cell + ") sums to " + format_double(sum) + ", expected 1");
    }
  }
}

std::size_t card_field(const Json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer() || obj.at(key).get<long long>() < 1 ||
      obj.at(key).get<long long>() > 255) {
    throw ValidationError(std::string("cardinality '") + key + "' must be an integer in [1,255]");
  }
  return obj.at(key).get<std::size_t>();
}

void check_version(const Json& j) {
  if (!j.is_object()) throw ValidationError("top level must be a JSON object");
  if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion) {
    throw ValidationError("unsupported or missing schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size() + 1; ++i) {
      if (i > 0 && text[i - 1] == '\n') {
        ++line;
        col = 1;
      } else if (i > 0) {
        ++col;
      }
    }
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
}

std::string to_file_text(const Json& j) { return j.dump(2) + "\n"; }

Json channel_to_json(const BroadcastChannelSpec& ch) {
  const auto& c = ch.cards();
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["alphabets"] = {{"S", c.s}, {"X", c.x}, {"Y1", c.y1}, {"Y2", c.y2}, {"Z", c.z}};
  j["state_pmf"] = nest(ch.state().mass(), {c.s});
  j["transition"] = nest(ch.transition().table(), {c.x, c.s, c.y1, c.y2, c.z});
  return j;
}

BroadcastChannelSpec channel_from_json(const Json& j) {
  check_version(j);
  if (!j.contains("alphabets") || !j.at("alphabets").is_object()) throw ValidationError("missing object 'alphabets'");
  const Json& a = j.at("alphabets");
  ChannelCards c{card_field(a, "S"), card_field(a, "X"), card_field(a, "Y1"), card_field(a, "Y2"), card_field(a, "Z")};
  auto state = flatten(j, "state_pmf", {c.s});
  check_rows(state, c.s, "state_pmf", {}, {});
  auto trans = flatten(j, "transition", {c.x, c.s, c.y1, c.y2, c.z});
  check_rows(trans, c.y1 * c.y2 * c.z, "transition", {c.x, c.s}, {"x", "s"});
  return make_channel(c, std::move(state), std::move(trans));
}

BroadcastChannelSpec parse_channel(const std::string& path) {
  return channel_from_json(parse_json_text(read_file(path), path));
}

Json scheme_to_json(const AuxScheme& s) {
  const auto a = s.cards();
  const std::size_t cs = s.u0_given_s.given().front().card;
  const std::size_t cx = s.x_given_all.target().front().card;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "nofb";
  j["cards"] = {{"U0", a.u0}, {"U1", a.u1}, {"U2", a.u2}};
  j["u0_given_s"] = nest(s.u0_given_s.table(), {cs, a.u0});
  j["u1_given_u0_s"] = nest(s.u1_given_u0_s.table(), {cs, a.u0, a.u1});
  j["u2_given_u0_s"] = nest(s.u2_given_u0_s.table(), {cs, a.u0, a.u2});
  j["x_given_all"] = nest(s.x_given_all.table(), {cs, a.u0, a.u1, a.u2, cx});
  return j;
}

Json scheme_to_json(const FeedbackScheme& s) {
  const std::size_t cs = s.x_given_s.given().front().card;
  const std::size_t cx = s.x_given_s.target().front().card;
  const std::size_t cy1 = s.v1_given_y1.given().front().card;
  const std::size_t cy2 = s.v2_given_y2.given().front().card;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "fb";
  j["cards"] = {{"V1", s.card_v1()}, {"V2", s.card_v2()}};
  j["x_given_s"] = nest(s.x_given_s.table(), {cs, cx});
  j["v1_given_y1"] = nest(s.v1_given_y1.table(), {cy1, s.card_v1()});
  j["v2_given_y2"] = nest(s.v2_given_y2.table(), {cy2, s.card_v2()});
  return j;
}

AuxScheme aux_scheme_from_json(const Json& j, const ChannelCards& c) {
  check_version(j);
  if (!j.contains("kind") || j.at("kind") != "nofb") throw ValidationError("scheme kind must be \"nofb\"");
  if (!j.contains("cards") || !j.at("cards").is_object()) throw ValidationError("missing object 'cards'");
  const AuxCards a{card_field(j.at("cards"), "U0"), card_field(j.at("cards"), "U1"), card_field(j.at("cards"), "U2")};
  auto u0 = flatten(j, "u0_given_s", {c.s, a.u0});
  check_rows(u0, a.u0, "u0_given_s", {c.s}, {"s"});
  auto u1 = flatten(j, "u1_given_u0_s", {c.s, a.u0, a.u1});
  check_rows(u1, a.u1, "u1_given_u0_s", {c.s, a.u0}, {"s", "u0"});
  auto u2 = flatten(j, "u2_given_u0_s", {c.s, a.u0, a.u2});
  check_rows(u2, a.u2, "u2_given_u0_s", {c.s, a.u0}, {"s", "u0"});
  auto x = flatten(j, "x_given_all", {c.s, a.u0, a.u1, a.u2, c.x});
  check_rows(x, c.x, "x_given_all", {c.s, a.u0, a.u1, a.u2}, {"s", "u0", "u1", "u2"});
  return make_aux_scheme(c, a, std::move(u0), std::move(u1), std::move(u2), std::move(x));
}

FeedbackScheme fb_scheme_from_json(const Json& j, const ChannelCards& c) {
  check_version(j);
  if (!j.contains("kind") || j.at("kind") != "fb") throw ValidationError("scheme kind must be \"fb\"");
  if (!j.contains("cards") || !j.at("cards").is_object()) throw ValidationError("missing object 'cards'");
  const std::size_t v1 = card_field(j.at("cards"), "V1");
  const std::size_t v2 = card_field(j.at("cards"), "V2");
  auto x = flatten(j, "x_given_s", {c.s, c.x});
  check_rows(x, c.x, "x_given_s", {c.s}, {"s"});
  auto k1 = flatten(j, "v1_given_y1", {c.y1, v1});
  check_rows(k1, v1, "v1_given_y1", {c.y1}, {"y1"});
  auto k2 = flatten(j, "v2_given_y2", {c.y2, v2});
  check_rows(k2, v2, "v2_given_y2", {c.y2}, {"y2"});
  return make_feedback_scheme(c, v1, v2, std::move(x), std::move(k1), std::move(k2));
}

Json to_json(const InnerPointNofb& p) {
  Json j;
  j["r0"] = p.r0;
  j["r1"] = p.r1;
  j["r2"] = p.r2;
  j["r0_plus_r1"] = p.r0_plus_r1;
  j["r0_plus_r2"] = p.r0_plus_r2;
  j["r0_plus_r1_plus_r2"] = p.r0_plus_r1_plus_r2;
  j["feasible"] = p.feasible;
  j["constraint_slacks"] = Json::array();
  for (double s : p.constraint_slacks) j["constraint_slacks"].push_back(s);
  j["reach"] = to_json(p.reach());
  return j;
}

Json to_json(const OuterBox& b) { return Json{{"r0_max", b.r0_max}, {"r1_max", b.r1_max}, {"r2_max", b.r2_max}}; }

Json to_json(const RateTriple& r) { return Json{{"r0", r.r0}, {"r1", r.r1}, {"r2", r.r2}}; }

Json to_json(const RateRegionReport& r) {
  Json j;
  j["best_point"] = to_json(r.best_point);
  j["best_rates"] = to_json(r.best_rates);
  j["objective"] = r.objective;
  j["best_scheme"] = scheme_to_json(r.best_scheme);
  j["outer_at_best_input"] = to_json(r.outer);
  j["contained"] = check_containment(r.best_point, r.outer);
  Json trace = Json::array();
  for (const auto& t : r.search_trace) trace.push_back(Json{{"restart", t.restart}, {"objective", t.objective}});
  j["search_trace"] = trace;
  return j;
}

Json to_json(const FbInnerPoint& p) {
  Json j;
  j["r1_max"] = p.r1_max;
  j["r2_max"] = p.r2_max;
  j["sum_max"] = p.sum_max;
  j["terms"] = {{"I(XS;V1)", p.i_xs_v1},   {"I(V1;Y2)", p.i_v1_y2}, {"I(V1;Z)", p.i_v1_z},
                {"I(XS;V2)", p.i_xs_v2},   {"I(V2;Y1)", p.i_v2_y1}, {"I(V2;Z)", p.i_v2_z},
                {"I(XS;V1V2)", p.i_xs_v1v2}, {"I(V1V2;Z)", p.i_v1v2_z}};
  return j;
}

Json to_json(const EquivalenceReport& r) {
  Json j;
  j["agree"] = r.agree();
  j["step"] = r.step;
  j["tolerance"] = r.tolerance;
  j["points_checked"] = r.points_checked;
  j["disagreements"] = r.disagreements;
  Json ex = Json::array();
  for (const auto& d : r.examples) {
    ex.push_back(Json{{"r1", d.r1}, {"r2", d.r2}, {"in_projection", d.in_projection},
                      {"in_closed_form", d.in_closed_form}});
  }
  j["examples"] = ex;
  j["projection_infeasible"] = r.projection_infeasible;
  j["identity_residual_v1"] = r.identity_residual_1;
  j["identity_residual_v2"] = r.identity_residual_2;
  j["cross_secrecy_reading"] = to_string(r.reading);
  j["literal_cross_secrecy_text"] = r.literal_text;
  Json rows = Json::array();
  std::istringstream in(to_text(r.projected));
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  j["projected_system"] = rows;
  j["closed_form"] = to_json(r.closed_form);
  return j;
}

Json to_json(const SimulationReport& r) {
  Json j;
  j["protocol"] = r.protocol;
  j["n"] = r.tp.n;
  j["eps"] = r.tp.eps;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  auto group = [](const std::vector<Metric>& ms) {
    Json g = Json::object();
    for (const auto& m : ms) g[m.name] = m.value;
    return g;
  };
  j["nominal_rates"] = group(r.nominal_rates);
  j["realized_rates"] = group(r.realized_rates);
  j["error_rates"] = group(r.error_rates);
  j["leakage"] = group(r.leakage);
  j["key_entropy"] = group(r.key_entropy);
  j["failures"] = group(r.failures);
  j["leakage_exact"] = r.leakage_exact;
  j["enumeration_size"] = r.enumeration_size;
  return j;
}

}  // namespace skagree
