// Channel / scheme files and JSON forms of every result type.
//
// Channel file (schema_version 1):
//   { "schema_version": 1,
//     "alphabets": {"S": 1, "X": 2, "Y1": 2, "Y2": 2, "Z": 1},
//     "state_pmf": [...],                       // length |S|
//     "transition": [x][s][y1][y2][z] }         // rows sum to 1 (1e-9)
//
// Scheme file, no feedback:
//   { "schema_version": 1, "kind": "nofb",
//     "cards": {"U0": a, "U1": b, "U2": c},
//     "u0_given_s": [s][u0], "u1_given_u0_s": [s][u0][u1],
//     "u2_given_u0_s": [s][u0][u2], "x_given_all": [s][u0][u1][u2][x] }
//
// Scheme file, feedback:
//   { "schema_version": 1, "kind": "fb", "cards": {"V1": a, "V2": b},
//     "x_given_s": [s][x], "v1_given_y1": [y1][v1], "v2_given_y2": [y2][v2] }
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "skagree/channel.hpp"
#include "skagree/region_fb.hpp"
#include "skagree/region_nofb.hpp"
#include "skagree/report.hpp"

namespace skagree {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Bad user input: malformed files, out-of-range parameters.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);
/// Parses JSON text; syntax errors become ValidationError with line and
/// column.
Json parse_json_text(const std::string& text, const std::string& source);
/// dump(2) plus a trailing newline.
std::string to_file_text(const Json& j);

Json channel_to_json(const BroadcastChannelSpec& ch);
BroadcastChannelSpec channel_from_json(const Json& j);
BroadcastChannelSpec parse_channel(const std::string& path);

Json scheme_to_json(const AuxScheme& s);
Json scheme_to_json(const FeedbackScheme& s);
AuxScheme aux_scheme_from_json(const Json& j, const ChannelCards& cards);
FeedbackScheme fb_scheme_from_json(const Json& j, const ChannelCards& cards);

Json to_json(const InnerPointNofb& p);
Json to_json(const OuterBox& b);
Json to_json(const RateTriple& r);
Json to_json(const RateRegionReport& r);
Json to_json(const FbInnerPoint& p);
Json to_json(const EquivalenceReport& r);
Json to_json(const SimulationReport& r);

}  // namespace skagree
