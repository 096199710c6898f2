#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "metocean/contour.hpp"
#include "metocean/environment.hpp"
#include "metocean/response.hpp"

namespace metocean {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "metocean/1";

/// Shortest text that parses back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double x);

/// Doubles as JSON numbers, non-finite values as strings.
Json json_number(double x);
double json_to_double(const Json& j);

Json to_json(const MarginalModel& m);
MarginalModel marginal_from_json(const Json& j);

Json to_json(const CEModel& m);
CEModel ce_from_json(const Json& j);

Json to_json(const HierarchicalModel& m);
HierarchicalModel hierarchical_from_json(const Json& j);

Json to_json(const JointExtremesModel& m);
JointExtremesModel joint_from_json(const Json& j);

Json to_json(const ResponseModel& m);
ResponseModel response_from_json(const Json& j);

/// 64-bit FNV-1a of a string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

std::string read_text(const std::string& path);
/// Writes via a temporary file and rename.
void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

/// `event,hs,tp,n_states`
std::string events_csv(const std::vector<StormEvent>& events);
std::vector<StormEvent> parse_events_csv(const std::string& text);

/// `theta_rad,x1,x2,attained,loop` (loop 0 is the primary loop).
std::string contour_csv(const Contour& c);
Contour parse_contour_csv(const std::string& text);

/// Contour metadata without the points.
Json contour_sidecar(const Contour& c);

}  // namespace metocean
