#pragma once

// nlohmann::json adapters for the domain types. Enumerations are written by
// their canonical names; optional arguments become null.

#include <json.hpp>

#include "findrl/domain.hpp"

namespace findrl {

using json = nlohmann::json;

void to_json(json& j, const ObjectId& o);
void from_json(const json& j, ObjectId& o);
void to_json(json& j, const TaskState& s);
void from_json(const json& j, TaskState& s);
void to_json(json& j, const BeliefState& b);
void from_json(const json& j, BeliefState& b);
void to_json(json& j, const DialogueFlags& f);
void from_json(const json& j, DialogueFlags& f);
void to_json(json& j, const HelMove& m);
void from_json(const json& j, HelMove& m);
void to_json(json& j, const EldMove& m);
void from_json(const json& j, EldMove& m);
void to_json(json& j, const WorldConfig& w);
void from_json(const json& j, WorldConfig& w);

json location_json(const std::optional<Location>& l);
std::optional<Location> location_from(const json& j);
std::vector<Location> locations_from(const json& j);
json locations_json(const std::vector<Location>& ls);

}  // namespace findrl
