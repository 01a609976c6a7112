#include "findrl/jsonio.hpp"

namespace findrl {

namespace {

json object_json(const std::optional<ObjectId>& o) { return o ? json(object_name(*o)) : json(nullptr); }

std::optional<ObjectId> object_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_object(j.get<std::string>());
}

}  // namespace

json location_json(const std::optional<Location>& l) {
  return l ? json(std::string(to_string(*l))) : json(nullptr);
}

std::optional<Location> location_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_location(j.get<std::string>());
}

json locations_json(const std::vector<Location>& ls) {
  json a = json::array();
  for (Location l : ls) a.push_back(std::string(to_string(l)));
  return a;
}

std::vector<Location> locations_from(const json& j) {
  std::vector<Location> out;
  for (const auto& e : j) out.push_back(parse_location(e.get<std::string>()));
  return out;
}

void to_json(json& j, const ObjectId& o) { j = object_name(o); }
void from_json(const json& j, ObjectId& o) { o = parse_object(j.get<std::string>()); }

void to_json(json& j, const TaskState& s) {
  j = json::array({static_cast<int>(s.ot), static_cast<int>(s.l), static_cast<int>(s.o)});
}

void from_json(const json& j, TaskState& s) {
  auto status = [](const json& v) {
    const int x = v.get<int>();
    if (x < 0 || x > 2) throw std::invalid_argument("grounding status out of range");
    return static_cast<GroundingStatus>(x);
  };
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("task state must be a triple");
  s = {status(j[0]), status(j[1]), status(j[2])};
}

void to_json(json& j, const BeliefState& b) {
  j = json::array({to_string(b.ot), to_string(b.l), to_string(b.o)});
}

void from_json(const json& j, BeliefState& b) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("belief must be a triple");
  b = {parse_belief(j[0].get<std::string>()), parse_belief(j[1].get<std::string>()),
       parse_belief(j[2].get<std::string>())};
}

void to_json(json& j, const DialogueFlags& f) {
  j = json{{"ot_uttered", f.ot_uttered}, {"l_uttered", f.l_uttered}};
}

void from_json(const json& j, DialogueFlags& f) {
  f.ot_uttered = j.at("ot_uttered").get<bool>();
  f.l_uttered = j.at("l_uttered").get<bool>();
}

void to_json(json& j, const HelMove& m) {
  j = json{{"action", to_string(m.action.label)},
           {"object", object_json(m.action.object)},
           {"location", location_json(m.action.location)},
           {"da", to_string(m.da)},
           {"pointing", location_json(m.pointing)},
           {"ho", to_string(m.ho)}};
  if (!m.utterance.empty()) j["utterance"] = m.utterance;
}

void from_json(const json& j, HelMove& m) {
  m = HelMove{};
  m.action.label = parse_hel_action(j.at("action").get<std::string>());
  m.action.object = object_from(j.at("object"));
  m.action.location = location_from(j.at("location"));
  m.da = parse_da(j.at("da").get<std::string>());
  m.pointing = location_from(j.at("pointing"));
  m.ho = parse_ho(j.at("ho").get<std::string>());
  if (j.contains("utterance")) m.utterance = j["utterance"].get<std::string>();
}

void to_json(json& j, const EldMove& m) {
  j = json{{"action", to_string(m.action.label)},
           {"object", object_json(m.action.object)},
           {"location", location_json(m.action.location)},
           {"da", to_string(m.da)},
           {"pointing", location_json(m.pointing)}};
  if (!m.utterance.empty()) j["utterance"] = m.utterance;
}

void from_json(const json& j, EldMove& m) {
  m = EldMove{};
  m.action.label = parse_eld_action(j.at("action").get<std::string>());
  m.action.object = object_from(j.at("object"));
  m.action.location = location_from(j.at("location"));
  m.da = parse_da(j.at("da").get<std::string>());
  m.pointing = location_from(j.at("pointing"));
  if (j.contains("utterance")) m.utterance = j["utterance"].get<std::string>();
}

void to_json(json& j, const WorldConfig& w) {
  json objects = json::array();
  for (const auto& o : w.objects) objects.push_back(object_name(o));
  j = json{{"objects", objects},
           {"locations", locations_json(w.locations)},
           {"placement", locations_json(w.placement)},
           {"target", object_name(w.target)},
           {"seed", w.seed}};
}

void from_json(const json& j, WorldConfig& w) {
  w = WorldConfig{};
  for (const auto& o : j.at("objects")) w.objects.push_back(parse_object(o.get<std::string>()));
  w.locations = locations_from(j.at("locations"));
  w.placement = locations_from(j.at("placement"));
  w.target = parse_object(j.at("target").get<std::string>());
  w.seed = j.at("seed").get<std::uint64_t>();
  if (!is_valid_world(w)) throw std::invalid_argument("inconsistent world");
}

}  // namespace findrl
