#include "findrl/client.hpp"

#include <algorithm>

namespace findrl {

CooperativeClient::CooperativeClient(const json& session)
    : target_(parse_object(session.at("target").get<std::string>())),
      locations_(locations_from(session.at("locations"))) {}

CooperativeClient::Move CooperativeClient::suggest_next() {
  for (Location l : locations_) {
    if (std::find(opened_.begin(), opened_.end(), l) == opened_.end()) {
      suggestion_ = l;
      return {"look in the " + std::string(to_string(l)), std::nullopt};
    }
  }
  return {"no", std::nullopt};
}

CooperativeClient::Move CooperativeClient::respond(const json& hel) {
  using A = HelActionLabel;
  const std::string want = "please find the " + object_phrase(target_);
  if (!hel.contains("move")) return {want, std::nullopt};
  const json& m = hel["move"];
  const A action = parse_hel_action(m.at("action").get<std::string>());
  const std::optional<ObjectId> object = m.at("object").is_null()
                                             ? std::nullopt
                                             : std::optional(parse_object(m["object"].get<std::string>()));
  const std::optional<Location> location = location_from(m.at("location"));
  const bool is_target = object && object_matches(*object, target_);

  switch (action) {
    case A::RequestOT:
      return {want, std::nullopt};
    case A::RequestL:
      if (suggestion_ && std::find(opened_.begin(), opened_.end(), *suggestion_) == opened_.end()) {
        return {"look in the " + std::string(to_string(*suggestion_)), std::nullopt};
      }
      return suggest_next();
    case A::ReportNotFound:
      return suggest_next();
    case A::VerifyOT:
      return {is_target ? "yes" : "no", std::nullopt};
    case A::VerifyL:
      return {location && location == suggestion_ ? "yes" : "no", std::nullopt};
    case A::SearchLocation: {
      if (location) opened_.push_back(*location);
      bool there = false;
      for (const auto& r : hel.value("revealed", json::array())) there = there || parse_object(r.get<std::string>()) == target_;
      if (there && location == suggestion_) {
        seen_at_ = location;
        return {"yes, that is it", std::nullopt};
      }
      return {"no, it is not there", std::nullopt};
    }
    case A::VerifyO:
    case A::PresentObject:
      return {is_target && seen_at_ ? "yes" : "no", std::nullopt};
    case A::DeclareDone:
      return {seen_at_ ? "thank you" : "no", std::nullopt};
  }
  return {want, std::nullopt};
}

}  // namespace findrl
