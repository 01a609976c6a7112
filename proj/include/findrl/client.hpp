#pragma once

#include <optional>
#include <string>
#include <vector>

#include "findrl/domain.hpp"
#include "findrl/jsonio.hpp"

namespace findrl {

// A cooperative human for exercising the service. It knows the target and the
// room's locations, not where things are; it suggests locations in room order
// and learns contents only from what HEL reveals.
class CooperativeClient {
 public:
  struct Move {
    std::string utterance;
    std::optional<Location> pointing;
  };

  /// `session` is a session summary or view as returned by the service.
  explicit CooperativeClient(const json& session);

  /// Reply to the HEL transcript entry `hel` (the greeting for the first move).
  Move respond(const json& hel);

 private:
  Move suggest_next();

  ObjectId target_;
  std::vector<Location> locations_;
  std::vector<Location> opened_;
  std::optional<Location> suggestion_;
  std::optional<Location> seen_at_;
};

}  // namespace findrl
