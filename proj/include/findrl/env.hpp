#pragma once

#include <optional>
#include <vector>

#include "findrl/interaction.hpp"
#include "findrl/nn.hpp"
#include "findrl/usersim.hpp"

namespace findrl {

struct EpisodeParams {
  int max_turns = 20;               // M
  double move_cost = 1.0;           // r
  double violation_penalty = 50.0;  // Z
  double error_rate = 0.25;
  double gamma = 0.95;

  void validate() const;  // throws std::invalid_argument
};

// HEL's knowledge about the location it currently holds.
enum class SearchContext : std::uint8_t { Unsearched, Found, NotFound };
// Coarse class of HEL's previous move.
enum class LastMove : std::uint8_t { None, Request, Verify, Search, Other };

SearchContext search_context(const HelTracker& t);
LastMove last_move_kind(const std::optional<HelActionLabel>& a);

struct Observation {
  std::optional<EldActionLabel> eld_action;
  std::optional<DaTag> eld_da;
  TaskState hel_state;
  DialogueFlags flags;
  SearchContext search = SearchContext::Unsearched;
  LastMove last_move = LastMove::None;
  int turn = 0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

inline constexpr int kObsDim = 34;
inline constexpr int kNumJointActions = 14;

/// One-hot groups eld_action 7 (none last), eld_da 8 (none last), ot/l/o 3
/// each, then the two flags as 0/1, then search context 3 and last move 5.
/// The turn is not encoded.
nn::Vec encode_observation(const Observation& obs);
Observation observe(const HelTracker& t);
/// Joint-table indices whose action passes the precondition check.
std::vector<int> legal_pairs(const DialogueFlags& flags);

struct Transition {
  nn::Vec state;
  int action = 0;
  double reward = 0.0;
  nn::Vec next_state;
  bool terminal = false;
};

// Who plays ELD after the opening move. With a model, replies come from
// sim_respond: sampled at `temperature` when `sample`, argmax otherwise.
struct Responder {
  const SimModel* sim = nullptr;
  bool sample = true;
  double temperature = 1.0;

  static Responder scripted() { return {}; }
  static Responder learned(const SimModel& m, bool sample) { return {&m, sample, 1.0}; }
};

// Room contents to draw worlds from; empty means the full room.
struct RoomSpec {
  std::vector<ObjectId> objects;
  std::vector<Location> locations;

  static RoomSpec full() { return {}; }
  /// Two objects, two locations.
  static RoomSpec reduced();
};

// One HEL move and its outcome.
struct StepRecord {
  int turn = 0;  // 1-based HEL move number
  int pair = 0;
  HelMove hel;
  std::optional<EldMove> eld;  // absent on violations
  TaskState state;             // HEL state after the step
  DialogueFlags flags;
  BeliefState belief;
  double reward = 0.0;
  bool violation = false;
  bool terminal = false;
  bool success = false;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool terminal = false;
  StepRecord record;
};

class FindEnv {
 public:
  FindEnv(EpisodeParams params, Responder responder, RoomSpec room = RoomSpec::full(),
          EldParams eld = {});

  /// New random world from `seed`, then the scripted opening.
  Observation reset(std::uint64_t seed);
  /// Fixed world and suggestion order; `seed` drives the opening and errors.
  Observation reset(const WorldConfig& world, const std::vector<Location>& suggestion_order,
                    std::uint64_t seed);

  StepResult step(int pair_index);
  StepResult step(HelPair pair) { return step(hel_pair_index(pair)); }

  Observation observation() const;
  /// Joint indices whose action passes the precondition check now.
  std::vector<int> legal_pairs() const;

  bool done() const { return done_; }
  bool succeeded() const { return success_; }
  int turn() const { return tracker_.turn; }
  const HelTracker& tracker() const { return tracker_; }
  const EldContext& context() const { return ctx_; }
  const BeliefState& belief() const { return belief_; }
  const EldMove& opening() const { return opening_; }
  const EpisodeParams& params() const { return params_; }

 private:
  Observation start(std::uint64_t seed, Rng& rng);

  EpisodeParams params_;
  Responder responder_;
  RoomSpec room_;
  EldParams eld_;
  EldContext ctx_;
  HelTracker tracker_;
  BeliefState belief_;
  EldMove opening_;
  Rng eld_rng_;
  Rng err_rng_;
  Rng sim_rng_;
  bool active_ = false;
  bool done_ = false;
  bool success_ = false;
};

}  // namespace findrl
