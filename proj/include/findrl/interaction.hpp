#pragma once

#include <optional>
#include <vector>

#include "findrl/domain.hpp"
#include "findrl/rng.hpp"

namespace findrl {

// World-side state of one episode as the ELD sees it: the room, the order in
// which ELD will suggest locations, which suggested locations have been
// opened, and whether the target has been seen.
struct EldContext {
  WorldConfig world;
  std::vector<Location> suggestion_order;
  int suggestion_idx = -1;             // index into suggestion_order; -1 before any suggestion
  std::vector<Location> eld_searched;  // suggested locations HEL has opened
  bool found = false;                  // target visible in an opened suggested location

  std::optional<Location> current_suggestion() const;
  bool suggestion_searched() const;
  /// Advance to the next suggestion not yet opened; false when none remain.
  bool advance_suggestion();
  friend bool operator==(const EldContext&, const EldContext&) = default;
};

/// Random placement and target over the given objects and locations.
WorldConfig random_world(Rng& rng, const std::vector<ObjectId>& objects,
                         const std::vector<Location>& locations, std::uint64_t seed);
/// Full seven-object, three-location room.
WorldConfig random_world(Rng& rng, std::uint64_t seed);

EldContext make_context(const WorldConfig& world, Rng& rng);

struct EldParams {
  double spontaneous_rate = 0.15;  // opening GiveOTL instead of GiveOT
  double command_rate = 0.8;       // share of Give* moves phrased as commands
};

struct EldReply {
  EldMove move;
  BeliefState belief;
};

/// The opening ELD move: GiveOT(target), or GiveOTL with ELD's first
/// suggested location with probability `spontaneous_rate`.
EldReply scripted_opening(EldContext& ctx, Rng& rng, const EldParams& params = {});

/// Rule-based ELD response to a HEL move. Updates `ctx` (suggestions, opened
/// locations, target seen). WrongInMind beliefs revert to NotKnown on the turn
/// after they were formed.
EldReply scripted_eld(const BeliefState& belief, const HelMove& hel, EldContext& ctx, Rng& rng,
                      const EldParams& params = {});

// HEL-side bookkeeping: the task state the policy observes plus the concrete
// values HEL currently holds for each slot, which are used to fill action
// arguments.
struct HelTracker {
  TaskState state;
  DialogueFlags flags;
  std::optional<ObjectId> object_guess;
  std::optional<Location> location_guess;
  std::vector<Location> searched;  // locations HEL has opened
  bool found = false;              // ELD confirmed the target in the opened location
  std::optional<HelMove> last_hel;
  std::optional<EldMove> last_eld;
  int turn = 0;  // HEL moves taken

  // Everything ever uttered by ELD and everything HEL misheard; used by the
  // non-eligible audit.
  std::vector<ObjectId> uttered_objects;
  std::vector<Location> uttered_locations;
  std::vector<ObjectId> misheard_objects;
  std::vector<Location> misheard_locations;

  std::optional<HelActionLabel> last_label() const;
  bool current_location_searched() const;

  /// Builds the concrete move for a (DA, action) choice; arguments come from
  /// the values HEL currently holds.
  HelMove make_move(HelPair pair, const WorldConfig& world) const;

  /// Records a HEL move that passed the precondition check.
  void note_hel(const HelMove& m);
  /// Records a HEL move rejected by the precondition check.
  void note_violation();

  struct ErrorModel {
    double rate = 0.0;
    Rng* rng = nullptr;
    // Forced flips used by corpus augmentation, applied when the slot grounds.
    bool force_ot = false;
    bool force_l = false;
    bool force_o = false;
    // Which wrong value a flip lands on, as an index into the alternatives;
    // -1 draws it from `rng`. Used to enumerate error branches exhaustively.
    int pick_ot = -1;
    int pick_l = -1;
  };

  /// Applies an ELD move: grounding update, then error injection on the
  /// slots that move grounded. Returns the post-injection update.
  GroundingUpdate absorb(const EldMove& m, const WorldConfig& world, const ErrorModel& errors);

  friend bool operator==(const HelTracker&, const HelTracker&) = default;
};

/// Matched -> Mismatched with probability `rate`; other statuses unchanged.
GroundingStatus inject_error(GroundingStatus st, Rng& rng, double rate);

/// Priority-rule expert used as the DAGGER oracle and corpus HEL.
HelActionLabel scripted_expert(const TaskState& s, const DialogueFlags& flags,
                               const std::vector<Location>& searched,
                               const std::optional<Location>& current_location, bool found);
HelActionLabel scripted_expert(const HelTracker& t);

}  // namespace findrl
