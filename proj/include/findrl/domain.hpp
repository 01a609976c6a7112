#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace findrl {

// ---------------------------------------------------------------------------
// Objects and locations of the Find task.
// ---------------------------------------------------------------------------

enum class ObjectKind : std::uint8_t { Cup, Ball };
enum class Color : std::uint8_t { Red, Green, Yellow, White, Any };
enum class Location : std::uint8_t { Drawer, Shelf, Cabinet };

inline constexpr int kNumObjects = 7;
inline constexpr int kNumLocations = 3;

// A concrete object, or a kind with a color wildcard when the user has not
// said which color yet ("get me a cup").
struct ObjectId {
  ObjectKind kind = ObjectKind::Cup;
  Color color = Color::Red;

  bool underspecified() const { return color == Color::Any; }
  friend bool operator==(const ObjectId&, const ObjectId&) = default;
};

/// The seven objects of the study room, indexed 0..6 (cups first).
const std::array<ObjectId, kNumObjects>& all_objects();
const std::array<Location, kNumLocations>& all_locations();

bool is_valid_object(const ObjectId& o);
/// Index in all_objects(); throws for wildcard or invalid combinations.
int object_index(const ObjectId& o);
inline int location_index(Location l) { return static_cast<int>(l); }

/// True when `ref` names `concrete`, treating a color wildcard as a match.
bool object_matches(const ObjectId& ref, const ObjectId& concrete);

// ---------------------------------------------------------------------------
// Grounding state.
// ---------------------------------------------------------------------------

enum class GroundingStatus : std::uint8_t { Unknown = 0, Matched = 1, Mismatched = 2 };

// HEL's view of (O_T, L, O).
struct TaskState {
  GroundingStatus ot = GroundingStatus::Unknown;
  GroundingStatus l = GroundingStatus::Unknown;
  GroundingStatus o = GroundingStatus::Unknown;
  friend bool operator==(const TaskState&, const TaskState&) = default;
};

enum class Belief : std::uint8_t { NotKnown = 0, Knows = 1, WrongInMind = 2 };

// ELD's belief of what HEL knows about (O_T, L, O).
struct BeliefState {
  Belief ot = Belief::NotKnown;
  Belief l = Belief::NotKnown;
  Belief o = Belief::NotKnown;
  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

struct DialogueFlags {
  bool ot_uttered = false;
  bool l_uttered = false;
  friend bool operator==(const DialogueFlags&, const DialogueFlags&) = default;
};

// ---------------------------------------------------------------------------
// Actions, dialogue acts, moves.
// ---------------------------------------------------------------------------

enum class HelActionLabel : std::uint8_t {
  RequestOT,
  RequestL,
  VerifyOT,
  VerifyL,
  VerifyO,
  SearchLocation,
  PresentObject,
  ReportNotFound,
  DeclareDone,
};
inline constexpr int kNumHelActions = 9;

enum class EldActionLabel : std::uint8_t { GiveOT, GiveL, GiveOTL, Affirm, Deny, Done };
inline constexpr int kNumEldActions = 6;

enum class DaTag : std::uint8_t {
  Command,
  Statement,
  YNQuestion,
  AffirmAnswer,
  DenyAnswer,
  Acknowledge,
  Other,
};
inline constexpr int kNumDaTags = 7;

enum class HoTag : std::uint8_t { None, OpenLocation, ShowObject };
enum class Speaker : std::uint8_t { Eld, Hel };

struct HelAction {
  HelActionLabel label = HelActionLabel::RequestOT;
  std::optional<ObjectId> object;
  std::optional<Location> location;
  friend bool operator==(const HelAction&, const HelAction&) = default;
};

struct EldAction {
  EldActionLabel label = EldActionLabel::GiveOT;
  std::optional<ObjectId> object;
  std::optional<Location> location;
  friend bool operator==(const EldAction&, const EldAction&) = default;
};

struct HelMove {
  HelAction action;
  DaTag da = DaTag::Statement;
  std::optional<Location> pointing;
  HoTag ho = HoTag::None;
  std::string utterance;
  friend bool operator==(const HelMove&, const HelMove&) = default;
};

struct EldMove {
  EldAction action;
  DaTag da = DaTag::Statement;
  std::optional<Location> pointing;
  std::string utterance;
  friend bool operator==(const EldMove&, const EldMove&) = default;
};

// Checks the argument/modality consistency rules of a HEL move:
// SearchLocation/VerifyL need a location, VerifyOT/VerifyO/PresentObject an
// object, OpenLocation only with SearchLocation, ShowObject only with
// PresentObject or VerifyO.
bool is_well_formed(const HelMove& m);
bool is_well_formed(const EldMove& m);

// ---------------------------------------------------------------------------
// World.
// ---------------------------------------------------------------------------

struct WorldConfig {
  std::vector<ObjectId> objects;      // objects present in the room
  std::vector<Location> locations;    // locations present in the room
  std::vector<Location> placement;    // parallel to `objects`
  ObjectId target;
  std::uint64_t seed = 0;

  Location location_of(const ObjectId& o) const;
  bool contains(Location loc, const ObjectId& ref) const;
  /// First object at `loc` matching `ref`, if any.
  std::optional<ObjectId> find_at(Location loc, const ObjectId& ref) const;
  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

bool is_valid_world(const WorldConfig& w);

// ---------------------------------------------------------------------------
// Rules.
// ---------------------------------------------------------------------------

enum class PreconditionResult : std::uint8_t { Ok, Violation };

PreconditionResult check_preconditions(const DialogueFlags& flags, HelActionLabel a);

// Which slots an ELD move grounded (became Matched by that move). The error
// module acts on these.
struct GroundingUpdate {
  TaskState state;
  DialogueFlags flags;
  bool grounded_ot = false;
  bool grounded_l = false;
  bool grounded_o = false;
};

/// HEL-side state update for an ELD move answering `prev_hel` (the HEL move
/// the ELD responded to; absent for the opening move).
GroundingUpdate apply_grounding(const TaskState& s, const DialogueFlags& flags,
                                const std::optional<HelActionLabel>& prev_hel,
                                const EldMove& m);

int encode_task_state(const TaskState& s);
TaskState decode_task_state(int code);

/// Terminal success: ELD affirmed a presented object, or acknowledged a
/// DeclareDone once the object was confirmed; in both cases o must be Matched.
bool is_success(const TaskState& s, const std::optional<HelActionLabel>& prev_hel,
                const EldMove& last);

// ---------------------------------------------------------------------------
// Canonical text names (lowercase snake case), used by every serializer.
// ---------------------------------------------------------------------------

std::string_view to_string(ObjectKind v);
std::string_view to_string(Color v);
std::string_view to_string(Location v);
std::string_view to_string(GroundingStatus v);
std::string_view to_string(Belief v);
std::string_view to_string(HelActionLabel v);
std::string_view to_string(EldActionLabel v);
std::string_view to_string(DaTag v);
std::string_view to_string(HoTag v);
std::string_view to_string(Speaker v);
/// "red_cup", or the bare kind ("cup") for a wildcard.
std::string object_name(const ObjectId& o);
/// "red cup" / "cup", for rendering.
std::string object_phrase(const ObjectId& o);

// Parsers for the canonical names; throw std::invalid_argument naming the text.
ObjectId parse_object(std::string_view s);
Location parse_location(std::string_view s);
GroundingStatus parse_grounding(std::string_view s);
Belief parse_belief(std::string_view s);
HelActionLabel parse_hel_action(std::string_view s);
EldActionLabel parse_eld_action(std::string_view s);
DaTag parse_da(std::string_view s);
HoTag parse_ho(std::string_view s);

// Valid (DA, HEL action) pairs; the policy's joint output head is indexed by
// this table. The first pair listed for an action is its canonical pairing.
struct HelPair {
  DaTag da;
  HelActionLabel action;
  friend bool operator==(const HelPair&, const HelPair&) = default;
};
const std::vector<HelPair>& hel_pair_table();
/// Index of `p` in hel_pair_table(); throws for pairs outside the table.
int hel_pair_index(const HelPair& p);
HelPair canonical_pair(HelActionLabel a);
std::vector<DaTag> valid_das(HelActionLabel a);

const std::array<HelActionLabel, kNumHelActions>& all_hel_actions();
const std::array<EldActionLabel, kNumEldActions>& all_eld_actions();
const std::array<DaTag, kNumDaTags>& all_da_tags();

}  // namespace findrl
