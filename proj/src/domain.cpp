#include "findrl/domain.hpp"

#include <algorithm>
#include <stdexcept>

namespace findrl {

namespace {

constexpr std::array<ObjectId, kNumObjects> kObjects = {{
    {ObjectKind::Cup, Color::Red},
    {ObjectKind::Cup, Color::Green},
    {ObjectKind::Cup, Color::Yellow},
    {ObjectKind::Ball, Color::Red},
    {ObjectKind::Ball, Color::Green},
    {ObjectKind::Ball, Color::Yellow},
    {ObjectKind::Ball, Color::White},
}};

constexpr std::array<Location, kNumLocations> kLocations = {Location::Drawer, Location::Shelf,
                                                            Location::Cabinet};

constexpr std::array<HelActionLabel, kNumHelActions> kHelActions = {
    HelActionLabel::RequestOT,      HelActionLabel::RequestL,      HelActionLabel::VerifyOT,
    HelActionLabel::VerifyL,        HelActionLabel::VerifyO,       HelActionLabel::SearchLocation,
    HelActionLabel::PresentObject,  HelActionLabel::ReportNotFound, HelActionLabel::DeclareDone,
};

constexpr std::array<EldActionLabel, kNumEldActions> kEldActions = {
    EldActionLabel::GiveOT, EldActionLabel::GiveL, EldActionLabel::GiveOTL,
    EldActionLabel::Affirm, EldActionLabel::Deny,  EldActionLabel::Done,
};

constexpr std::array<DaTag, kNumDaTags> kDaTags = {
    DaTag::Command,    DaTag::Statement,   DaTag::YNQuestion, DaTag::AffirmAnswer,
    DaTag::DenyAnswer, DaTag::Acknowledge, DaTag::Other,
};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& values, const char* what) {
  for (Enum v : values) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

bool requires_location(HelActionLabel a) {
  return a == HelActionLabel::SearchLocation || a == HelActionLabel::VerifyL;
}

bool requires_object(HelActionLabel a) {
  return a == HelActionLabel::VerifyOT || a == HelActionLabel::VerifyO ||
         a == HelActionLabel::PresentObject;
}

}  // namespace

const std::array<ObjectId, kNumObjects>& all_objects() { return kObjects; }
const std::array<Location, kNumLocations>& all_locations() { return kLocations; }
const std::array<HelActionLabel, kNumHelActions>& all_hel_actions() { return kHelActions; }
const std::array<EldActionLabel, kNumEldActions>& all_eld_actions() { return kEldActions; }
const std::array<DaTag, kNumDaTags>& all_da_tags() { return kDaTags; }

const std::vector<HelPair>& hel_pair_table() {
  using A = HelActionLabel;
  static const std::vector<HelPair> table = {
      {DaTag::Other, A::RequestOT},          {DaTag::Command, A::RequestOT},
      {DaTag::Other, A::RequestL},           {DaTag::Command, A::RequestL},
      {DaTag::YNQuestion, A::VerifyOT},      {DaTag::YNQuestion, A::VerifyL},
      {DaTag::YNQuestion, A::VerifyO},       {DaTag::Statement, A::SearchLocation},
      {DaTag::Acknowledge, A::SearchLocation}, {DaTag::Statement, A::PresentObject},
      {DaTag::YNQuestion, A::PresentObject}, {DaTag::Statement, A::ReportNotFound},
      {DaTag::Statement, A::DeclareDone},    {DaTag::Acknowledge, A::DeclareDone},
  };
  return table;
}

int hel_pair_index(const HelPair& p) {
  const auto& t = hel_pair_table();
  auto it = std::find(t.begin(), t.end(), p);
  if (it == t.end()) {
    throw std::invalid_argument("invalid (da, action) pair: " + std::string(to_string(p.da)) +
                                "/" + std::string(to_string(p.action)));
  }
  return static_cast<int>(it - t.begin());
}

HelPair canonical_pair(HelActionLabel a) {
  for (const auto& p : hel_pair_table()) {
    if (p.action == a) return p;
  }
  throw std::logic_error("action missing from pair table");
}

std::vector<DaTag> valid_das(HelActionLabel a) {
  std::vector<DaTag> out;
  for (const auto& p : hel_pair_table()) {
    if (p.action == a) out.push_back(p.da);
  }
  return out;
}

bool is_valid_object(const ObjectId& o) {
  return std::find(kObjects.begin(), kObjects.end(), o) != kObjects.end();
}

int object_index(const ObjectId& o) {
  auto it = std::find(kObjects.begin(), kObjects.end(), o);
  if (it == kObjects.end()) throw std::invalid_argument("not a concrete object: " + object_name(o));
  return static_cast<int>(it - kObjects.begin());
}

bool object_matches(const ObjectId& ref, const ObjectId& concrete) {
  if (ref.kind != concrete.kind) return false;
  return ref.color == Color::Any || ref.color == concrete.color;
}

bool is_well_formed(const HelMove& m) {
  const auto a = m.action.label;
  if (requires_location(a) && !m.action.location) return false;
  if (requires_object(a) && !m.action.object) return false;
  if (m.ho == HoTag::OpenLocation && a != HelActionLabel::SearchLocation) return false;
  if (m.ho == HoTag::ShowObject && a != HelActionLabel::PresentObject &&
      a != HelActionLabel::VerifyO)
    return false;
  return true;
}

bool is_well_formed(const EldMove& m) {
  switch (m.action.label) {
    case EldActionLabel::GiveOT:
      return m.action.object.has_value();
    case EldActionLabel::GiveL:
      return m.action.location.has_value();
    case EldActionLabel::GiveOTL:
      return m.action.object.has_value() && m.action.location.has_value();
    default:
      return true;
  }
}

Location WorldConfig::location_of(const ObjectId& o) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i] == o) return placement.at(i);
  }
  throw std::invalid_argument("object not in world: " + object_name(o));
}

bool WorldConfig::contains(Location loc, const ObjectId& ref) const {
  return find_at(loc, ref).has_value();
}

std::optional<ObjectId> WorldConfig::find_at(Location loc, const ObjectId& ref) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (placement[i] == loc && object_matches(ref, objects[i])) return objects[i];
  }
  return std::nullopt;
}

bool is_valid_world(const WorldConfig& w) {
  if (w.objects.empty() || w.locations.empty()) return false;
  if (w.placement.size() != w.objects.size()) return false;
  for (const auto& o : w.objects) {
    if (!is_valid_object(o)) return false;
  }
  for (Location l : w.placement) {
    if (std::find(w.locations.begin(), w.locations.end(), l) == w.locations.end()) return false;
  }
  return std::find(w.objects.begin(), w.objects.end(), w.target) != w.objects.end();
}

PreconditionResult check_preconditions(const DialogueFlags& flags, HelActionLabel a) {
  using A = HelActionLabel;
  const bool needs_ot = a == A::VerifyOT || a == A::VerifyO || a == A::PresentObject;
  const bool needs_l = a == A::VerifyL || a == A::SearchLocation;
  const bool needs_both = a == A::VerifyO || a == A::PresentObject;
  if (needs_ot && !flags.ot_uttered) return PreconditionResult::Violation;
  if (needs_l && !flags.l_uttered) return PreconditionResult::Violation;
  if (needs_both && !(flags.ot_uttered && flags.l_uttered)) return PreconditionResult::Violation;
  return PreconditionResult::Ok;
}

GroundingUpdate apply_grounding(const TaskState& s, const DialogueFlags& flags,
                                const std::optional<HelActionLabel>& prev_hel,
                                const EldMove& m) {
  using A = HelActionLabel;
  using G = GroundingStatus;
  GroundingUpdate u{s, flags};
  switch (m.action.label) {
    case EldActionLabel::GiveOT:
      u.state.ot = G::Matched;
      u.flags.ot_uttered = true;
      u.grounded_ot = true;
      break;
    case EldActionLabel::GiveL:
      u.state.l = G::Matched;
      u.flags.l_uttered = true;
      u.grounded_l = true;
      break;
    case EldActionLabel::GiveOTL:
      u.state.ot = G::Matched;
      u.state.l = G::Matched;
      u.flags.ot_uttered = true;
      u.flags.l_uttered = true;
      u.grounded_ot = true;
      u.grounded_l = true;
      break;
    case EldActionLabel::Affirm:
      if (!prev_hel) break;
      if (*prev_hel == A::VerifyOT && s.ot != G::Matched) {
        u.state.ot = G::Matched;
        u.grounded_ot = true;
      } else if (*prev_hel == A::VerifyL && s.l != G::Matched) {
        u.state.l = G::Matched;
        u.grounded_l = true;
      } else if (*prev_hel == A::VerifyO || *prev_hel == A::PresentObject) {
        // A confirmed object also confirms its type.
        u.state.o = G::Matched;
        u.state.ot = G::Matched;
        u.grounded_o = true;
      }
      break;
    case EldActionLabel::Deny:
      if (!prev_hel) break;
      if (*prev_hel == A::VerifyOT) {
        u.state.ot = G::Unknown;
      } else if (*prev_hel == A::VerifyL) {
        u.state.l = G::Unknown;
      } else if (*prev_hel == A::VerifyO || *prev_hel == A::PresentObject) {
        u.state.o = G::Unknown;
      }
      break;
    case EldActionLabel::Done:
      break;
  }
  return u;
}

int encode_task_state(const TaskState& s) {
  return 9 * static_cast<int>(s.ot) + 3 * static_cast<int>(s.l) + static_cast<int>(s.o);
}

TaskState decode_task_state(int code) {
  if (code < 0 || code > 26) throw std::out_of_range("task state code out of range");
  return TaskState{static_cast<GroundingStatus>(code / 9), static_cast<GroundingStatus>(code / 3 % 3),
                   static_cast<GroundingStatus>(code % 3)};
}

bool is_success(const TaskState& s, const std::optional<HelActionLabel>& prev_hel,
                const EldMove& last) {
  if (!prev_hel || s.o != GroundingStatus::Matched) return false;
  if (last.action.label == EldActionLabel::Affirm) return *prev_hel == HelActionLabel::PresentObject;
  if (last.action.label == EldActionLabel::Done) return *prev_hel == HelActionLabel::DeclareDone;
  return false;
}

std::string_view to_string(ObjectKind v) { return v == ObjectKind::Cup ? "cup" : "ball"; }

std::string_view to_string(Color v) {
  switch (v) {
    case Color::Red: return "red";
    case Color::Green: return "green";
    case Color::Yellow: return "yellow";
    case Color::White: return "white";
    case Color::Any: return "any";
  }
  return "?";
}

std::string_view to_string(Location v) {
  switch (v) {
    case Location::Drawer: return "drawer";
    case Location::Shelf: return "shelf";
    case Location::Cabinet: return "cabinet";
  }
  return "?";
}

std::string_view to_string(GroundingStatus v) {
  switch (v) {
    case GroundingStatus::Unknown: return "unknown";
    case GroundingStatus::Matched: return "matched";
    case GroundingStatus::Mismatched: return "mismatched";
  }
  return "?";
}

std::string_view to_string(Belief v) {
  switch (v) {
    case Belief::NotKnown: return "not_known";
    case Belief::Knows: return "knows";
    case Belief::WrongInMind: return "wrong_in_mind";
  }
  return "?";
}

std::string_view to_string(HelActionLabel v) {
  switch (v) {
    case HelActionLabel::RequestOT: return "request_ot";
    case HelActionLabel::RequestL: return "request_l";
    case HelActionLabel::VerifyOT: return "verify_ot";
    case HelActionLabel::VerifyL: return "verify_l";
    case HelActionLabel::VerifyO: return "verify_o";
    case HelActionLabel::SearchLocation: return "search_location";
    case HelActionLabel::PresentObject: return "present_object";
    case HelActionLabel::ReportNotFound: return "report_not_found";
    case HelActionLabel::DeclareDone: return "declare_done";
  }
  return "?";
}

std::string_view to_string(EldActionLabel v) {
  switch (v) {
    case EldActionLabel::GiveOT: return "give_ot";
    case EldActionLabel::GiveL: return "give_l";
    case EldActionLabel::GiveOTL: return "give_otl";
    case EldActionLabel::Affirm: return "affirm";
    case EldActionLabel::Deny: return "deny";
    case EldActionLabel::Done: return "done";
  }
  return "?";
}

std::string_view to_string(DaTag v) {
  switch (v) {
    case DaTag::Command: return "command";
    case DaTag::Statement: return "statement";
    case DaTag::YNQuestion: return "yn_question";
    case DaTag::AffirmAnswer: return "affirm_answer";
    case DaTag::DenyAnswer: return "deny_answer";
    case DaTag::Acknowledge: return "acknowledge";
    case DaTag::Other: return "other";
  }
  return "?";
}

std::string_view to_string(HoTag v) {
  switch (v) {
    case HoTag::None: return "none";
    case HoTag::OpenLocation: return "open_location";
    case HoTag::ShowObject: return "show_object";
  }
  return "?";
}

std::string_view to_string(Speaker v) { return v == Speaker::Eld ? "eld" : "hel"; }

std::string object_name(const ObjectId& o) {
  if (o.color == Color::Any) return std::string(to_string(o.kind));
  return std::string(to_string(o.color)) + "_" + std::string(to_string(o.kind));
}

std::string object_phrase(const ObjectId& o) {
  if (o.color == Color::Any) return std::string(to_string(o.kind));
  return std::string(to_string(o.color)) + " " + std::string(to_string(o.kind));
}

ObjectId parse_object(std::string_view s) {
  if (s == "cup") return {ObjectKind::Cup, Color::Any};
  if (s == "ball") return {ObjectKind::Ball, Color::Any};
  for (const auto& o : kObjects) {
    if (object_name(o) == s) return o;
  }
  throw std::invalid_argument("unknown object '" + std::string(s) + "'");
}

Location parse_location(std::string_view s) { return parse_enum(s, kLocations, "location"); }

GroundingStatus parse_grounding(std::string_view s) {
  static constexpr std::array<GroundingStatus, 3> v = {
      GroundingStatus::Unknown, GroundingStatus::Matched, GroundingStatus::Mismatched};
  return parse_enum(s, v, "grounding status");
}

Belief parse_belief(std::string_view s) {
  static constexpr std::array<Belief, 3> v = {Belief::NotKnown, Belief::Knows,
                                              Belief::WrongInMind};
  return parse_enum(s, v, "belief");
}

HelActionLabel parse_hel_action(std::string_view s) {
  return parse_enum(s, kHelActions, "hel action");
}

EldActionLabel parse_eld_action(std::string_view s) {
  return parse_enum(s, kEldActions, "eld action");
}

DaTag parse_da(std::string_view s) { return parse_enum(s, kDaTags, "dialogue act"); }

HoTag parse_ho(std::string_view s) {
  static constexpr std::array<HoTag, 3> v = {HoTag::None, HoTag::OpenLocation, HoTag::ShowObject};
  return parse_enum(s, v, "h-o tag");
}

}  // namespace findrl
