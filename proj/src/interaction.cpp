#include "findrl/interaction.hpp"

#include <algorithm>
#include <stdexcept>

namespace findrl {

namespace {

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <typename T>
void add_unique(std::vector<T>& v, const T& x) {
  if (!contains(v, x)) v.push_back(x);
}

Belief decay(Belief b) { return b == Belief::WrongInMind ? Belief::NotKnown : b; }

DaTag give_da(Rng& rng, const EldParams& p) {
  return rng.bernoulli(p.command_rate) ? DaTag::Command : DaTag::Statement;
}

EldMove eld_move(EldActionLabel label, DaTag da) {
  EldMove m;
  m.action.label = label;
  m.da = da;
  return m;
}

// "I already told you" / "you haven't looked there yet": a reply that carries
// no new information.
EldMove non_informative() { return eld_move(EldActionLabel::Deny, DaTag::Statement); }

}  // namespace

std::optional<Location> EldContext::current_suggestion() const {
  if (suggestion_idx < 0 || suggestion_idx >= static_cast<int>(suggestion_order.size())) {
    return std::nullopt;
  }
  return suggestion_order[static_cast<std::size_t>(suggestion_idx)];
}

bool EldContext::suggestion_searched() const {
  auto s = current_suggestion();
  return s && contains(eld_searched, *s);
}

bool EldContext::advance_suggestion() {
  for (int i = suggestion_idx + 1; i < static_cast<int>(suggestion_order.size()); ++i) {
    if (!contains(eld_searched, suggestion_order[static_cast<std::size_t>(i)])) {
      suggestion_idx = i;
      return true;
    }
  }
  return false;
}

WorldConfig random_world(Rng& rng, const std::vector<ObjectId>& objects,
                         const std::vector<Location>& locations, std::uint64_t seed) {
  if (objects.empty() || locations.empty()) throw std::invalid_argument("empty world");
  WorldConfig w;
  w.objects = objects;
  w.locations = locations;
  w.seed = seed;
  w.placement.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    w.placement.push_back(locations[rng.below(locations.size())]);
  }
  w.target = objects[rng.below(objects.size())];
  return w;
}

WorldConfig random_world(Rng& rng, std::uint64_t seed) {
  const auto& o = all_objects();
  const auto& l = all_locations();
  return random_world(rng, {o.begin(), o.end()}, {l.begin(), l.end()}, seed);
}

EldContext make_context(const WorldConfig& world, Rng& rng) {
  EldContext ctx;
  ctx.world = world;
  ctx.suggestion_order = world.locations;
  rng.shuffle(ctx.suggestion_order);
  return ctx;
}

EldReply scripted_opening(EldContext& ctx, Rng& rng, const EldParams& params) {
  EldReply r;
  const bool both = rng.bernoulli(params.spontaneous_rate);
  r.move = eld_move(both ? EldActionLabel::GiveOTL : EldActionLabel::GiveOT, give_da(rng, params));
  r.move.action.object = ctx.world.target;
  r.belief.ot = Belief::Knows;
  if (both) {
    ctx.advance_suggestion();
    r.move.action.location = ctx.current_suggestion();
    r.belief.l = Belief::Knows;
  }
  return r;
}

EldReply scripted_eld(const BeliefState& belief, const HelMove& hel, EldContext& ctx, Rng& rng,
                      const EldParams& params) {
  using A = HelActionLabel;
  BeliefState b{decay(belief.ot), decay(belief.l), decay(belief.o)};
  EldMove m;
  const auto& target = ctx.world.target;

  switch (hel.action.label) {
    case A::RequestOT:
      if (b.ot != Belief::Knows) {
        m = eld_move(EldActionLabel::GiveOT, give_da(rng, params));
        m.action.object = target;
        b.ot = Belief::Knows;
      } else {
        m = non_informative();
      }
      break;

    case A::RequestL:
      if (b.l != Belief::Knows) {
        if (!ctx.current_suggestion() || ctx.suggestion_searched()) ctx.advance_suggestion();
        if (auto s = ctx.current_suggestion(); s && !ctx.suggestion_searched()) {
          m = eld_move(EldActionLabel::GiveL, give_da(rng, params));
          m.action.location = *s;
          b.l = Belief::Knows;
        } else {
          m = non_informative();
        }
      } else {
        m = non_informative();
      }
      break;

    case A::VerifyOT:
      if (hel.action.object && object_matches(*hel.action.object, target)) {
        m = eld_move(EldActionLabel::Affirm, DaTag::AffirmAnswer);
        b.ot = Belief::Knows;
      } else {
        m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
        b.ot = Belief::WrongInMind;
      }
      break;

    case A::VerifyL:
      if (hel.action.location && ctx.current_suggestion() == hel.action.location) {
        m = eld_move(EldActionLabel::Affirm, DaTag::AffirmAnswer);
        b.l = Belief::Knows;
      } else {
        m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
        b.l = Belief::WrongInMind;
      }
      break;

    case A::VerifyO:
    case A::PresentObject:
      if (ctx.found && hel.action.object && object_matches(*hel.action.object, target)) {
        m = eld_move(EldActionLabel::Affirm, DaTag::AffirmAnswer);
        b.o = Belief::Knows;
        b.ot = Belief::Knows;
      } else {
        m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
        b.o = Belief::WrongInMind;
      }
      break;

    case A::SearchLocation: {
      const auto s = ctx.current_suggestion();
      if (hel.action.location && s == hel.action.location && !ctx.suggestion_searched()) {
        ctx.eld_searched.push_back(*s);
        if (ctx.world.contains(*s, target)) {
          ctx.found = true;
          m = eld_move(EldActionLabel::Affirm, DaTag::AffirmAnswer);
        } else {
          m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
        }
      } else {
        // Opened somewhere ELD did not suggest, or a place already checked.
        m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
      }
      break;
    }

    case A::ReportNotFound:
      if (ctx.suggestion_searched() && !ctx.found && ctx.advance_suggestion()) {
        m = eld_move(EldActionLabel::GiveL, give_da(rng, params));
        m.action.location = ctx.current_suggestion();
        b.l = Belief::Knows;
      } else {
        m = non_informative();
      }
      break;

    case A::DeclareDone:
      if (b.o == Belief::Knows) {
        m = eld_move(EldActionLabel::Done, DaTag::Acknowledge);
      } else {
        m = eld_move(EldActionLabel::Deny, DaTag::DenyAnswer);
      }
      break;
  }
  return {m, b};
}

std::optional<HelActionLabel> HelTracker::last_label() const {
  if (!last_hel) return std::nullopt;
  return last_hel->action.label;
}

bool HelTracker::current_location_searched() const {
  return location_guess && contains(searched, *location_guess);
}

HelMove HelTracker::make_move(HelPair pair, const WorldConfig& world) const {
  using A = HelActionLabel;
  HelMove m;
  m.action.label = pair.action;
  m.da = pair.da;
  switch (pair.action) {
    case A::VerifyOT:
      m.action.object = object_guess;
      break;
    case A::VerifyL:
      m.action.location = location_guess;
      m.pointing = location_guess;
      break;
    case A::SearchLocation:
      m.action.location = location_guess;
      m.pointing = location_guess;
      m.ho = HoTag::OpenLocation;
      break;
    case A::VerifyO:
    case A::PresentObject: {
      m.action.location = location_guess;
      m.action.object = object_guess;
      if (found && object_guess && location_guess) {
        if (auto seen = world.find_at(*location_guess, *object_guess)) m.action.object = seen;
      }
      if (pair.action == A::PresentObject && m.action.object) m.ho = HoTag::ShowObject;
      break;
    }
    case A::ReportNotFound:
      m.action.location = location_guess;
      m.action.object = object_guess;
      break;
    case A::RequestOT:
    case A::RequestL:
    case A::DeclareDone:
      break;
  }
  return m;
}

void HelTracker::note_hel(const HelMove& m) {
  if (m.action.label == HelActionLabel::SearchLocation && m.action.location) {
    add_unique(searched, *m.action.location);
    found = false;
  }
  last_hel = m;
  ++turn;
}

void HelTracker::note_violation() { ++turn; }

GroundingStatus inject_error(GroundingStatus st, Rng& rng, double rate) {
  const double u = rng.uniform();
  if (st == GroundingStatus::Matched && u < rate) return GroundingStatus::Mismatched;
  return st;
}

GroundingUpdate HelTracker::absorb(const EldMove& m, const WorldConfig& world,
                                   const ErrorModel& errors) {
  using E = EldActionLabel;
  const auto prev = last_label();
  GroundingUpdate u = apply_grounding(state, flags, prev, m);

  const bool gives_ot = m.action.label == E::GiveOT || m.action.label == E::GiveOTL;
  const bool gives_l = m.action.label == E::GiveL || m.action.label == E::GiveOTL;
  if (gives_ot && m.action.object) {
    object_guess = m.action.object;
    add_unique(uttered_objects, *m.action.object);
  }
  if (gives_l && m.action.location) {
    if (location_guess != m.action.location) found = false;
    location_guess = m.action.location;
    add_unique(uttered_locations, *m.action.location);
  }
  if (prev == HelActionLabel::SearchLocation) {
    found = m.action.label == E::Affirm;
  }

  auto choose = [&](int fixed, std::size_t n) -> std::size_t {
    if (fixed >= 0) return static_cast<std::size_t>(fixed) % n;
    return errors.rng != nullptr ? errors.rng->below(n) : 0;
  };

  auto flip = [&](bool grounded, GroundingStatus& st, bool forced) {
    if (!grounded) return false;
    GroundingStatus after = st;
    if (errors.rng != nullptr && errors.rate > 0.0) after = inject_error(st, *errors.rng, errors.rate);
    if (forced && st == GroundingStatus::Matched) after = GroundingStatus::Mismatched;
    const bool flipped = after != st;
    st = after;
    return flipped;
  };

  if (flip(u.grounded_ot, u.state.ot, errors.force_ot) && object_guess) {
    // HEL misheard: it now holds some other object of the room.
    std::vector<ObjectId> others;
    for (const auto& o : world.objects) {
      if (!object_matches(*object_guess, o)) others.push_back(o);
    }
    if (!others.empty()) {
      const auto& pick = others[choose(errors.pick_ot, others.size())];
      object_guess = pick;
      add_unique(misheard_objects, pick);
    }
  }
  if (flip(u.grounded_l, u.state.l, errors.force_l) && location_guess) {
    std::vector<Location> others;
    for (Location l : world.locations) {
      if (l != *location_guess) others.push_back(l);
    }
    if (!others.empty()) {
      const Location pick = others[choose(errors.pick_l, others.size())];
      location_guess = pick;
      add_unique(misheard_locations, pick);
      found = false;
    }
  }
  flip(u.grounded_o, u.state.o, errors.force_o);

  state = u.state;
  flags = u.flags;
  last_eld = m;
  return u;
}

HelActionLabel scripted_expert(const TaskState& s, const DialogueFlags& flags,
                               const std::vector<Location>& searched,
                               const std::optional<Location>& current_location, bool found) {
  using A = HelActionLabel;
  using G = GroundingStatus;
  (void)flags;  // the rule order below never reaches a gated action unflagged
  if (s.o == G::Matched) return A::DeclareDone;
  if (s.ot == G::Unknown) return A::RequestOT;
  if (s.ot == G::Mismatched) return A::VerifyOT;
  if (s.l == G::Unknown) return A::RequestL;
  if (s.l == G::Mismatched) return A::VerifyL;
  if (!current_location || !contains(searched, *current_location)) return A::SearchLocation;
  if (found) return A::PresentObject;
  return A::ReportNotFound;
}

HelActionLabel scripted_expert(const HelTracker& t) {
  return scripted_expert(t.state, t.flags, t.searched, t.location_guess, t.found);
}

}  // namespace findrl
