#include <gtest/gtest.h>

#include <set>

#include "findrl/domain.hpp"
#include "findrl/interaction.hpp"

using namespace findrl;

namespace {

// Independent restatement of the three precondition rules.
bool oracle_violates(bool ot, bool l, HelActionLabel a) {
  using A = HelActionLabel;
  switch (a) {
    case A::VerifyOT:
      return !ot;
    case A::VerifyL:
    case A::SearchLocation:
      return !l;
    case A::VerifyO:
    case A::PresentObject:
      return !(ot && l);
    default:
      return false;
  }
}

EldMove eld(EldActionLabel a) {
  EldMove m;
  m.action.label = a;
  return m;
}

}  // namespace

TEST(Domain, SevenObjectsThreeLocations) {
  std::set<std::string> names;
  for (const auto& o : all_objects()) names.insert(object_name(o));
  EXPECT_EQ(names.size(), 7u);
  EXPECT_TRUE(names.count("white_ball"));
  EXPECT_FALSE(is_valid_object({ObjectKind::Cup, Color::White}));
  EXPECT_EQ(all_locations().size(), 3u);
}

TEST(Domain, PreconditionTruthTable) {
  int cases = 0;
  for (bool ot : {false, true}) {
    for (bool l : {false, true}) {
      for (auto a : all_hel_actions()) {
        const bool v = check_preconditions({ot, l}, a) == PreconditionResult::Violation;
        EXPECT_EQ(v, oracle_violates(ot, l, a)) << to_string(a) << " ot=" << ot << " l=" << l;
        ++cases;
      }
    }
  }
  EXPECT_EQ(cases, 36);
}

TEST(Domain, GroundingExamples) {
  EldMove give = eld(EldActionLabel::GiveOT);
  give.action.object = ObjectId{ObjectKind::Cup, Color::Red};
  auto u = apply_grounding({}, {}, std::nullopt, give);
  EXPECT_EQ(encode_task_state(u.state), 9);
  EXPECT_TRUE(u.flags.ot_uttered);
  EXPECT_FALSE(u.flags.l_uttered);

  EldMove gl = eld(EldActionLabel::GiveL);
  gl.action.location = Location::Shelf;
  using G = GroundingStatus;
  u = apply_grounding({G::Matched, G::Matched, G::Unknown}, {true, true}, HelActionLabel::RequestL, gl);
  EXPECT_EQ(u.state, (TaskState{G::Matched, G::Matched, G::Unknown}));

  u = apply_grounding({G::Mismatched, G::Unknown, G::Unknown}, {true, false}, HelActionLabel::VerifyOT,
                      eld(EldActionLabel::Deny));
  EXPECT_EQ(u.state, TaskState{});
  EXPECT_TRUE(u.flags.ot_uttered);
}

TEST(Domain, ObjectMatchedOnlyByAffirmedPresentOrVerify) {
  for (int code = 0; code < 27; ++code) {
    const TaskState s = decode_task_state(code);
    for (auto prev : all_hel_actions()) {
      for (auto a : all_eld_actions()) {
        EldMove m = eld(a);
        m.action.object = ObjectId{ObjectKind::Ball, Color::Red};
        m.action.location = Location::Drawer;
        auto u = apply_grounding(s, {true, true}, prev, m);
        if (u.state.o == GroundingStatus::Matched && s.o != GroundingStatus::Matched) {
          EXPECT_EQ(a, EldActionLabel::Affirm);
          EXPECT_TRUE(prev == HelActionLabel::VerifyO || prev == HelActionLabel::PresentObject);
        }
        // Flags never fall.
        EXPECT_TRUE(u.flags.ot_uttered && u.flags.l_uttered);
      }
    }
  }
}

TEST(Domain, EncodeIsBijective) {
  EXPECT_EQ(encode_task_state({}), 0);
  using G = GroundingStatus;
  EXPECT_EQ(encode_task_state({G::Mismatched, G::Mismatched, G::Mismatched}), 26);
  for (int c = 0; c < 27; ++c) EXPECT_EQ(encode_task_state(decode_task_state(c)), c);
  EXPECT_THROW(decode_task_state(27), std::out_of_range);
}

TEST(Domain, SuccessDefinition) {
  using G = GroundingStatus;
  const TaskState done{G::Matched, G::Matched, G::Matched};
  EXPECT_TRUE(is_success(done, HelActionLabel::PresentObject, eld(EldActionLabel::Affirm)));
  EXPECT_FALSE(is_success({G::Matched, G::Matched, G::Unknown}, HelActionLabel::VerifyL,
                          eld(EldActionLabel::Affirm)));
  EXPECT_FALSE(is_success(done, HelActionLabel::PresentObject, eld(EldActionLabel::Deny)));
  EXPECT_TRUE(is_success(done, HelActionLabel::DeclareDone, eld(EldActionLabel::Done)));
  // A confirmed VerifyO does not end the episode.
  EXPECT_FALSE(is_success(done, HelActionLabel::VerifyO, eld(EldActionLabel::Affirm)));
}

TEST(Domain, CanonicalNamesRoundTrip) {
  for (const auto& o : all_objects()) EXPECT_EQ(parse_object(object_name(o)), o);
  EXPECT_EQ(parse_object("cup"), (ObjectId{ObjectKind::Cup, Color::Any}));
  for (auto l : all_locations()) EXPECT_EQ(parse_location(to_string(l)), l);
  for (auto a : all_hel_actions()) EXPECT_EQ(parse_hel_action(to_string(a)), a);
  for (auto a : all_eld_actions()) EXPECT_EQ(parse_eld_action(to_string(a)), a);
  for (auto d : all_da_tags()) EXPECT_EQ(parse_da(to_string(d)), d);
  EXPECT_EQ(to_string(HelActionLabel::VerifyOT), "verify_ot");
  EXPECT_EQ(to_string(EldActionLabel::GiveOTL), "give_otl");
  EXPECT_EQ(to_string(DaTag::YNQuestion), "yn_question");
  EXPECT_THROW(parse_location("attic"), std::invalid_argument);
}

TEST(Domain, PairTableIsBijective) {
  const auto& t = hel_pair_table();
  EXPECT_EQ(t.size(), 14u);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(hel_pair_index(t[i]), static_cast<int>(i));
  for (auto a : all_hel_actions()) {
    EXPECT_EQ(canonical_pair(a).action, a);
    EXPECT_FALSE(valid_das(a).empty());
  }
  EXPECT_THROW(hel_pair_index({DaTag::Command, HelActionLabel::VerifyL}), std::invalid_argument);
}

TEST(Interaction, InjectErrorOnlyTouchesMatched) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(inject_error(GroundingStatus::Unknown, rng, 1.0), GroundingStatus::Unknown);
    EXPECT_EQ(inject_error(GroundingStatus::Mismatched, rng, 1.0), GroundingStatus::Mismatched);
  }
  EXPECT_EQ(inject_error(GroundingStatus::Matched, rng, 1.0), GroundingStatus::Mismatched);
  EXPECT_EQ(inject_error(GroundingStatus::Matched, rng, 0.0), GroundingStatus::Matched);
}

TEST(Interaction, ScriptedEldCoreRules) {
  Rng rng(11);
  WorldConfig w = random_world(rng, 3);
  EldContext ctx = make_context(w, rng);

  HelMove req;
  req.action.label = HelActionLabel::RequestOT;
  auto r = scripted_eld({}, req, ctx, rng);
  EXPECT_EQ(r.move.action.label, EldActionLabel::GiveOT);
  EXPECT_EQ(r.move.action.object, w.target);
  EXPECT_EQ(r.belief.ot, Belief::Knows);

  HelMove vot;
  vot.action.label = HelActionLabel::VerifyOT;
  vot.action.object = ObjectId{w.target.kind == ObjectKind::Cup ? ObjectKind::Ball : ObjectKind::Cup,
                               Color::Red};
  r = scripted_eld(r.belief, vot, ctx, rng);
  EXPECT_EQ(r.move.action.label, EldActionLabel::Deny);
  EXPECT_EQ(r.belief.ot, Belief::WrongInMind);
  // WrongInMind lasts one turn.
  HelMove rl;
  rl.action.label = HelActionLabel::RequestL;
  r = scripted_eld(r.belief, rl, ctx, rng);
  EXPECT_EQ(r.belief.ot, Belief::NotKnown);
  EXPECT_EQ(r.move.action.label, EldActionLabel::GiveL);
  EXPECT_EQ(r.move.action.location, ctx.suggestion_order.front());

  HelMove present;
  present.action.label = HelActionLabel::PresentObject;
  present.action.object = w.target;
  ctx.found = true;
  r = scripted_eld(r.belief, present, ctx, rng);
  EXPECT_EQ(r.move.action.label, EldActionLabel::Affirm);
  EXPECT_EQ(r.belief.o, Belief::Knows);
}

TEST(Interaction, ExpertPriorityExamples) {
  using G = GroundingStatus;
  using A = HelActionLabel;
  EXPECT_EQ(scripted_expert({}, {}, {}, std::nullopt, false), A::RequestOT);
  EXPECT_EQ(scripted_expert({G::Matched, G::Matched, G::Unknown}, {true, true}, {}, Location::Shelf,
                            false),
            A::SearchLocation);
  EXPECT_EQ(scripted_expert({G::Matched, G::Matched, G::Matched}, {true, true}, {Location::Shelf},
                            Location::Shelf, true),
            A::DeclareDone);
  EXPECT_EQ(scripted_expert({G::Matched, G::Matched, G::Unknown}, {true, true}, {Location::Shelf},
                            Location::Shelf, true),
            A::PresentObject);
  EXPECT_EQ(scripted_expert({G::Matched, G::Matched, G::Unknown}, {true, true}, {Location::Shelf},
                            Location::Shelf, false),
            A::ReportNotFound);
}

TEST(Interaction, ExpertAlwaysSucceedsWithoutErrors) {
  // Roll the expert against the scripted ELD with no noise; every episode
  // must succeed within the request-then-visit-every-location bound.
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    WorldConfig w = random_world(rng, seed);
    EldContext ctx = make_context(w, rng);
    HelTracker hel;
    auto open = scripted_opening(ctx, rng);
    BeliefState b = open.belief;
    hel.absorb(open.move, w, {});
    bool ok = false;
    for (int t = 0; t < 20 && !ok; ++t) {
      const auto a = scripted_expert(hel);
      ASSERT_EQ(check_preconditions(hel.flags, a), PreconditionResult::Ok);
      HelMove m = hel.make_move(canonical_pair(a), w);
      hel.note_hel(m);
      auto r = scripted_eld(b, m, ctx, rng);
      b = r.belief;
      hel.absorb(r.move, w, {});
      ok = is_success(hel.state, hel.last_label(), r.move);
    }
    EXPECT_TRUE(ok) << "seed " << seed;
    EXPECT_LE(hel.turn, 2 + 3 * kNumLocations) << "seed " << seed;
  }
}
