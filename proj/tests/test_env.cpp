#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "findrl/env.hpp"

using namespace findrl;

namespace {

using A = HelActionLabel;
using G = GroundingStatus;

int expert_pair(const FindEnv& env) { return hel_pair_index(canonical_pair(scripted_expert(env.tracker()))); }

EpisodeParams error_free() {
  EpisodeParams p;
  p.error_rate = 0.0;
  return p;
}

// First seed whose opening satisfies `pred`.
std::uint64_t seed_where(FindEnv& env, auto pred) {
  for (std::uint64_t s = 0; s < 10000; ++s) {
    env.reset(s);
    if (pred(env)) return s;
  }
  ADD_FAILURE() << "no seed found";
  return 0;
}

}  // namespace

TEST(Env, ParamsValidation) {
  EXPECT_NO_THROW(EpisodeParams{}.validate());
  EpisodeParams p;
  p.max_turns = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.error_rate = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.gamma = 0.0;
  EXPECT_THROW(FindEnv(p, Responder::scripted()), std::invalid_argument);
}

TEST(Env, ObservationEncodingGroups) {
  std::set<nn::Vec> seen;
  for (int code = 0; code < 27; ++code) {
    Observation o;
    o.eld_action = EldActionLabel::Affirm;
    o.eld_da = DaTag::AffirmAnswer;
    o.hel_state = decode_task_state(code);
    o.flags = {true, code % 2 == 0};
    o.search = static_cast<SearchContext>(code % 3);
    o.last_move = static_cast<LastMove>(code % 5);
    o.turn = code;
    const auto x = encode_observation(o);
    ASSERT_EQ(x.size(), 34u);
    EXPECT_EQ(x, encode_observation(o));
    // One hot entry in each of the seven one-hot groups.
    const int bounds[][2] = {{0, 7}, {7, 15}, {15, 18}, {18, 21}, {21, 24}, {26, 29}, {29, 34}};
    for (const auto& b : bounds) EXPECT_EQ(std::count(x.begin() + b[0], x.begin() + b[1], 1.0), 1);
    EXPECT_EQ(std::count(x.begin(), x.end(), 1.0), 7 + 1 + (o.flags.l_uttered ? 1 : 0));
    EXPECT_EQ(x[25], o.flags.l_uttered ? 1.0 : 0.0);
    EXPECT_EQ(x[26 + code % 3], 1.0);
    EXPECT_EQ(x[29 + code % 5], 1.0);
    o.turn = 0;
    o.flags = {};
    o.search = {};
    o.last_move = {};
    seen.insert(encode_observation(o));
    o.turn = 99;
    EXPECT_EQ(encode_observation(o), *seen.find(encode_observation(o)));  // turn is not encoded
  }
  EXPECT_EQ(seen.size(), 27u);  // distinct states, distinct vectors
  const auto none = encode_observation(Observation{});
  EXPECT_EQ(none[6], 1.0);
  EXPECT_EQ(none[14], 1.0);
}

TEST(Env, SearchContextFollowsTheTracker) {
  FindEnv env(error_free(), Responder::scripted());
  env.reset(seed_where(env, [](const FindEnv& e) { return !e.tracker().flags.l_uttered; }));
  EXPECT_EQ(env.observation().search, SearchContext::Unsearched);
  EXPECT_EQ(env.observation().last_move, LastMove::None);
  env.step(canonical_pair(A::RequestL));
  EXPECT_EQ(env.observation().last_move, LastMove::Request);
  const auto r = env.step(canonical_pair(A::SearchLocation));
  EXPECT_EQ(r.obs.last_move, LastMove::Search);
  const bool there = env.context().world.location_of(env.context().world.target) == *env.tracker().location_guess;
  EXPECT_EQ(r.obs.search, there ? SearchContext::Found : SearchContext::NotFound);
  env.step(canonical_pair(A::SearchLocation));  // violation leaves the context alone
  EXPECT_EQ(env.observation().last_move, LastMove::Search);
}

TEST(Env, ResetIsDeterministicAndStartsAtTurnZero) {
  FindEnv a(EpisodeParams{}, Responder::scripted());
  FindEnv b(EpisodeParams{}, Responder::scripted());
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto oa = a.reset(s);
    EXPECT_EQ(oa, b.reset(s));
    EXPECT_EQ(oa.turn, 0);
    EXPECT_EQ(a.context(), b.context());
    EXPECT_EQ(a.opening(), b.opening());
  }
}

TEST(Env, OpeningStatesAreTheSixReachableOnes) {
  const std::set<int> allowed = {encode_task_state({G::Matched, G::Unknown, G::Unknown}),
                                 encode_task_state({G::Mismatched, G::Unknown, G::Unknown}),
                                 encode_task_state({G::Matched, G::Matched, G::Unknown}),
                                 encode_task_state({G::Mismatched, G::Matched, G::Unknown}),
                                 encode_task_state({G::Matched, G::Mismatched, G::Unknown}),
                                 encode_task_state({G::Mismatched, G::Mismatched, G::Unknown})};
  FindEnv env(EpisodeParams{}, Responder::scripted());
  std::set<int> seen;
  int ot_flips = 0;
  const int n = 10000;
  for (int s = 0; s < n; ++s) {
    const auto o = env.reset(static_cast<std::uint64_t>(s));
    const int code = encode_task_state(o.hel_state);
    EXPECT_TRUE(allowed.count(code)) << code;
    seen.insert(code);
    ot_flips += o.hel_state.ot == G::Mismatched;
  }
  EXPECT_EQ(seen, allowed);
  // The opening always grounds O_T, so this is the error module's flip rate.
  const double f = static_cast<double>(ot_flips) / n;
  EXPECT_GE(f, 0.235);
  EXPECT_LE(f, 0.265);
}

TEST(Env, InjectErrorFlipFraction) {
  Rng rng(2024);
  int flips = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) flips += inject_error(G::Matched, rng, 0.25) == G::Mismatched;
  const double f = static_cast<double>(flips) / n;
  EXPECT_GE(f, 0.235);
  EXPECT_LE(f, 0.265);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(inject_error(G::Unknown, rng, 1.0), G::Unknown);
    EXPECT_EQ(inject_error(G::Mismatched, rng, 1.0), G::Mismatched);
  }
}

TEST(Env, ViolationCostsZAndLeavesStateUnchanged) {
  FindEnv env(error_free(), Responder::scripted());
  seed_where(env, [](const FindEnv& e) { return !e.tracker().flags.l_uttered; });
  const auto before = env.observation();
  for (A a : {A::VerifyL, A::SearchLocation, A::VerifyO, A::PresentObject}) {
    const auto r = env.step(canonical_pair(a));
    EXPECT_EQ(r.reward, -50.0);
    EXPECT_FALSE(r.terminal);
    EXPECT_TRUE(r.record.violation);
    EXPECT_FALSE(r.record.eld.has_value());
    Observation expect = before;
    expect.turn = r.obs.turn;
    EXPECT_EQ(r.obs, expect);
  }
  EXPECT_EQ(env.turn(), 4);
  // The agent may recover.
  EXPECT_EQ(env.step(canonical_pair(A::RequestL)).reward, -1.0);
}

TEST(Env, PresentAnsweredAffirmAtTurnFiveEndsWithTwoR) {
  FindEnv env(error_free(), Responder::scripted());
  // GiveOT opening and the target is not at ELD's first suggestion:
  // RequestL, Search (empty), ReportNotFound, Search, Present.
  seed_where(env, [](const FindEnv& e) {
    const auto& c = e.context();
    return !e.tracker().flags.l_uttered && c.suggestion_order[0] != c.world.location_of(c.world.target) &&
           c.suggestion_order[1] == c.world.location_of(c.world.target);
  });
  std::vector<A> plan = {A::RequestL, A::SearchLocation, A::ReportNotFound, A::SearchLocation, A::PresentObject};
  double ret = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(scripted_expert(env.tracker()), plan[i]) << i;
    const auto r = env.step(canonical_pair(plan[i]));
    ret += r.reward;
    if (i + 1 < plan.size()) {
      EXPECT_EQ(r.reward, -1.0);
      EXPECT_FALSE(r.terminal);
    } else {
      EXPECT_EQ(r.record.eld->action.label, EldActionLabel::Affirm);
      EXPECT_EQ(r.reward, 2.0);
      EXPECT_TRUE(r.terminal);
      EXPECT_EQ(r.record.turn, 5);
    }
  }
  EXPECT_TRUE(env.succeeded());
  EXPECT_DOUBLE_EQ(ret, -4.0 + 2.0);
  EXPECT_THROW(env.step(0), std::logic_error);
}

TEST(Env, TwentiethTurnWithoutSuccessCostsTwoR) {
  FindEnv env(error_free(), Responder::scripted());
  env.reset(7);
  for (int t = 1; t <= 20; ++t) {
    const auto r = env.step(canonical_pair(A::RequestOT));
    if (t < 20) {
      EXPECT_EQ(r.reward, -1.0) << t;
      EXPECT_FALSE(r.terminal);
    } else {
      EXPECT_EQ(r.reward, -2.0);
      EXPECT_TRUE(r.terminal);
      EXPECT_FALSE(env.succeeded());
    }
  }
  EXPECT_THROW(env.step(0), std::logic_error);

  // A violation on the last allowed move also ends the episode.
  env.reset(seed_where(env, [](const FindEnv& e) { return !e.tracker().flags.l_uttered; }));
  for (int t = 1; t < 20; ++t) env.step(canonical_pair(A::RequestOT));
  const auto last = env.step(canonical_pair(A::SearchLocation));
  EXPECT_EQ(last.reward, -50.0);
  EXPECT_TRUE(last.terminal);
}

TEST(Env, StepGuards) {
  FindEnv env(EpisodeParams{}, Responder::scripted());
  EXPECT_THROW(env.step(0), std::logic_error);
  env.reset(1);
  EXPECT_THROW(env.step(14), std::out_of_range);
  EXPECT_THROW(env.step(-1), std::out_of_range);
}

TEST(Env, ExpertSucceedsEveryErrorFreeEpisode) {
  FindEnv env(error_free(), Responder::scripted());
  for (std::uint64_t s = 0; s < 1000; ++s) {
    env.reset(s);
    double ret = 0.0;
    int k = 0;
    while (!env.done()) {
      const auto r = env.step(expert_pair(env));
      EXPECT_FALSE(r.record.violation);
      ret += r.reward;
      ++k;
    }
    ASSERT_TRUE(env.succeeded()) << "seed " << s;
    EXPECT_DOUBLE_EQ(ret, -(k - 1) + 2.0);
  }
}

TEST(Env, RewardsStayInTheFourValuesWithErrors) {
  FindEnv env(EpisodeParams{}, Responder::scripted());
  Rng pick(3);
  for (std::uint64_t s = 0; s < 300; ++s) {
    env.reset(s);
    int k = 0;
    while (!env.done()) {
      const auto r = env.step(static_cast<int>(pick.below(kNumJointActions)));
      EXPECT_TRUE(r.reward == -1.0 || r.reward == 2.0 || r.reward == -2.0 || r.reward == -50.0) << r.reward;
      ++k;
    }
    EXPECT_LE(k, 20);
  }
}

TEST(Env, ReducedRoomAndFixedWorldReset) {
  FindEnv env(error_free(), Responder::scripted(), RoomSpec::reduced());
  for (std::uint64_t s = 0; s < 20; ++s) {
    env.reset(s);
    EXPECT_EQ(env.context().world.objects.size(), 2u);
    EXPECT_EQ(env.context().world.locations.size(), 2u);
  }
  const WorldConfig w = env.context().world;
  const std::vector<Location> order = {Location::Shelf, Location::Drawer};
  env.reset(w, order, 5);
  EXPECT_EQ(env.context().world, w);
  EXPECT_EQ(env.context().suggestion_order, order);
  WorldConfig bad = w;
  bad.placement.pop_back();
  EXPECT_THROW(env.reset(bad, order, 5), std::invalid_argument);
}

TEST(Env, LearnedResponderEpisodes) {
  const auto split = split_corpus(augment_corpus(generate_corpus(60, 4), 4), 4);
  SimHyper h;
  h.max_epochs = 5;
  const SimModel sim = train_sim(split, 4, h);
  for (bool sample : {true, false}) {
    FindEnv a(EpisodeParams{}, Responder::learned(sim, sample));
    FindEnv b(EpisodeParams{}, Responder::learned(sim, sample));
    for (std::uint64_t s = 0; s < 100; ++s) {
      a.reset(s);
      b.reset(s);
      while (!a.done()) {
        const int p = expert_pair(a);
        const auto ra = a.step(p);
        const auto rb = b.step(p);
        EXPECT_EQ(ra.obs, rb.obs);
        EXPECT_EQ(ra.reward, rb.reward);
        ASSERT_TRUE(ra.record.eld.has_value());
        EXPECT_TRUE(is_well_formed(*ra.record.eld));
      }
      EXPECT_LE(a.turn(), 20);
    }
  }
}
