#include "findrl/env.hpp"

#include <stdexcept>

namespace findrl {

void EpisodeParams::validate() const {
  if (max_turns < 1) throw std::invalid_argument("max_turns must be at least 1");
  if (!(move_cost > 0.0)) throw std::invalid_argument("move_cost must be positive");
  if (!(violation_penalty > 0.0)) throw std::invalid_argument("violation_penalty must be positive");
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw std::invalid_argument("error_rate must be in [0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
}

nn::Vec encode_observation(const Observation& obs) {
  nn::Vec x(kObsDim, 0.0);
  auto hot = [&](int offset, int idx) { x[static_cast<std::size_t>(offset + idx)] = 1.0; };
  hot(0, obs.eld_action ? static_cast<int>(*obs.eld_action) : kNumEldActions);
  hot(7, obs.eld_da ? static_cast<int>(*obs.eld_da) : kNumDaTags);
  hot(15, static_cast<int>(obs.hel_state.ot));
  hot(18, static_cast<int>(obs.hel_state.l));
  hot(21, static_cast<int>(obs.hel_state.o));
  x[24] = obs.flags.ot_uttered ? 1.0 : 0.0;
  x[25] = obs.flags.l_uttered ? 1.0 : 0.0;
  hot(26, static_cast<int>(obs.search));
  hot(29, static_cast<int>(obs.last_move));
  return x;
}

SearchContext search_context(const HelTracker& t) {
  if (!t.location_guess || !t.current_location_searched()) return SearchContext::Unsearched;
  return t.found ? SearchContext::Found : SearchContext::NotFound;
}

LastMove last_move_kind(const std::optional<HelActionLabel>& a) {
  using A = HelActionLabel;
  if (!a) return LastMove::None;
  switch (*a) {
    case A::RequestOT:
    case A::RequestL:
      return LastMove::Request;
    case A::VerifyOT:
    case A::VerifyL:
    case A::VerifyO:
      return LastMove::Verify;
    case A::SearchLocation:
      return LastMove::Search;
    default:
      return LastMove::Other;
  }
}

RoomSpec RoomSpec::reduced() {
  return {{{ObjectKind::Cup, Color::Red}, {ObjectKind::Ball, Color::Green}}, {Location::Drawer, Location::Shelf}};
}

FindEnv::FindEnv(EpisodeParams params, Responder responder, RoomSpec room, EldParams eld)
    : params_(params), responder_(responder), room_(std::move(room)), eld_(eld) {
  params_.validate();
}

Observation FindEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t world_seed = derive_seed(seed, "world");
  const WorldConfig w = room_.objects.empty() ? random_world(rng, world_seed)
                                              : random_world(rng, room_.objects, room_.locations, world_seed);
  ctx_ = make_context(w, rng);
  return start(seed, rng);
}

Observation FindEnv::reset(const WorldConfig& world, const std::vector<Location>& suggestion_order,
                           std::uint64_t seed) {
  if (!is_valid_world(world)) throw std::invalid_argument("reset: invalid world");
  ctx_ = EldContext{};
  ctx_.world = world;
  ctx_.suggestion_order = suggestion_order;
  Rng rng(seed);
  return start(seed, rng);
}

Observation FindEnv::start(std::uint64_t seed, Rng& rng) {
  eld_rng_ = rng;
  err_rng_ = Rng(derive_seed(seed, "errors"));
  sim_rng_ = Rng(derive_seed(seed, "sim"));
  tracker_ = HelTracker{};
  const EldReply open = scripted_opening(ctx_, eld_rng_, eld_);
  opening_ = open.move;
  belief_ = open.belief;
  tracker_.absorb(open.move, ctx_.world, {params_.error_rate, &err_rng_});
  active_ = true;
  done_ = false;
  success_ = false;
  return observation();
}

Observation observe(const HelTracker& t) {
  Observation o;
  if (t.last_eld) {
    o.eld_action = t.last_eld->action.label;
    o.eld_da = t.last_eld->da;
  }
  o.hel_state = t.state;
  o.flags = t.flags;
  o.search = search_context(t);
  o.last_move = last_move_kind(t.last_label());
  o.turn = t.turn;
  return o;
}

std::vector<int> legal_pairs(const DialogueFlags& flags) {
  std::vector<int> out;
  const auto& table = hel_pair_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (check_preconditions(flags, table[i].action) == PreconditionResult::Ok) out.push_back(static_cast<int>(i));
  }
  return out;
}

Observation FindEnv::observation() const { return observe(tracker_); }

std::vector<int> FindEnv::legal_pairs() const { return findrl::legal_pairs(tracker_.flags); }

StepResult FindEnv::step(int pair_index) {
  if (!active_) throw std::logic_error("step before reset");
  if (done_) throw std::logic_error("step after terminal");
  const auto& table = hel_pair_table();
  if (pair_index < 0 || pair_index >= static_cast<int>(table.size())) {
    throw std::out_of_range("step: joint action index out of range");
  }
  const HelPair pair = table[static_cast<std::size_t>(pair_index)];

  StepResult res;
  StepRecord& rec = res.record;
  rec.pair = pair_index;
  rec.hel = tracker_.make_move(pair, ctx_.world);

  if (check_preconditions(tracker_.flags, pair.action) == PreconditionResult::Violation) {
    tracker_.note_violation();
    rec.violation = true;
    res.reward = -params_.violation_penalty;
    res.terminal = tracker_.turn >= params_.max_turns;
  } else {
    const std::optional<EldMove> prev_eld = tracker_.last_eld;
    tracker_.note_hel(rec.hel);
    EldReply reply;
    if (responder_.sim != nullptr) {
      const Decode d = responder_.sample ? Decode::sampled(sim_rng_, responder_.temperature) : Decode::argmax();
      reply = sim_respond(*responder_.sim, belief_, rec.hel, prev_eld, ctx_, eld_rng_, d, eld_);
    } else {
      reply = scripted_eld(belief_, rec.hel, ctx_, eld_rng_, eld_);
    }
    belief_ = reply.belief;
    tracker_.absorb(reply.move, ctx_.world, {params_.error_rate, &err_rng_});
    rec.eld = reply.move;
    if (is_success(tracker_.state, tracker_.last_label(), reply.move)) {
      success_ = true;
      res.terminal = true;
      res.reward = 2.0 * params_.move_cost;
    } else if (tracker_.turn >= params_.max_turns) {
      res.terminal = true;
      res.reward = -2.0 * params_.move_cost;
    } else {
      res.reward = -params_.move_cost;
    }
  }

  done_ = res.terminal;
  res.obs = observation();
  rec.turn = tracker_.turn;
  rec.state = tracker_.state;
  rec.flags = tracker_.flags;
  rec.belief = belief_;
  rec.reward = res.reward;
  rec.terminal = res.terminal;
  rec.success = success_;
  return res;
}

}  // namespace findrl
