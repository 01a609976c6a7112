#include "findrl/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace findrl {

PolicyFn greedy_policy(PolicyNet net) {
  return [net = std::move(net)](const FindEnv& env) {
    return act_greedy(net, encode_observation(env.observation()));
  };
}

PolicyFn expert_policy() {
  return [](const FindEnv& env) { return hel_pair_index(canonical_pair(scripted_expert(env.tracker()))); };
}

PolicyFn random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](const FindEnv&) { return static_cast<int>(rng->below(kNumJointActions)); };
}

EpisodeLog run_episode(const PolicyFn& policy, FindEnv& env, std::uint64_t seed) {
  EpisodeLog log;
  log.seed = seed;
  env.reset(seed);
  log.world = env.context().world;
  log.opening = env.opening();
  while (!env.done()) log.steps.push_back(env.step(policy(env)).record);
  log.success = env.succeeded();
  log.misheard_objects = env.tracker().misheard_objects;
  log.misheard_locations = env.tracker().misheard_locations;
  return log;
}

void to_json(json& j, const StepRecord& r) {
  j = json{{"turn", r.turn},
           {"pair", r.pair},
           {"hel", r.hel},
           {"eld", r.eld ? json(*r.eld) : json(nullptr)},
           {"state", r.state},
           {"flags", r.flags},
           {"belief", r.belief},
           {"reward", r.reward},
           {"violation", r.violation},
           {"terminal", r.terminal},
           {"success", r.success}};
}

void to_json(json& j, const EpisodeLog& log) {
  json objs = json::array();
  for (const auto& o : log.misheard_objects) objs.push_back(o);
  j = json{{"seed", log.seed},
           {"world", log.world},
           {"opening", log.opening},
           {"steps", log.steps.size()},
           {"success", log.success},
           {"misheard_objects", objs},
           {"misheard_locations", locations_json(log.misheard_locations)}};
}

void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  out << json(log).dump() << '\n';
  for (const auto& s : log.steps) out << json(s).dump() << '\n';
}

AuditResult audit_non_eligible(const EpisodeLog& log) {
  using A = HelActionLabel;
  std::vector<ObjectId> objects;
  std::vector<Location> locations;
  auto hear = [&](const EldMove& m) {
    if (m.action.object) objects.push_back(*m.action.object);
    if (m.action.location) locations.push_back(*m.action.location);
  };
  auto known_object = [&](const std::optional<ObjectId>& o) {
    return o && (std::count(objects.begin(), objects.end(), *o) ||
                 std::count(log.misheard_objects.begin(), log.misheard_objects.end(), *o));
  };
  auto known_location = [&](const std::optional<Location>& l) {
    return l && (std::count(locations.begin(), locations.end(), *l) ||
                 std::count(log.misheard_locations.begin(), log.misheard_locations.end(), *l));
  };
  hear(log.opening);
  AuditResult res;
  for (const auto& s : log.steps) {
    bool flag = s.violation;
    if (!flag) {
      const auto& a = s.hel.action;
      if (a.label == A::VerifyOT || a.label == A::VerifyO) flag = !known_object(a.object);
      if (a.label == A::VerifyL) flag = !known_location(a.location);
    }
    if (flag) {
      ++res.count;
      res.flagged_turns.push_back(s.turn);
    }
    if (s.eld) hear(*s.eld);
  }
  return res;
}

EvalReport evaluate_policy(const PolicyFn& policy, const FindEnv& env, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("evaluate_policy: n must be at least 1");
  FindEnv e = env;
  EvalReport r;
  r.episodes = n;
  int successes = 0, agree = 0;
  long turns = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, "episode", static_cast<std::uint64_t>(i));
    e.reset(s);
    EpisodeLog log;
    log.opening = e.opening();
    while (!e.done()) {
      const int a = policy(e);
      agree += hel_pair_table()[static_cast<std::size_t>(a)].action == scripted_expert(e.tracker());
      log.steps.push_back(e.step(a).record);
    }
    log.misheard_objects = e.tracker().misheard_objects;
    log.misheard_locations = e.tracker().misheard_locations;
    successes += e.succeeded();
    turns += e.turn();
    r.hel_moves += static_cast<int>(log.steps.size());
    for (const auto& st : log.steps) r.violation_count += st.violation;
    r.non_eligible_count += audit_non_eligible(log).count;
  }
  r.success_rate = static_cast<double>(successes) / n;
  r.avg_turns = static_cast<double>(turns) / n;
  r.avg_moves = 2.0 * r.avg_turns;
  r.non_eligible_rate = r.hel_moves ? static_cast<double>(r.non_eligible_count) / r.hel_moves : 0.0;
  r.expert_agreement = r.hel_moves ? static_cast<double>(agree) / r.hel_moves : 0.0;
  return r;
}

double expert_agreement(const PolicyFn& policy, const FindEnv& env, int n, std::uint64_t seed) {
  return evaluate_policy(policy, env, n, seed).expert_agreement;
}

void to_json(json& j, const EvalReport& r) {
  j = json{{"episodes", r.episodes},
           {"success_rate", r.success_rate},
           {"avg_turns", r.avg_turns},
           {"avg_moves", r.avg_moves},
           {"hel_moves", r.hel_moves},
           {"non_eligible_count", r.non_eligible_count},
           {"non_eligible_rate", r.non_eligible_rate},
           {"violation_count", r.violation_count},
           {"expert_agreement", r.expert_agreement}};
}

void print_report(std::ostream& out, const EvalReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "episodes            " << r.episodes << '\n'
      << "success rate        " << r.success_rate << '\n'
      << "average moves       " << r.avg_moves << '\n'
      << "average turns       " << r.avg_turns << '\n'
      << "non-eligible moves  " << r.non_eligible_count << " / " << r.hel_moves << " (" << r.non_eligible_rate
      << ")\n"
      << "precondition breaks " << r.violation_count << '\n'
      << "expert agreement    " << r.expert_agreement << '\n'
      << "SSRE / wrong DA / wrong pointing: n/a in simulation\n";
  out.flags(flags);
}

// ---------------------------------------------------------------------------
// Oracle

std::vector<OracleStart> reduced_starts() {
  const RoomSpec room = RoomSpec::reduced();
  std::vector<OracleStart> out;
  for (int placement = 0; placement < 4; ++placement) {
    for (const auto& target : room.objects) {
      for (int order = 0; order < 2; ++order) {
        for (bool spontaneous : {false, true}) {
          OracleStart s;
          s.world.objects = room.objects;
          s.world.locations = room.locations;
          s.world.placement = {room.locations[static_cast<std::size_t>(placement & 1)],
                               room.locations[static_cast<std::size_t>(placement >> 1)]};
          s.world.target = target;
          s.suggestion_order = room.locations;
          if (order == 1) std::reverse(s.suggestion_order.begin(), s.suggestion_order.end());
          s.spontaneous = spontaneous;
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

FindEnv reduced_env(const EpisodeParams& params, double spontaneous_rate) {
  return FindEnv(params, Responder::scripted(), RoomSpec::reduced(), EldParams{spontaneous_rate, 1.0});
}

namespace {

// Everything that determines the future of an error-free scripted episode;
// the turn counter and random streams are left out.
std::string snapshot_key(const FindEnv& env) {
  const HelTracker& t = env.tracker();
  json j;
  j["s"] = t.state;
  j["f"] = t.flags;
  j["og"] = t.object_guess ? json(*t.object_guess) : json(nullptr);
  j["lg"] = location_json(t.location_guess);
  j["sr"] = locations_json(t.searched);
  j["fd"] = t.found;
  j["lh"] = t.last_hel ? json(*t.last_hel) : json(nullptr);
  j["le"] = t.last_eld ? json(*t.last_eld) : json(nullptr);
  j["b"] = env.belief();
  const EldContext& c = env.context();
  j["w"] = c.world;
  j["so"] = locations_json(c.suggestion_order);
  j["si"] = c.suggestion_idx;
  j["es"] = locations_json(c.eld_searched);
  j["cf"] = c.found;
  return j.dump();
}

struct Edge {
  double reward = 0.0;
  bool terminal = false;
  std::size_t next = 0;
};

int start_index(const OracleStart& s) { return s.spontaneous ? 1 : 0; }

}  // namespace

int episode_length(const PolicyFn& policy, const EpisodeParams& params, const OracleStart& start) {
  FindEnv env = reduced_env(params, start.spontaneous ? 1.0 : 0.0);
  env.reset(start.world, start.suggestion_order, 0);
  while (!env.done()) env.step(policy(env));
  return env.succeeded() ? env.turn() : -1;
}

OracleResult tabular_oracle(const EpisodeParams& params, const std::vector<OracleStart>& starts, double tolerance) {
  if (params.error_rate != 0.0) throw std::invalid_argument("tabular_oracle: needs an error-free environment");
  if (starts.empty()) throw std::invalid_argument("tabular_oracle: no start configurations");
  EpisodeParams p = params;
  p.max_turns = std::numeric_limits<int>::max();  // no horizon: the key carries no turn counter

  std::vector<FindEnv> nodes;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::array<Edge, kNumJointActions>> edges;
  std::vector<std::size_t> roots;
  auto intern = [&](const FindEnv& env) {
    auto [it, fresh] = index.try_emplace(snapshot_key(env), nodes.size());
    if (fresh) nodes.push_back(env);
    return it->second;
  };
  for (const auto& s : starts) {
    FindEnv env = reduced_env(p, s.spontaneous ? 1.0 : 0.0);
    env.reset(s.world, s.suggestion_order, static_cast<std::uint64_t>(start_index(s)));
    roots.push_back(intern(env));
  }
  OracleResult res;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::array<Edge, kNumJointActions> out{};
    for (int a = 0; a < kNumJointActions; ++a) {
      FindEnv next = nodes[i];
      const StepResult r = next.step(a);
      Edge& e = out[static_cast<std::size_t>(a)];
      e.reward = r.reward;
      e.terminal = r.terminal;
      if (r.terminal) {
        ++res.terminal_edges;
      } else {
        e.next = intern(next);
      }
    }
    edges.push_back(out);
  }
  res.states = nodes.size();

  const double gamma = p.gamma;
  std::vector<double> v(nodes.size(), 0.0);
  auto q = [&](std::size_t s, std::size_t a) {
    const Edge& e = edges[s][a];
    return e.reward + (e.terminal ? 0.0 : gamma * v[e.next]);
  };
  for (;;) {
    double residual = 0.0;
    std::vector<double> nv(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < kNumJointActions; ++a) best = std::max(best, q(s, a));
      nv[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    v = std::move(nv);
    res.residuals.push_back(residual);
    if (residual < tolerance) break;
    if (res.residuals.size() > 100000) throw std::runtime_error("tabular_oracle: no convergence");
  }

  for (std::size_t k = 0; k < starts.size(); ++k) {
    res.start_values.push_back(v[roots[k]]);
    std::size_t s = roots[k];
    int length = 0;
    for (;;) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < kNumJointActions; ++a) {
        if (q(s, a) > q(s, best)) best = a;
      }
      ++length;
      if (edges[s][best].terminal) break;
      s = edges[s][best].next;
      if (length > 1000) throw std::runtime_error("tabular_oracle: greedy policy does not terminate");
    }
    res.optimal_lengths.push_back(length);
  }
  return res;
}

}  // namespace findrl
