#include "findrl/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "findrl/jsonio.hpp"

namespace findrl {

namespace {

struct RolloutOptions {
  bool force_ot = false;
  bool force_l = false;
  double probe_rate = 0.0;
  double error_rate = 0.0;
};

HelActionLabel probe_action(const HelTracker& hel, Rng& rng) {
  std::vector<HelActionLabel> legal;
  for (auto a : all_hel_actions()) {
    if (check_preconditions(hel.flags, a) == PreconditionResult::Ok) legal.push_back(a);
  }
  return legal[rng.below(legal.size())];
}

// Plays one episode of the (possibly perturbed) expert against the scripted
// ELD. `ctx` must already hold the world and suggestion order, and `opening`
// must have been produced against it.
Trace rollout(EldContext ctx, const EldReply& opening, Rng& rng, const RolloutOptions& opt,
              const CorpusParams& params) {
  Trace t;
  t.world = ctx.world;
  t.suggestion_order = ctx.suggestion_order;
  t.opening = opening.move;
  t.opening_belief = opening.belief;

  Rng err_rng = rng.fork("errors");
  HelTracker hel;
  HelTracker::ErrorModel errors{opt.error_rate, &err_rng, opt.force_ot, opt.force_l, false};
  auto absorb = [&](const EldMove& m) {
    const auto u = hel.absorb(m, t.world, errors);
    if (u.grounded_ot) errors.force_ot = false;
    if (u.grounded_l) errors.force_l = false;
  };
  absorb(opening.move);
  BeliefState belief = opening.belief;

  for (int turn = 0; turn < params.max_turns; ++turn) {
    HelActionLabel a = scripted_expert(hel);
    if (opt.probe_rate > 0.0 && rng.bernoulli(opt.probe_rate)) a = probe_action(hel, rng);
    const auto das = valid_das(a);
    const HelMove m = hel.make_move({das[rng.below(das.size())], a}, t.world);
    hel.note_hel(m);
    const EldReply r = scripted_eld(belief, m, ctx, rng, params.eld);
    t.steps.push_back({belief, m, r.move, r.belief});
    belief = r.belief;
    absorb(r.move);
    if (is_success(hel.state, hel.last_label(), r.move)) {
      t.outcome = Outcome::Success;
      break;
    }
  }
  return t;
}

std::string trace_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%05d", i);
  return buf;
}

const char* variant_suffix(Variant v) {
  switch (v) {
    case Variant::OtMishear:
      return "ot";
    case Variant::LMishear:
      return "l";
    case Variant::Probe:
      return "probe";
  }
  return "?";
}

}  // namespace

std::string_view to_string(Outcome o) { return o == Outcome::Success ? "success" : "failure"; }

std::vector<Trace> generate_corpus(int n, std::uint64_t seed, const CorpusParams& params) {
  if (n < 1) throw std::invalid_argument("generate_corpus: n must be at least 1");
  std::vector<Trace> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "trace", static_cast<std::uint64_t>(i)));
    const WorldConfig world = random_world(rng, derive_seed(seed, "world", static_cast<std::uint64_t>(i)));
    EldContext ctx = make_context(world, rng);
    const EldReply opening = scripted_opening(ctx, rng, params.eld);
    Trace t = rollout(ctx, opening, rng, {}, params);
    t.id = trace_id(i);
    t.origin = t.id;
    out.push_back(std::move(t));
  }
  return out;
}

Trace make_variant(const Trace& base, Variant v, std::uint64_t seed, const CorpusParams& params) {
  Rng rng(seed);
  EldContext ctx;
  ctx.world = base.world;
  ctx.suggestion_order = base.suggestion_order;
  // The opening GiveOTL carries ELD's first suggestion.
  if (base.opening.action.location) ctx.suggestion_idx = 0;
  RolloutOptions opt;
  switch (v) {
    case Variant::OtMishear:
      opt.force_ot = true;
      break;
    case Variant::LMishear:
      opt.force_l = true;
      break;
    case Variant::Probe:
      opt.probe_rate = 0.3;
      opt.error_rate = 0.25;
      break;
  }
  Trace t = rollout(ctx, {base.opening, base.opening_belief}, rng, opt, params);
  t.id = base.id + "-" + variant_suffix(v);
  t.origin = base.origin.empty() ? base.id : base.origin;
  t.augmented = true;
  return t;
}

std::vector<Trace> augment_corpus(const std::vector<Trace>& traces, std::uint64_t seed,
                                  const CorpusParams& params) {
  if (traces.empty()) throw std::invalid_argument("augment_corpus: empty input");
  std::set<std::string> has_variants;
  for (const auto& t : traces) {
    if (t.augmented) has_variants.insert(t.origin);
  }
  std::vector<Trace> out = traces;
  std::uint64_t k = 0;
  for (const auto& t : traces) {
    ++k;
    if (t.augmented || has_variants.count(t.id)) continue;
    for (Variant v : {Variant::OtMishear, Variant::LMishear, Variant::Probe}) {
      const auto s = derive_seed(seed, std::string("augment/") + variant_suffix(v), k);
      out.push_back(make_variant(t, v, s, params));
    }
  }
  return out;
}

CorpusSplit split_corpus(const std::vector<Trace>& traces, std::uint64_t seed) {
  std::vector<std::string> groups;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string& g = traces[i].origin.empty() ? traces[i].id : traces[i].origin;
    if (!members.count(g)) groups.push_back(g);
    members[g].push_back(i);
  }
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(groups);
  const std::size_t n = groups.size();
  const std::size_t n_train = (n * 8 + 5) / 10;
  const std::size_t n_val = std::min(n - n_train, (n + 5) / 10);
  CorpusSplit split;
  for (std::size_t gi = 0; gi < n; ++gi) {
    auto& dst = gi < n_train ? split.train : gi < n_train + n_val ? split.validation : split.test;
    for (std::size_t i : members[groups[gi]]) dst.push_back(traces[i]);
  }
  return split;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

std::string traces_to_string(const std::vector<Trace>& traces) {
  std::string out;
  for (const auto& t : traces) {
    json h = {{"type", "trace"},
              {"id", t.id},
              {"origin", t.origin},
              {"augmented", t.augmented},
              {"world", t.world},
              {"suggestion_order", locations_json(t.suggestion_order)},
              {"opening", t.opening},
              {"opening_belief", t.opening_belief},
              {"outcome", to_string(t.outcome)},
              {"steps", t.steps.size()}};
    out += h.dump();
    out += '\n';
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      json j = {{"type", "step"},  {"trace", t.id},    {"index", i},
                {"belief", s.belief}, {"hel", s.hel}, {"eld", s.eld},
                {"next_belief", s.next_belief}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<Trace> traces_from_string(const std::string& text) {
  std::vector<Trace> out;
  std::size_t expected = 0;  // steps still owed by the last header
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("trace file line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "trace") {
        if (expected != 0) fail("trace " + out.back().id + " is missing steps");
        Trace t;
        t.id = j.at("id").get<std::string>();
        t.origin = j.at("origin").get<std::string>();
        t.augmented = j.at("augmented").get<bool>();
        t.world = j.at("world").get<WorldConfig>();
        t.suggestion_order = locations_from(j.at("suggestion_order"));
        t.opening = j.at("opening").get<EldMove>();
        t.opening_belief = j.at("opening_belief").get<BeliefState>();
        const std::string outcome = j.at("outcome").get<std::string>();
        if (outcome != "success" && outcome != "failure") fail("unknown outcome '" + outcome + "'");
        t.outcome = outcome == "success" ? Outcome::Success : Outcome::Failure;
        expected = j.at("steps").get<std::size_t>();
        if (expected == 0) fail("trace " + t.id + " has no steps");
        t.steps.reserve(expected);
        out.push_back(std::move(t));
      } else if (type == "step") {
        if (expected == 0) fail("step line outside a trace");
        Trace& t = out.back();
        if (j.at("trace").get<std::string>() != t.id) fail("step belongs to another trace");
        if (j.at("index").get<std::size_t>() != t.steps.size()) fail("step index out of order");
        TraceStep s;
        s.belief = j.at("belief").get<BeliefState>();
        s.hel = j.at("hel").get<HelMove>();
        s.eld = j.at("eld").get<EldMove>();
        s.next_belief = j.at("next_belief").get<BeliefState>();
        t.steps.push_back(std::move(s));
        --expected;
      } else {
        fail("unknown record type '" + type + "'");
      }
    } catch (const std::runtime_error& e) {
      if (std::string_view(e.what()).starts_with("trace file line")) throw;
      fail(e.what());
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (expected != 0) {
    ++lineno;
    fail("file ends inside trace " + out.back().id);
  }
  return out;
}

void save_traces(const std::vector<Trace>& traces, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << traces_to_string(traces);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Trace> load_traces(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return traces_from_string(ss.str());
}

// ---------------------------------------------------------------------------
// Belief coverage.
// ---------------------------------------------------------------------------

namespace {

int belief_code(const BeliefState& b) {
  return 9 * static_cast<int>(b.ot) + 3 * static_cast<int>(b.l) + static_cast<int>(b.o);
}

BeliefState belief_from_code(int c) {
  return {static_cast<Belief>(c / 9), static_cast<Belief>(c / 3 % 3), static_cast<Belief>(c % 3)};
}

struct Node {
  BeliefState belief;
  EldContext ctx;
  HelTracker hel;
};

// The parts of a node the dynamics depend on.
std::string node_key(const Node& n) {
  std::string k;
  auto put = [&](int v) { k.push_back(static_cast<char>('A' + v)); };
  put(belief_code(n.belief));
  put(n.ctx.suggestion_idx + 1);
  for (Location l : n.ctx.eld_searched) put(location_index(l));
  put(20 + n.ctx.found);
  put(encode_task_state(n.hel.state));
  put(n.hel.flags.ot_uttered * 2 + n.hel.flags.l_uttered);
  put(n.hel.object_guess ? object_index(*n.hel.object_guess) : 9);
  put(n.hel.location_guess ? location_index(*n.hel.location_guess) : 9);
  for (Location l : n.hel.searched) put(30 + location_index(l));
  put(40 + n.hel.found);
  put(n.hel.last_label() ? static_cast<int>(*n.hel.last_label()) : 15);
  return k;
}

// All trackers an ELD move can leave behind: no error, or each possible
// mishear of each slot the move grounded.
std::vector<HelTracker> absorb_branches(const HelTracker& hel, const EldMove& m, const WorldConfig& w) {
  HelTracker clean = hel;
  const GroundingUpdate u = clean.absorb(m, w, {});
  std::vector<HelTracker> out{clean};
  auto variant = [&](HelTracker::ErrorModel e) {
    HelTracker t = hel;
    t.absorb(m, w, e);
    out.push_back(std::move(t));
  };
  const int n_objects = static_cast<int>(w.objects.size());
  const int n_locations = static_cast<int>(w.locations.size());
  for (int i = 0; u.grounded_ot && i < n_objects; ++i) {
    HelTracker::ErrorModel e;
    e.force_ot = true;
    e.pick_ot = i;
    variant(e);
  }
  for (int i = 0; u.grounded_l && i < n_locations; ++i) {
    HelTracker::ErrorModel e;
    e.force_l = true;
    e.pick_l = i;
    variant(e);
  }
  if (u.grounded_o) {
    HelTracker::ErrorModel e;
    e.force_o = true;
    variant(e);
  }
  return out;
}

void explore(const WorldConfig& world, const std::vector<Location>& order, bool both,
             std::set<int>& beliefs) {
  Rng rng(0);  // only dialogue-act choices draw from it
  EldParams p;
  p.spontaneous_rate = both ? 1.0 : 0.0;
  Node start;
  start.ctx.world = world;
  start.ctx.suggestion_order = order;
  const EldReply open = scripted_opening(start.ctx, rng, p);
  start.belief = open.belief;
  beliefs.insert(belief_code(open.belief));

  std::set<std::string> seen;
  std::vector<Node> frontier;
  for (auto& h : absorb_branches(start.hel, open.move, world)) {
    Node n = start;
    n.hel = std::move(h);
    if (seen.insert(node_key(n)).second) frontier.push_back(std::move(n));
  }
  while (!frontier.empty()) {
    Node n = std::move(frontier.back());
    frontier.pop_back();
    for (auto a : all_hel_actions()) {
      if (check_preconditions(n.hel.flags, a) == PreconditionResult::Violation) continue;
      const HelMove m = n.hel.make_move(canonical_pair(a), world);
      Node next = n;
      next.hel.note_hel(m);
      const EldReply r = scripted_eld(n.belief, m, next.ctx, rng);
      next.belief = r.belief;
      beliefs.insert(belief_code(r.belief));
      for (auto& h : absorb_branches(next.hel, r.move, world)) {
        if (is_success(h.state, h.last_label(), r.move)) continue;
        Node child = next;
        child.hel = std::move(h);
        if (seen.insert(node_key(child)).second) frontier.push_back(std::move(child));
      }
    }
  }
}

}  // namespace

std::vector<BeliefState> reachable_beliefs(int worlds, std::uint64_t seed) {
  std::set<int> found;
  for (int i = 0; i < worlds; ++i) {
    Rng rng(derive_seed(seed, "reachable", static_cast<std::uint64_t>(i)));
    const WorldConfig w = random_world(rng, 0);
    EldContext ctx = make_context(w, rng);
    explore(w, ctx.suggestion_order, false, found);
    explore(w, ctx.suggestion_order, true, found);
  }
  std::vector<BeliefState> out;
  for (int c : found) out.push_back(belief_from_code(c));
  return out;
}

BeliefCoverage belief_coverage(const std::vector<Trace>& traces) {
  std::set<int> observed;
  for (const auto& t : traces) {
    observed.insert(belief_code(t.opening_belief));
    for (const auto& s : t.steps) observed.insert(belief_code(s.next_belief));
  }
  std::set<int> reachable;
  for (const auto& b : reachable_beliefs()) reachable.insert(belief_code(b));
  BeliefCoverage cov;
  for (int c = 0; c < 27; ++c) {
    if (!reachable.count(c)) {
      cov.unreachable.push_back(belief_from_code(c));
    } else if (observed.count(c)) {
      cov.covered.push_back(belief_from_code(c));
    } else {
      cov.missing.push_back(belief_from_code(c));
    }
  }
  return cov;
}

}  // namespace findrl
