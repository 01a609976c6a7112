#include "findrl/service.hpp"

#include <httplib.h>

#include <iomanip>
#include <iostream>
#include <sstream>

#include "findrl/env.hpp"

namespace findrl {

LivePolicy net_policy(PolicyNet net) {
  return [net = std::move(net)](const HelTracker& t) {
    return act_greedy_legal(net, encode_observation(observe(t)), legal_pairs(t.flags));
  };
}

LivePolicy expert_live_policy() {
  return [](const HelTracker& t) { return hel_pair_index(canonical_pair(scripted_expert(t))); };
}

void PolicyRegistry::add(const std::string& id, LivePolicy policy, std::string description) {
  if (id.empty()) throw std::invalid_argument("policy id must not be empty");
  if (!entries_.emplace(id, Entry{std::move(policy), std::move(description)}).second) {
    throw std::invalid_argument("policy '" + id + "' registered twice");
  }
}

const LivePolicy* PolicyRegistry::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second.policy;
}

json PolicyRegistry::list() const {
  json out = json::array();
  for (const auto& [id, e] : entries_) out.push_back({{"id", id}, {"description", e.description}});
  return json{{"policies", out}};
}

std::string to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Success: return "success";
    case SessionStatus::Failure: return "failure";
  }
  return "?";
}

void to_json(json& j, const TranscriptEntry& e) {
  j = json{{"speaker", to_string(e.speaker)}, {"text", e.text}};
  if (e.hel) j["move"] = *e.hel;
  if (e.eld) j["move"] = *e.eld;
  if (!e.revealed.empty()) {
    json r = json::array();
    for (const auto& o : e.revealed) r.push_back(object_name(o));
    j["revealed"] = r;
  }
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, std::string policy_id, const LivePolicy& policy, const Lexicon& lex,
                 const Templates& templates, WorldConfig world, std::uint64_t seed, SessionOptions options)
    : id_(std::move(id)),
      policy_id_(std::move(policy_id)),
      policy_(&policy),
      lex_(&lex),
      templates_(&templates),
      world_(std::move(world)),
      options_(options),
      err_rng_(derive_seed(seed, "errors")) {
  HelMove greet;
  greet.action.label = HelActionLabel::RequestOT;
  greet.da = canonical_pair(HelActionLabel::RequestOT).da;
  transcript_.push_back({Speaker::Hel, render_hel(greet, *templates_), greet, std::nullopt, {}});
}

void Session::close(const std::string& text) { transcript_.push_back({Speaker::Hel, text, std::nullopt, std::nullopt, {}}); }

const TranscriptEntry& Session::human_move(const std::string& utterance, std::optional<Location> pointing) {
  if (status_ != SessionStatus::Active) throw ServiceError(409, "session is " + to_string(status_));
  const ParsedUtterance parsed = extract_action(utterance, pointing, *lex_);
  if (!parsed.action) throw ServiceError(422, "could not understand the move; name an object or a place, or answer yes/no");
  const bool give = *parsed.action == EldActionLabel::GiveOT || *parsed.action == EldActionLabel::GiveL ||
                    *parsed.action == EldActionLabel::GiveOTL;
  if (!opened_ && !give) throw ServiceError(422, "start by saying what you are looking for");

  const EldMove eld = parsed.to_move(utterance, pointing);
  tracker_.absorb(eld, world_, {options_.error_rate, &err_rng_});
  opened_ = true;
  transcript_.push_back({Speaker::Eld, utterance, std::nullopt, eld, {}});

  if (is_success(tracker_.state, tracker_.last_label(), eld)) {
    status_ = SessionStatus::Success;
    HelMove bye;
    bye.action.label = HelActionLabel::DeclareDone;
    bye.da = canonical_pair(HelActionLabel::DeclareDone).da;
    close(render_hel(bye, *templates_));
    return transcript_.back();
  }
  if (tracker_.turn >= options_.max_turns) {
    status_ = SessionStatus::Failure;
    close("I am sorry, I could not find it.");
    return transcript_.back();
  }

  const HelPair pair = hel_pair_table().at(static_cast<std::size_t>((*policy_)(tracker_)));
  const HelMove move = tracker_.make_move(pair, world_);
  if (check_preconditions(tracker_.flags, pair.action) != PreconditionResult::Ok) {
    std::cerr << "session " << id_ << ": policy chose " << to_string(pair.action) << " against its preconditions\n";
    throw ServiceError(500, "policy produced an illegal move");
  }
  tracker_.note_hel(move);
  TranscriptEntry e{Speaker::Hel, render_hel(move, *templates_), move, std::nullopt, {}};
  if (move.action.label == HelActionLabel::SearchLocation && move.action.location) {
    for (std::size_t i = 0; i < world_.objects.size(); ++i) {
      if (world_.placement[i] == *move.action.location) e.revealed.push_back(world_.objects[i]);
    }
  }
  transcript_.push_back(std::move(e));
  return transcript_.back();
}

json Session::summary() const {
  json objects = json::array();
  for (const auto& o : world_.objects) objects.push_back(object_name(o));
  return json{{"id", id_},
              {"policy", policy_id_},
              {"status", to_string(status_)},
              {"turn", tracker_.turn},
              {"max_turns", options_.max_turns},
              {"objects", objects},
              {"locations", locations_json(world_.locations)},
              {"target", object_name(world_.target)}};
}

json Session::view() const {
  json j = summary();
  j["transcript"] = transcript_;
  return j;
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(std::shared_ptr<const PolicyRegistry> policies, std::shared_ptr<const Lexicon> lex,
                               std::shared_ptr<const Templates> templates, std::uint64_t seed,
                               SessionOptions options, std::string log_path)
    : policies_(std::move(policies)),
      lex_(std::move(lex)),
      templates_(std::move(templates)),
      seed_(seed),
      options_(options) {
  if (!log_path.empty()) {
    log_.open(log_path, std::ios::app);
    if (!log_) throw std::runtime_error("cannot open session log " + log_path);
  }
}

json SessionManager::create(const std::string& policy_id, std::optional<std::uint64_t> seed) {
  const LivePolicy* policy = policies_->find(policy_id);
  if (policy == nullptr) throw ServiceError(404, "unknown policy '" + policy_id + "'");
  auto s = std::make_shared<Slot>();
  std::string id;
  {
    std::unique_lock lock(mu_);
    const std::uint64_t n = counter_++;
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << derive_seed(seed_, "session-id", n);
    id = hex.str();
    const std::uint64_t world_seed = seed.value_or(derive_seed(seed_, "session", n));
    Rng rng(world_seed);
    s->session = std::make_unique<Session>(id, policy_id, *policy, *lex_, *templates_,
                                           random_world(rng, derive_seed(world_seed, "world")), world_seed,
                                           options_);
    sessions_.emplace(id, s);
  }
  json out = s->session->view();
  log({{"event", "create"}, {"session", out}});
  return out;
}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

json SessionManager::move(const std::string& id, const std::string& utterance, std::optional<Location> pointing) {
  auto s = slot(id);
  json out;
  {
    std::lock_guard lock(s->mu);
    const TranscriptEntry& reply = s->session->human_move(utterance, pointing);
    out = json{{"reply", reply}, {"session", s->session->summary()}};
  }
  log({{"event", "move"}, {"id", id}, {"utterance", utterance}, {"result", out}});
  return out;
}

json SessionManager::get(const std::string& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->session->view();
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

void SessionManager::log(const json& record) {
  if (!log_.is_open()) return;
  std::lock_guard lock(log_mu_);
  log_ << record.dump() << '\n';
  log_.flush();
}

// ---------------------------------------------------------------------------

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F f) {
  try {
    f();
  } catch (const ServiceError& e) {
    send(res, e.status, {{"error", e.what()}});
  } catch (const json::exception& e) {
    send(res, 400, {{"error", std::string("malformed body: ") + e.what()}});
  } catch (const std::invalid_argument& e) {
    send(res, 400, {{"error", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ServiceError(400, "body must be a JSON object");
  return j;
}

}  // namespace

void install_routes(httplib::Server& server, SessionManager& manager, const std::string& static_dir) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); });

  server.Get("/policies", [&manager](const httplib::Request&, httplib::Response& res) {
    send(res, 200, manager.policies());
  });

  server.Post("/sessions", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const std::string policy = body.value("policy", std::string("dqn"));
      std::optional<std::uint64_t> seed;
      if (body.contains("seed") && !body["seed"].is_null()) seed = body["seed"].get<std::uint64_t>();
      send(res, 201, manager.create(policy, seed));
    });
  });

  server.Get(R"(/sessions/([0-9a-f]+))", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, manager.get(req.matches[1])); });
  });

  server.Post(R"(/sessions/([0-9a-f]+)/moves)", [&manager](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      if (!body.contains("utterance") && !body.contains("pointing")) {
        throw ServiceError(400, "a move needs an utterance or a pointing target");
      }
      const std::string utterance = body.value("utterance", std::string());
      std::optional<Location> pointing;
      if (body.contains("pointing") && !body["pointing"].is_null()) {
        pointing = parse_location(body["pointing"].get<std::string>());
      }
      send(res, 200, manager.move(req.matches[1], utterance, pointing));
    });
  });

  if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
    throw std::runtime_error("static directory " + static_dir + " does not exist");
  }
}

}  // namespace findrl
