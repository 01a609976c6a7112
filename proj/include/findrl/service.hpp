#pragma once

#include <cstdint>
#include <functional>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "findrl/configcore.hpp"
#include "findrl/interaction.hpp"
#include "findrl/jsonio.hpp"
#include "findrl/textio.hpp"
#include "findrl/training.hpp"

namespace httplib {
class Server;
}

namespace findrl {

// Picks a joint-table index from the HEL-side state of a live session.
using LivePolicy = std::function<int(const HelTracker&)>;

/// Greedy over the precondition-legal pairs.
LivePolicy net_policy(PolicyNet net);
LivePolicy expert_live_policy();

class PolicyRegistry {
 public:
  void add(const std::string& id, LivePolicy policy, std::string description);
  const LivePolicy* find(const std::string& id) const;
  json list() const;

 private:
  struct Entry {
    LivePolicy policy;
    std::string description;
  };
  std::map<std::string, Entry> entries_;
};

// Carries the HTTP status the error maps to.
struct ServiceError : std::runtime_error {
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;
};

enum class SessionStatus { Active, Success, Failure };
std::string to_string(SessionStatus s);

struct TranscriptEntry {
  Speaker speaker = Speaker::Hel;
  std::string text;
  std::optional<HelMove> hel;
  std::optional<EldMove> eld;
  std::vector<ObjectId> revealed;  // what HEL saw after opening a location
};

void to_json(json& j, const TranscriptEntry& e);

struct SessionOptions {
  int max_turns = 15;
  double error_rate = 0.0;
};

class Session {
 public:
  Session(std::string id, std::string policy_id, const LivePolicy& policy, const Lexicon& lex,
          const Templates& templates, WorldConfig world, std::uint64_t seed, SessionOptions options);

  /// Parses the human move, lets HEL respond, and returns HEL's entry.
  /// Throws ServiceError: 409 when finished, 422 when nothing was understood.
  const TranscriptEntry& human_move(const std::string& utterance, std::optional<Location> pointing);

  /// Id, status, turn, room inventory and target; never the placement.
  json summary() const;
  /// summary() plus the transcript.
  json view() const;

  SessionStatus status() const { return status_; }
  int turn() const { return tracker_.turn; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  const HelTracker& tracker() const { return tracker_; }
  const WorldConfig& world() const { return world_; }

 private:
  void close(const std::string& text);

  std::string id_, policy_id_;
  const LivePolicy* policy_;
  const Lexicon* lex_;
  const Templates* templates_;
  WorldConfig world_;
  SessionOptions options_;
  Rng err_rng_;
  HelTracker tracker_;
  bool opened_ = false;
  SessionStatus status_ = SessionStatus::Active;
  std::vector<TranscriptEntry> transcript_;
};

class SessionManager {
 public:
  SessionManager(std::shared_ptr<const PolicyRegistry> policies, std::shared_ptr<const Lexicon> lex,
                 std::shared_ptr<const Templates> templates, std::uint64_t seed, SessionOptions options,
                 std::string log_path = "");

  /// Returns the new session's summary; 404 for an unknown policy.
  json create(const std::string& policy_id, std::optional<std::uint64_t> seed);
  /// {"reply": HEL entry, "session": summary}; 404 for an unknown id.
  json move(const std::string& id, const std::string& utterance, std::optional<Location> pointing);
  json get(const std::string& id) const;
  json policies() const { return policies_->list(); }
  std::size_t size() const;

 private:
  struct Slot {
    mutable std::mutex mu;
    std::unique_ptr<Session> session;
  };
  std::shared_ptr<Slot> slot(const std::string& id) const;
  void log(const json& record);

  std::shared_ptr<const PolicyRegistry> policies_;
  std::shared_ptr<const Lexicon> lex_;
  std::shared_ptr<const Templates> templates_;
  std::uint64_t seed_;
  SessionOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t counter_ = 0;
  std::mutex log_mu_;
  std::ofstream log_;
};

/// Registers the HTTP routes on `server`; serves `static_dir` at "/" when
/// non-empty.
void install_routes(httplib::Server& server, SessionManager& manager, const std::string& static_dir = "");

}  // namespace findrl
