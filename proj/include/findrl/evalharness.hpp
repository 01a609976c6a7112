#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "findrl/env.hpp"
#include "findrl/jsonio.hpp"
#include "findrl/training.hpp"

namespace findrl {

// Chooses a joint (DA, action) index for the environment's current state.
using PolicyFn = std::function<int(const FindEnv&)>;

PolicyFn greedy_policy(PolicyNet net);
PolicyFn expert_policy();
/// Uniform over all 14 joint pairs, legal or not.
PolicyFn random_policy(std::uint64_t seed);

struct EpisodeLog {
  std::uint64_t seed = 0;
  WorldConfig world;
  EldMove opening;
  std::vector<StepRecord> steps;
  bool success = false;
  // Values HEL held after a recognition error, in the order they occurred.
  std::vector<ObjectId> misheard_objects;
  std::vector<Location> misheard_locations;
};

EpisodeLog run_episode(const PolicyFn& policy, FindEnv& env, std::uint64_t seed);

void to_json(json& j, const StepRecord& r);
void to_json(json& j, const EpisodeLog& log);
/// One header line, then one line per step.
void write_episode_log(std::ostream& out, const EpisodeLog& log);

struct AuditResult {
  int count = 0;
  std::vector<int> flagged_turns;  // 1-based HEL move numbers
};

/// Flags HEL moves that violate the preconditions, or verify an object or
/// location ELD never uttered and HEL never misheard.
AuditResult audit_non_eligible(const EpisodeLog& log);

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  double avg_turns = 0.0;
  double avg_moves = 0.0;  // both speakers' moves: 2 x turns
  int hel_moves = 0;
  int non_eligible_count = 0;
  double non_eligible_rate = 0.0;  // per HEL move
  int violation_count = 0;
  double expert_agreement = 0.0;
};

/// Greedy rollouts on copies of `env` (whose max_turns is the success
/// horizon); episode i uses derive_seed(seed, "episode", i).
EvalReport evaluate_policy(const PolicyFn& policy, const FindEnv& env, int n, std::uint64_t seed);

/// Fraction of states visited by `policy` where its action label equals the
/// scripted expert's.
double expert_agreement(const PolicyFn& policy, const FindEnv& env, int n, std::uint64_t seed);

void to_json(json& j, const EvalReport& r);
/// Table-shaped plain-text summary.
void print_report(std::ostream& out, const EvalReport& r);

// ---------------------------------------------------------------------------
// Tabular oracle on the reduced environment.

struct OracleStart {
  WorldConfig world;
  std::vector<Location> suggestion_order;
  bool spontaneous = false;  // opening GiveOTL instead of GiveOT
};

/// 4 placements x 2 targets x 2 suggestion orders x 2 openings.
std::vector<OracleStart> reduced_starts();

/// Scripted ELD on the reduced room; Give* moves are always commands so the
/// episode is deterministic. `spontaneous_rate` picks the opening.
FindEnv reduced_env(const EpisodeParams& params, double spontaneous_rate);

struct OracleResult {
  std::size_t states = 0;
  std::size_t terminal_edges = 0;
  std::vector<double> residuals;  // max-norm change per sweep
  std::vector<double> start_values;
  std::vector<int> optimal_lengths;  // HEL moves of the oracle's greedy policy per start
};

/// Exhaustive enumeration of the environment's full snapshots reachable from
/// `starts`, value iteration to `tolerance`, then greedy one-step lookahead
/// rollouts. Requires error_rate 0 (throws std::invalid_argument).
OracleResult tabular_oracle(const EpisodeParams& params, const std::vector<OracleStart>& starts,
                            double tolerance = 1e-10);

/// HEL moves `policy` needs from `start`, or -1 without success.
int episode_length(const PolicyFn& policy, const EpisodeParams& params, const OracleStart& start);

}  // namespace findrl
