#pragma once

#include "findrl/configcore.hpp"
#include "findrl/evalharness.hpp"

namespace findrl {

// The training pipeline as plain functions over a RunConfig. Every stage seeds
// itself from derive_seed(cfg.seed, <stage name>).

std::uint64_t stage_seed(const RunConfig& cfg, Stage s);

/// Base traces followed by their augmented variants.
std::vector<Trace> build_corpus(const RunConfig& cfg);
CorpusSplit split_for(const RunConfig& cfg, const std::vector<Trace>& corpus);
SimModel build_sim(const RunConfig& cfg, const CorpusSplit& split, SimHistory* history = nullptr);

/// Sampled simulator, horizon dagger.max_turns.
FindEnv dagger_env(const RunConfig& cfg, const SimModel& sim);
/// Sampled simulator, the [episode] parameters.
FindEnv dql_env(const RunConfig& cfg, const SimModel& sim);
/// Argmax simulator, horizon and error rate from [eval].
FindEnv eval_env(const RunConfig& cfg, const SimModel& sim);

DaggerRun run_warmup(const RunConfig& cfg, const SimModel& sim);
DqlRun run_rl(const RunConfig& cfg, const SimModel& sim, const PolicyNet& warmup);
EvalReport evaluate(const RunConfig& cfg, const SimModel& sim, const PolicyNet& policy);

/// DQL settings for the reduced room: 2,000 episodes, C=100, m=1, epsilon
/// decay over 600.
DqlHyper reduced_dql_hyper();
/// Greedy DQN trained from scratch on reduced_env(p, 0.5).
PolicyNet train_reduced_dqn(const EpisodeParams& p, std::uint64_t seed);

}  // namespace findrl
