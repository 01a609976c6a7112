#include "findrl/pipeline.hpp"

namespace findrl {

std::uint64_t stage_seed(const RunConfig& cfg, Stage s) { return derive_seed(cfg.seed, to_string(s)); }

std::vector<Trace> build_corpus(const RunConfig& cfg) {
  const std::uint64_t seed = stage_seed(cfg, Stage::Corpus);
  const auto base = generate_corpus(cfg.corpus.base_traces, seed, cfg.corpus.params);
  return augment_corpus(base, derive_seed(seed, "augment"), cfg.corpus.params);
}

CorpusSplit split_for(const RunConfig& cfg, const std::vector<Trace>& corpus) {
  return split_corpus(corpus, derive_seed(stage_seed(cfg, Stage::Corpus), "split"));
}

SimModel build_sim(const RunConfig& cfg, const CorpusSplit& split, SimHistory* history) {
  return train_sim(split, stage_seed(cfg, Stage::Sim), cfg.sim, history);
}

FindEnv dagger_env(const RunConfig& cfg, const SimModel& sim) {
  EpisodeParams p = cfg.episode;
  p.max_turns = cfg.dagger.max_turns;
  return FindEnv(p, Responder::learned(sim, true));
}

FindEnv dql_env(const RunConfig& cfg, const SimModel& sim) { return FindEnv(cfg.episode, Responder::learned(sim, true)); }

FindEnv eval_env(const RunConfig& cfg, const SimModel& sim) {
  EpisodeParams p = cfg.episode;
  p.max_turns = cfg.eval.max_turns;
  p.error_rate = cfg.eval.error_rate;
  return FindEnv(p, Responder::learned(sim, false));
}

DaggerRun run_warmup(const RunConfig& cfg, const SimModel& sim) {
  return run_dagger(dagger_env(cfg, sim), eval_env(cfg, sim), stage_seed(cfg, Stage::Dagger), cfg.dagger);
}

DqlRun run_rl(const RunConfig& cfg, const SimModel& sim, const PolicyNet& warmup) {
  return run_dql(dql_env(cfg, sim), eval_env(cfg, sim), warmup, stage_seed(cfg, Stage::Dql), cfg.dql);
}

EvalReport evaluate(const RunConfig& cfg, const SimModel& sim, const PolicyNet& policy) {
  return evaluate_policy(greedy_policy(policy), eval_env(cfg, sim), cfg.eval.episodes, stage_seed(cfg, Stage::Eval));
}

DqlHyper reduced_dql_hyper() {
  DqlHyper h;
  h.total_episodes = 2000;
  h.optimize_every = 100;
  h.target_copy_multiplier = 1;
  h.eps_decay_episodes = 600;
  h.eval_episodes = 100;
  return h;
}

PolicyNet train_reduced_dqn(const EpisodeParams& p, std::uint64_t seed) {
  const FindEnv env = reduced_env(p, 0.5);
  return select_final_policy(run_dql(env, env, init_policy(seed), seed, reduced_dql_hyper()));
}

}  // namespace findrl
