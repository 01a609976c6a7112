#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <vector>

#include "findrl/env.hpp"
#include "findrl/nn.hpp"

namespace findrl {

/// 34 -> 64 -> 14 joint (DA, action) head, dropout 0.1.
nn::MlpSpec policy_spec();

struct PolicyNet {
  nn::MlpSpec spec = policy_spec();
  nn::MlpParams params;
};

PolicyNet init_policy(std::uint64_t seed);

/// Greedy: argmax over the whole joint head. With probability `epsilon`
/// (drawn from `rng`) a uniformly random entry of `legal` instead.
int act(const PolicyNet& policy, const nn::Vec& obs, const std::vector<int>& legal, double epsilon,
        Rng* rng);
inline int act_greedy(const PolicyNet& policy, const nn::Vec& obs) {
  return act(policy, obs, {}, 0.0, nullptr);
}
/// Argmax restricted to `legal` (ties to the lowest index); live sessions.
int act_greedy_legal(const PolicyNet& policy, const nn::Vec& obs, const std::vector<int>& legal);

class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return buf_[i]; }  // 0 = oldest

 private:
  std::size_t capacity_;
  std::deque<Transition> buf_;
};

/// r for terminal transitions, else r + gamma * max_a target(next_state).
double td_target(const Transition& t, const PolicyNet& target, double gamma);

struct GreedyScore {
  double success_rate = 0.0;
  double avg_turns = 0.0;
  int violations = 0;
  int episodes = 0;
};

/// Greedy rollouts of `policy` on copies of `env`, episode i reset with
/// derive_seed(seed, "episode", i).
GreedyScore greedy_score(const PolicyNet& policy, const FindEnv& env, std::uint64_t seed, int episodes);

// ---------------------------------------------------------------------------
// DAGGER warm-up.

struct DaggerHyper {
  int iterations = 25;  // N
  int max_turns = 25;   // M
  int eval_episodes = 50;
  int max_epochs = 200;
  int batch_size = 32;
  double lr = 1e-3;
  double tolerance = 1e-4;  // stop when the epoch loss improves by less than this
};

struct DaggerEpisode {
  int episode = 0;  // 1-based
  nn::MlpParams checkpoint;
  std::size_t dataset_size = 0;
  int rollout_turns = 0;
  bool rollout_success = false;
  int train_epochs = 0;
  double train_loss = 0.0;
  double success_rate = 0.0;  // greedy evaluation of `checkpoint`
  double avg_turns = 0.0;
};

struct DaggerRun {
  std::vector<DaggerEpisode> episodes;
};

/// Episode 1 rolls out the expert, later episodes the current policy (capped
/// at hyper.max_turns). Every visited state is labeled with the expert's
/// canonical pair and the policy is retrained on the aggregate by cross-entropy.
DaggerRun run_dagger(const FindEnv& env, const FindEnv& eval_env, std::uint64_t seed,
                     const DaggerHyper& hyper = {});

/// The checkpoint saved at `episode` (1-based).
PolicyNet select_warmup(const DaggerRun& run, int episode = 10);

// ---------------------------------------------------------------------------
// Deep Q-learning.

struct DqlHyper {
  int optimize_every = 500;  // C, episodes
  int target_copy_multiplier = 4;  // m
  int batch_size = 128;
  int passes = 4;  // passes over the memory per optimization
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_episodes = 3000;
  int total_episodes = 10000;
  std::size_t capacity = 50000;
  double lr = 1e-3;
  int eval_episodes = 200;  // greedy evaluation of each checkpoint

  void validate() const;
  double epsilon(int episode) const;  // episode is 0-based
};

struct EpisodeMetrics {
  int episode = 0;  // 1-based
  double ret = 0.0;
  int turns = 0;
  bool success = false;
  int violations = 0;
};

struct WindowMetrics {
  int window = 0;       // 1-based
  int last_episode = 0;
  double success_rate = 0.0;  // training rollouts (epsilon-greedy)
  double avg_turns = 0.0;
  double avg_reward = 0.0;
  double loss = 0.0;          // mean MSE of the optimization closing the window
  double eval_success = 0.0;  // greedy evaluation of the window's checkpoint
  double eval_turns = 0.0;
  int eval_violations = 0;
  bool target_copied = false;
};

struct DqlRun {
  std::vector<EpisodeMetrics> episodes;
  std::vector<WindowMetrics> windows;
  std::vector<nn::MlpParams> checkpoints;  // one per optimization, parallel to windows
  std::vector<int> target_copies;          // episodes at which policy -> target
  std::vector<std::uint64_t> target_hashes;  // target hash after each window
};

DqlRun run_dql(const FindEnv& env, const FindEnv& eval_env, const PolicyNet& warmup, std::uint64_t seed,
               const DqlHyper& hyper = {});

/// Index of the window with the best greedy success, then fewest turns, then
/// earliest.
std::size_t select_final_window(const std::vector<WindowMetrics>& windows);
PolicyNet select_final_policy(const DqlRun& run);

void write_episode_csv(std::ostream& out, const std::vector<EpisodeMetrics>& episodes);
void write_window_csv(std::ostream& out, const std::vector<WindowMetrics>& windows);
void write_dagger_csv(std::ostream& out, const DaggerRun& run);

}  // namespace findrl
