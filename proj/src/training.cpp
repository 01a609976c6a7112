#include "findrl/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace findrl {

nn::MlpSpec policy_spec() { return {{kObsDim, 64, kNumJointActions}, 0.1, {{"joint", kNumJointActions}}}; }

PolicyNet init_policy(std::uint64_t seed) {
  PolicyNet p;
  Rng rng(seed);
  p.params = nn::MlpParams::init(p.spec, rng);
  return p;
}

int act(const PolicyNet& policy, const nn::Vec& obs, const std::vector<int>& legal, double epsilon,
        Rng* rng) {
  if (epsilon > 0.0) {
    if (rng == nullptr) throw std::invalid_argument("act: epsilon > 0 needs an rng");
    if (legal.empty()) throw std::invalid_argument("act: no legal pairs to explore");
    if (rng->bernoulli(epsilon)) return legal[rng->below(legal.size())];
  }
  return nn::argmax(nn::forward(policy.params, policy.spec, obs, nn::Mode::Eval));
}

int act_greedy_legal(const PolicyNet& policy, const nn::Vec& obs, const std::vector<int>& legal) {
  if (legal.empty()) throw std::invalid_argument("act_greedy_legal: no legal pairs");
  const nn::Vec q = nn::forward(policy.params, policy.spec, obs, nn::Mode::Eval);
  int best = legal.front();
  for (int a : legal) {
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayMemory::push(Transition t) {
  if (buf_.size() == capacity_) buf_.pop_front();
  buf_.push_back(std::move(t));
}

double td_target(const Transition& t, const PolicyNet& target, double gamma) {
  if (t.terminal) return t.reward;
  const nn::Vec q = nn::forward(target.params, target.spec, t.next_state, nn::Mode::Eval);
  return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

GreedyScore greedy_score(const PolicyNet& policy, const FindEnv& env, std::uint64_t seed, int episodes) {
  FindEnv e = env;
  GreedyScore s;
  int successes = 0;
  long turns = 0;
  for (int i = 0; i < episodes; ++i) {
    Observation obs = e.reset(derive_seed(seed, "episode", static_cast<std::uint64_t>(i)));
    while (!e.done()) {
      const auto r = e.step(act_greedy(policy, encode_observation(obs)));
      s.violations += r.record.violation;
      obs = r.obs;
    }
    successes += e.succeeded();
    turns += e.turn();
  }
  s.episodes = episodes;
  if (episodes > 0) {
    s.success_rate = static_cast<double>(successes) / episodes;
    s.avg_turns = static_cast<double>(turns) / episodes;
  }
  return s;
}

// ---------------------------------------------------------------------------
// DAGGER

namespace {

struct Labeled {
  nn::Vec x;
  int label = 0;
};

// Cross-entropy epochs over `data` until the epoch loss stops improving.
std::pair<int, double> fit_xent(PolicyNet& p, const std::vector<Labeled>& data, const DaggerHyper& h,
                                Rng& order_rng, Rng& drop_rng) {
  auto adam = nn::AdamState::for_params(p.params, {h.lr});
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Cache cache;
  double prev = std::numeric_limits<double>::infinity();
  double loss = 0.0;
  int epoch = 0;
  while (epoch < h.max_epochs) {
    ++epoch;
    order_rng.shuffle(order);
    loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(h.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(h.batch_size));
      auto grads = nn::MlpParams::zeros(p.spec);
      for (std::size_t i = start; i < end; ++i) {
        const auto& d = data[order[i]];
        const nn::Vec out = nn::forward(p.params, p.spec, d.x, nn::Mode::Train, &drop_rng, &cache);
        auto lg = nn::softmax_xent(out, d.label);
        loss += lg.loss;
        for (double& g : lg.grad) g /= static_cast<double>(end - start);
        nn::backward(p.params, cache, lg.grad, grads);
      }
      nn::adam_step(p.params, grads, adam);
    }
    loss /= static_cast<double>(data.size());
    if (prev - loss < h.tolerance) break;
    prev = loss;
  }
  return {epoch, loss};
}

}  // namespace

DaggerRun run_dagger(const FindEnv& env, const FindEnv& eval_env, std::uint64_t seed, const DaggerHyper& h) {
  if (h.iterations < 1 || h.max_turns < 1) throw std::invalid_argument("run_dagger: bad hyperparameters");
  PolicyNet policy = init_policy(derive_seed(seed, "dagger/init"));
  Rng order_rng(derive_seed(seed, "dagger/order"));
  Rng drop_rng(derive_seed(seed, "dagger/dropout"));
  const std::uint64_t eval_seed = derive_seed(seed, "dagger/eval");
  FindEnv e = env;
  std::vector<Labeled> data;
  DaggerRun run;
  for (int ep = 1; ep <= h.iterations; ++ep) {
    Observation obs = e.reset(derive_seed(seed, "dagger/episode", static_cast<std::uint64_t>(ep)));
    int turns = 0;
    while (!e.done() && turns < h.max_turns) {
      const nn::Vec x = encode_observation(obs);
      const int label = hel_pair_index(canonical_pair(scripted_expert(e.tracker())));
      data.push_back({x, label});
      // The first episode follows the expert; the learner drives from then on.
      obs = e.step(ep == 1 ? label : act_greedy(policy, x)).obs;
      ++turns;
    }
    DaggerEpisode rec;
    rec.episode = ep;
    rec.rollout_turns = turns;
    rec.rollout_success = e.succeeded();
    std::tie(rec.train_epochs, rec.train_loss) = fit_xent(policy, data, h, order_rng, drop_rng);
    rec.checkpoint = policy.params;
    rec.dataset_size = data.size();
    const GreedyScore s = greedy_score(policy, eval_env, eval_seed, h.eval_episodes);
    rec.success_rate = s.success_rate;
    rec.avg_turns = s.avg_turns;
    run.episodes.push_back(std::move(rec));
  }
  return run;
}

PolicyNet select_warmup(const DaggerRun& run, int episode) {
  if (episode < 1 || episode > static_cast<int>(run.episodes.size())) {
    throw std::out_of_range("select_warmup: no checkpoint for episode " + std::to_string(episode));
  }
  PolicyNet p;
  p.params = run.episodes[static_cast<std::size_t>(episode - 1)].checkpoint;
  return p;
}

// ---------------------------------------------------------------------------
// DQL

void DqlHyper::validate() const {
  if (optimize_every < 1 || target_copy_multiplier < 1) throw std::invalid_argument("C and m must be >= 1");
  if (batch_size < 1 || passes < 1 || total_episodes < 1 || capacity < 1) {
    throw std::invalid_argument("DQL sizes must be positive");
  }
  if (eps_decay_episodes < 1) throw std::invalid_argument("eps_decay_episodes must be >= 1");
}

double DqlHyper::epsilon(int episode) const {
  if (episode >= eps_decay_episodes) return eps_end;
  const double f = static_cast<double>(episode) / eps_decay_episodes;
  return eps_start + (eps_end - eps_start) * f;
}

namespace {

// Passes of minibatch MSE on Q(s, a) toward the fixed targets. Returns the
// mean loss of the last pass.
double optimize(PolicyNet& policy, const PolicyNet& target, const ReplayMemory& mem, const DqlHyper& h,
                double gamma, nn::AdamState& adam, Rng& order_rng, Rng& drop_rng) {
  const std::size_t n = mem.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = td_target(mem[i], target, gamma);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::Cache cache;
  double loss = 0.0;
  for (int pass = 0; pass < h.passes; ++pass) {
    order_rng.shuffle(order);
    loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(h.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(h.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      auto grads = nn::MlpParams::zeros(policy.spec);
      for (std::size_t i = start; i < end; ++i) {
        const Transition& t = mem[order[i]];
        const nn::Vec q = nn::forward(policy.params, policy.spec, t.state, nn::Mode::Train, &drop_rng, &cache);
        const double diff = q[static_cast<std::size_t>(t.action)] - y[order[i]];
        loss += 0.5 * diff * diff;
        nn::Vec g(q.size(), 0.0);
        g[static_cast<std::size_t>(t.action)] = diff * scale;
        nn::backward(policy.params, cache, g, grads);
      }
      nn::adam_step(policy.params, grads, adam);
    }
    loss /= static_cast<double>(n);
  }
  return loss;
}

}  // namespace

DqlRun run_dql(const FindEnv& env, const FindEnv& eval_env, const PolicyNet& warmup, std::uint64_t seed,
               const DqlHyper& h) {
  h.validate();
  if (!(warmup.spec == policy_spec())) throw std::invalid_argument("run_dql: warm-up network shape mismatch");
  PolicyNet policy = warmup;
  PolicyNet target = warmup;
  ReplayMemory mem(h.capacity);
  auto adam = nn::AdamState::for_params(policy.params, {h.lr});
  Rng act_rng(derive_seed(seed, "dql/act"));
  Rng order_rng(derive_seed(seed, "dql/order"));
  Rng drop_rng(derive_seed(seed, "dql/dropout"));
  const std::uint64_t eval_seed = derive_seed(seed, "dql/eval");
  const double gamma = env.params().gamma;
  FindEnv e = env;
  DqlRun run;

  for (int ep = 0; ep < h.total_episodes; ++ep) {
    const double eps = h.epsilon(ep);
    Observation obs = e.reset(derive_seed(seed, "dql/episode", static_cast<std::uint64_t>(ep)));
    nn::Vec x = encode_observation(obs);
    EpisodeMetrics m;
    m.episode = ep + 1;
    while (!e.done()) {
      const int a = act(policy, x, e.legal_pairs(), eps, &act_rng);
      const StepResult r = e.step(a);
      nn::Vec x2 = encode_observation(r.obs);
      mem.push({x, a, r.reward, x2, r.terminal});
      m.ret += r.reward;
      m.violations += r.record.violation;
      x = std::move(x2);
    }
    m.turns = e.turn();
    m.success = e.succeeded();
    run.episodes.push_back(m);

    if ((ep + 1) % h.optimize_every != 0) continue;
    WindowMetrics w;
    w.window = static_cast<int>(run.windows.size()) + 1;
    w.last_episode = ep + 1;
    const auto first = run.episodes.end() - h.optimize_every;
    for (auto it = first; it != run.episodes.end(); ++it) {
      w.success_rate += it->success;
      w.avg_turns += it->turns;
      w.avg_reward += it->ret;
    }
    w.success_rate /= h.optimize_every;
    w.avg_turns /= h.optimize_every;
    w.avg_reward /= h.optimize_every;
    w.loss = optimize(policy, target, mem, h, gamma, adam, order_rng, drop_rng);
    if ((ep + 1) % (h.optimize_every * h.target_copy_multiplier) == 0) {
      target = policy;
      w.target_copied = true;
      run.target_copies.push_back(ep + 1);
    }
    const GreedyScore s = greedy_score(policy, eval_env, eval_seed, h.eval_episodes);
    w.eval_success = s.success_rate;
    w.eval_turns = s.avg_turns;
    w.eval_violations = s.violations;
    run.windows.push_back(w);
    run.checkpoints.push_back(policy.params);
    run.target_hashes.push_back(target.params.hash());
  }
  return run;
}

std::size_t select_final_window(const std::vector<WindowMetrics>& windows) {
  if (windows.empty()) throw std::invalid_argument("select_final_window: no windows");
  std::size_t best = 0;
  for (std::size_t i = 1; i < windows.size(); ++i) {
    const auto& a = windows[i];
    const auto& b = windows[best];
    if (a.eval_success > b.eval_success || (a.eval_success == b.eval_success && a.eval_turns < b.eval_turns)) {
      best = i;
    }
  }
  return best;
}

PolicyNet select_final_policy(const DqlRun& run) {
  if (run.checkpoints.empty()) throw std::invalid_argument("select_final_policy: no checkpoints");
  PolicyNet p;
  p.params = run.checkpoints[select_final_window(run.windows)];
  return p;
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeMetrics>& episodes) {
  out << "episode,return,turns,success,violations\n";
  for (const auto& m : episodes) {
    out << m.episode << ',' << m.ret << ',' << m.turns << ',' << (m.success ? 1 : 0) << ',' << m.violations << '\n';
  }
}

void write_window_csv(std::ostream& out, const std::vector<WindowMetrics>& windows) {
  out << "window,last_episode,success_rate,avg_turns,avg_reward,loss,eval_success,eval_turns,eval_violations,"
         "target_copied\n";
  for (const auto& w : windows) {
    out << w.window << ',' << w.last_episode << ',' << w.success_rate << ',' << w.avg_turns << ',' << w.avg_reward
        << ',' << w.loss << ',' << w.eval_success << ',' << w.eval_turns << ',' << w.eval_violations << ','
        << (w.target_copied ? 1 : 0) << '\n';
  }
}

void write_dagger_csv(std::ostream& out, const DaggerRun& run) {
  out << "episode,dataset_size,rollout_turns,rollout_success,train_epochs,train_loss,success_rate,avg_turns\n";
  for (const auto& e : run.episodes) {
    out << e.episode << ',' << e.dataset_size << ',' << e.rollout_turns << ',' << (e.rollout_success ? 1 : 0) << ','
        << e.train_epochs << ',' << e.train_loss << ',' << e.success_rate << ',' << e.avg_turns << '\n';
  }
}

}  // namespace findrl
