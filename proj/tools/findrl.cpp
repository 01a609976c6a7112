#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "findrl/pipeline.hpp"
#include "findrl/service.hpp"

using namespace findrl;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
};

RunConfig resolve(const Globals& g, std::map<std::string, std::string> extra = {}) {
  std::map<std::string, std::string> overrides;
  for (const auto& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects section.key=value, got '" + kv + "'");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (auto& [k, v] : extra) overrides[k] = v;
  if (g.seed) overrides["run.seed"] = std::to_string(*g.seed);
  return load_config(g.config, overrides);
}

std::string in_dir(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

RunManifest manifest_for(Stage stage, const RunConfig& cfg) {
  RunManifest m;
  m.stage = stage;
  m.seed = cfg.seed;
  m.params = cfg;
  return m;
}

void finish(RunManifest& m, const std::string& dir, const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) m.add_output(o);
  const std::string path = in_dir(dir, to_string(m.stage) + ".manifest.json");
  save_manifest(path, m);
  std::cout << "wrote " << path << '\n';
}

template <typename F>
void write_file(const std::string& path, F body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  body(out);
}

SimModel load_sim(const std::string& path) {
  SimModel m;
  m.params = nn::load_checkpoint(path, m.spec);
  return m;
}

PolicyNet load_policy(const std::string& path) {
  PolicyNet p;
  p.params = nn::load_checkpoint(path, p.spec);
  return p;
}

struct Assets {
  std::shared_ptr<Lexicon> lex;
  std::shared_ptr<Templates> templates;
};

Assets load_assets(const std::string& data_dir) {
  return {std::make_shared<Lexicon>(Lexicon::load(data_dir + "/lexicon.txt")),
          std::make_shared<Templates>(Templates::load(data_dir + "/templates.txt"))};
}

std::shared_ptr<PolicyRegistry> registry_for(const std::string& policy_path, const std::string& id) {
  auto r = std::make_shared<PolicyRegistry>();
  r->add("expert", expert_live_policy(), "scripted expert");
  if (!policy_path.empty()) r->add(id, net_policy(load_policy(policy_path)), "greedy DQN from " + policy_path);
  return r;
}

void print_session_entry(const json& e) {
  std::cout << "robot: " << e["text"].get<std::string>();
  if (e.contains("revealed")) {
    std::cout << "  [inside:";
    for (const auto& o : e["revealed"]) std::cout << ' ' << o.get<std::string>();
    std::cout << ']';
  }
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find-task dialogue agent: corpus, simulator, DAGGER warm-up, DQL, evaluation and live sessions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides [run] seed)");
  app.add_option("--set", g.set, "override a config value: section.key=value");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate and augment the synthetic corpus");
  std::string gen_out = "runs/corpus";
  gen->add_option("--out", gen_out, "output directory");
  gen->callback([&] {
    const RunConfig cfg = resolve(g);
    const auto traces = build_corpus(cfg);
    const std::string path = in_dir(gen_out, "corpus.json");
    save_traces(traces, path);
    std::cout << traces.size() << " traces (" << cfg.corpus.base_traces << " base)\n";
    RunManifest m = manifest_for(Stage::Corpus, cfg);
    finish(m, gen_out, {path});
  });

  // train-sim
  auto* sim = app.add_subcommand("train-sim", "train the user simulator");
  std::string sim_corpus, sim_out = "runs/sim";
  sim->add_option("--corpus", sim_corpus, "corpus.json")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "output directory");
  sim->callback([&] {
    const RunConfig cfg = resolve(g);
    RunManifest m = manifest_for(Stage::Sim, cfg);
    m.add_input(sim_corpus);
    const auto split = split_for(cfg, load_traces(sim_corpus));
    SimHistory hist;
    const SimModel model = build_sim(cfg, split, &hist);
    const SimAccuracy acc = eval_sim(model, split.test);
    std::cout << "best epoch " << hist.best_epoch << ", test accuracy: action " << acc.action << ", da " << acc.da
              << ", state " << acc.state << ", overall " << acc.overall << '\n';
    const std::string ckpt = in_dir(sim_out, "sim.json");
    const std::string csv = in_dir(sim_out, "sim_history.csv");
    nn::save_checkpoint(ckpt, model.spec, model.params, m.run_digest());
    write_file(csv, [&](std::ostream& out) {
      out << "epoch,train_loss,val_loss\n";
      for (const auto& e : hist.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
    });
    const std::string metrics = in_dir(sim_out, "sim_metrics.json");
    write_file(metrics, [&](std::ostream& out) {
      out << json{{"action", acc.action}, {"da", acc.da}, {"state", acc.state}, {"overall", acc.overall},
                  {"examples", acc.examples}, {"best_epoch", hist.best_epoch}}
                 .dump(2)
          << '\n';
    });
    finish(m, sim_out, {ckpt, csv, metrics});
  });

  // warmup
  auto* warm = app.add_subcommand("warmup", "DAGGER warm-up against the simulator");
  std::string warm_sim, warm_out = "runs/warmup";
  int warm_episode = 10;
  warm->add_option("--sim", warm_sim, "sim.json")->required()->check(CLI::ExistingFile);
  warm->add_option("--out", warm_out, "output directory");
  warm->add_option("--episode", warm_episode, "DAGGER episode whose checkpoint seeds DQL");
  warm->callback([&] {
    const RunConfig cfg = resolve(g);
    RunManifest m = manifest_for(Stage::Dagger, cfg);
    m.add_input(warm_sim);
    const SimModel model = load_sim(warm_sim);
    const DaggerRun run = run_warmup(cfg, model);
    const PolicyNet chosen = select_warmup(run, warm_episode);
    const std::string csv = in_dir(warm_out, "dagger.csv");
    const std::string ckpt = in_dir(warm_out, "warmup.json");
    write_file(csv, [&](std::ostream& out) { write_dagger_csv(out, run); });
    nn::save_checkpoint(ckpt, chosen.spec, chosen.params, m.run_digest());
    std::cout << "episode " << warm_episode << " greedy success "
              << run.episodes.at(static_cast<std::size_t>(warm_episode - 1)).success_rate << '\n';
    finish(m, warm_out, {csv, ckpt});
  });

  // train-rl
  auto* rl = app.add_subcommand("train-rl", "deep Q-learning from the warm-up policy");
  std::string rl_sim, rl_warm, rl_out = "runs/dql";
  rl->add_option("--sim", rl_sim, "sim.json")->required()->check(CLI::ExistingFile);
  rl->add_option("--warmup", rl_warm, "warmup.json")->required()->check(CLI::ExistingFile);
  rl->add_option("--out", rl_out, "output directory");
  rl->callback([&] {
    const RunConfig cfg = resolve(g);
    RunManifest m = manifest_for(Stage::Dql, cfg);
    m.add_input(rl_sim);
    m.add_input(rl_warm);
    const SimModel model = load_sim(rl_sim);
    const DqlRun run = run_rl(cfg, model, load_policy(rl_warm));
    const std::size_t best = select_final_window(run.windows);
    const PolicyNet policy = select_final_policy(run);
    const std::string ep_csv = in_dir(rl_out, "dql_episodes.csv");
    const std::string win_csv = in_dir(rl_out, "dql_windows.csv");
    const std::string ckpt = in_dir(rl_out, "policy.json");
    write_file(ep_csv, [&](std::ostream& out) { write_episode_csv(out, run.episodes); });
    write_file(win_csv, [&](std::ostream& out) { write_window_csv(out, run.windows); });
    nn::save_checkpoint(ckpt, policy.spec, policy.params, m.run_digest());
    const auto& w = run.windows[best];
    std::cout << "selected window " << w.window << " (episode " << w.last_episode << "): greedy success "
              << w.eval_success << ", turns " << w.eval_turns << '\n';
    finish(m, rl_out, {ep_csv, win_csv, ckpt});
  });

  // eval
  auto* ev = app.add_subcommand("eval", "greedy evaluation of a policy against the simulator");
  std::string ev_sim, ev_policy, ev_out = "runs/eval", ev_log;
  bool ev_expert = false;
  ev->add_option("--sim", ev_sim, "sim.json")->required()->check(CLI::ExistingFile);
  ev->add_option("--policy", ev_policy, "policy.json")->check(CLI::ExistingFile);
  ev->add_flag("--expert", ev_expert, "evaluate the scripted expert instead");
  ev->add_option("--out", ev_out, "output directory");
  ev->add_option("--log", ev_log, "write per-episode JSON lines here");
  ev->callback([&] {
    const RunConfig cfg = resolve(g);
    if (ev_policy.empty() == !ev_expert) throw CLI::ValidationError("eval", "give exactly one of --policy or --expert");
    RunManifest m = manifest_for(Stage::Eval, cfg);
    m.add_input(ev_sim);
    const SimModel model = load_sim(ev_sim);
    PolicyFn policy = expert_policy();
    if (!ev_expert) {
      m.add_input(ev_policy);
      policy = greedy_policy(load_policy(ev_policy));
    }
    FindEnv env = eval_env(cfg, model);
    const EvalReport r = evaluate_policy(policy, env, cfg.eval.episodes, stage_seed(cfg, Stage::Eval));
    print_report(std::cout, r);
    std::vector<std::string> outputs;
    const std::string report = in_dir(ev_out, "eval.json");
    write_file(report, [&](std::ostream& out) { out << json(r).dump(2) << '\n'; });
    outputs.push_back(report);
    if (!ev_log.empty()) {
      write_file(ev_log, [&](std::ostream& out) {
        for (int i = 0; i < cfg.eval.episodes; ++i) {
          write_episode_log(out, run_episode(policy, env, derive_seed(stage_seed(cfg, Stage::Eval), "episode",
                                                                         static_cast<std::uint64_t>(i))));
        }
      });
      outputs.push_back(ev_log);
    }
    finish(m, ev_out, outputs);
  });

  // oracle
  auto* orc = app.add_subcommand("oracle", "tabular value-iteration oracle on the reduced room");
  bool orc_dqn = false;
  orc->add_flag("--check-dqn", orc_dqn, "also train a DQN on the reduced room and compare episode lengths");
  orc->callback([&] {
    const RunConfig cfg = resolve(g);
    EpisodeParams p = cfg.episode;
    p.error_rate = 0.0;
    const auto starts = reduced_starts();
    const OracleResult r = tabular_oracle(p, starts);
    std::cout << r.states << " states, " << r.residuals.size() << " sweeps, final residual " << r.residuals.back()
              << '\n';
    std::optional<PolicyFn> dqn;
    if (orc_dqn) {
      dqn = greedy_policy(train_reduced_dqn(p, stage_seed(cfg, Stage::Dql)));
    }
    int matches = 0;
    std::cout << "start  target  placement          order            opening  optimal  value" << (dqn ? "  dqn" : "")
              << '\n';
    for (std::size_t k = 0; k < starts.size(); ++k) {
      const auto& s = starts[k];
      std::cout << std::setw(5) << k << "  " << std::setw(10) << object_name(s.world.target) << "  "
                << std::setw(17) << locations_json(s.world.placement).dump() << "  " << std::setw(15)
                << locations_json(s.suggestion_order).dump() << "  " << (s.spontaneous ? "ot+l   " : "ot     ")
                << "  " << std::setw(7) << r.optimal_lengths[k] << "  " << std::setw(6) << std::fixed
                << std::setprecision(3) << r.start_values[k];
      if (dqn) {
        const int n = episode_length(*dqn, p, s);
        matches += n == r.optimal_lengths[k];
        std::cout << "  " << n;
      }
      std::cout << '\n';
    }
    if (dqn) std::cout << "dqn matches the oracle on " << matches << " / " << starts.size() << " starts\n";
  });

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP service for live sessions");
  std::string srv_policy, srv_id = "dqn", srv_data = default_data_dir(), srv_log;
  std::optional<int> srv_port;
  std::optional<std::string> srv_host, srv_static;
  srv->add_option("--policy", srv_policy, "policy.json")->check(CLI::ExistingFile);
  srv->add_option("--policy-id", srv_id, "id the policy is listed under");
  srv->add_option("--data", srv_data, "directory with lexicon.txt and templates.txt");
  srv->add_option("--host", srv_host, "bind address (overrides [service] host)");
  srv->add_option("--port", srv_port, "port (overrides [service] port)");
  srv->add_option("--static", srv_static, "directory served at / (overrides [service] static_dir)");
  srv->add_option("--log", srv_log, "append session events here");
  srv->callback([&] {
    std::map<std::string, std::string> extra;
    if (srv_host) extra["service.host"] = *srv_host;
    if (srv_port) extra["service.port"] = std::to_string(*srv_port);
    if (srv_static) extra["service.static_dir"] = *srv_static;
    const RunConfig cfg = resolve(g, extra);
    const Assets a = load_assets(srv_data);
    SessionManager manager(registry_for(srv_policy, srv_id), a.lex, a.templates, cfg.seed,
                           {cfg.service.max_turns, cfg.service.error_rate}, srv_log);
    httplib::Server server;
    install_routes(server, manager, cfg.service.static_dir);
    std::cout << "listening on http://" << cfg.service.host << ':' << cfg.service.port << std::endl;
    if (!server.listen(cfg.service.host, cfg.service.port)) {
      throw std::runtime_error("cannot listen on " + cfg.service.host + ":" + std::to_string(cfg.service.port));
    }
  });

  // play
  auto* play = app.add_subcommand("play", "play the human side in the terminal");
  std::string play_policy, play_data = default_data_dir();
  play->add_option("--policy", play_policy, "policy.json (default: scripted expert)")->check(CLI::ExistingFile);
  play->add_option("--data", play_data, "directory with lexicon.txt and templates.txt");
  play->callback([&] {
    const RunConfig cfg = resolve(g);
    const Assets a = load_assets(play_data);
    SessionManager manager(registry_for(play_policy, "dqn"), a.lex, a.templates, cfg.seed,
                           {cfg.service.max_turns, cfg.service.error_rate});
    const json s = manager.create(play_policy.empty() ? "expert" : "dqn", cfg.seed);
    std::cout << "You want the " << s["target"].get<std::string>() << ". Places: " << s["locations"].dump()
              << ". Type '@shelf' to point; 'quit' leaves.\n";
    print_session_entry(s["transcript"].back());
    for (std::string line; std::cout << "you: " << std::flush, std::getline(std::cin, line);) {
      if (line == "quit") break;
      std::optional<Location> pointing;
      if (const auto at = line.find('@'); at != std::string::npos) {
        auto end = line.find(' ', at);
        pointing = parse_location(line.substr(at + 1, end == std::string::npos ? std::string::npos : end - at - 1));
        line.erase(at, end == std::string::npos ? std::string::npos : end - at);
      }
      try {
        const json r = manager.move(s["id"], line, pointing);
        print_session_entry(r["reply"]);
        if (r["session"]["status"] != "active") {
          std::cout << r["session"]["status"].get<std::string>() << " after " << r["session"]["turn"] << " turns\n";
          break;
        }
      } catch (const ServiceError& e) {
        std::cout << "(" << e.what() << ")\n";
      }
    }
  });

  // verify
  auto* ver = app.add_subcommand("verify", "check that stage manifests chain together");
  std::vector<std::string> ver_paths;
  ver->add_option("manifests", ver_paths, "manifest files in pipeline order")->required();
  ver->callback([&] {
    const ChainReport r = verify_chain(ver_paths);
    for (const auto& p : r.problems) std::cout << p << '\n';
    std::cout << (r.ok ? "chain ok" : "chain broken") << '\n';
    if (!r.ok) throw CLI::RuntimeError(1);
  });

  // show-config
  auto* show = app.add_subcommand("show-config", "print the resolved configuration as INI");
  show->callback([&] { std::cout << to_ini(resolve(g)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
