#include "findrl/configcore.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace findrl {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  if constexpr (std::is_unsigned_v<T>) {
    if (!text.empty() && text.find('-') != std::string::npos) in.setstate(std::ios::failbit);
  }
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw std::invalid_argument("config key '" + key + "': bad value '" + text + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw std::invalid_argument("config key '" + key + "': value must be finite");
  }
  return v;
}

// Shortest text that reads back to the same value.
template <typename T>
std::string format_number(T v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
Field field(const std::string& key, T& (*ref)(RunConfig&)) {
  return {key,
          [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<T>(key, v); },
          [ref](const RunConfig& c) { return format_number(ref(const_cast<RunConfig&>(c))); }};
}

Field text_field(const std::string& key, std::string& (*ref)(RunConfig&)) {
  return {key, [ref](RunConfig& c, const std::string& v) { ref(c) = v; },
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

#define FIELD(key, expr) field(key, +[](RunConfig& c) -> auto& { return c.expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      FIELD("run.seed", seed),
      FIELD("corpus.base_traces", corpus.base_traces),
      FIELD("corpus.max_turns", corpus.params.max_turns),
      FIELD("corpus.spontaneous_rate", corpus.params.eld.spontaneous_rate),
      FIELD("corpus.command_rate", corpus.params.eld.command_rate),
      FIELD("episode.max_turns", episode.max_turns),
      FIELD("episode.move_cost", episode.move_cost),
      FIELD("episode.violation_penalty", episode.violation_penalty),
      FIELD("episode.error_rate", episode.error_rate),
      FIELD("episode.gamma", episode.gamma),
      FIELD("sim.max_epochs", sim.max_epochs),
      FIELD("sim.patience", sim.patience),
      FIELD("sim.batch_size", sim.batch_size),
      FIELD("sim.lr", sim.lr),
      FIELD("dagger.iterations", dagger.iterations),
      FIELD("dagger.max_turns", dagger.max_turns),
      FIELD("dagger.eval_episodes", dagger.eval_episodes),
      FIELD("dagger.max_epochs", dagger.max_epochs),
      FIELD("dagger.batch_size", dagger.batch_size),
      FIELD("dagger.lr", dagger.lr),
      FIELD("dagger.tolerance", dagger.tolerance),
      FIELD("dql.optimize_every", dql.optimize_every),
      FIELD("dql.target_copy_multiplier", dql.target_copy_multiplier),
      FIELD("dql.batch_size", dql.batch_size),
      FIELD("dql.passes", dql.passes),
      FIELD("dql.eps_start", dql.eps_start),
      FIELD("dql.eps_end", dql.eps_end),
      FIELD("dql.eps_decay_episodes", dql.eps_decay_episodes),
      FIELD("dql.total_episodes", dql.total_episodes),
      FIELD("dql.capacity", dql.capacity),
      FIELD("dql.lr", dql.lr),
      FIELD("dql.eval_episodes", dql.eval_episodes),
      FIELD("eval.episodes", eval.episodes),
      FIELD("eval.max_turns", eval.max_turns),
      FIELD("eval.error_rate", eval.error_rate),
      text_field("service.host", +[](RunConfig& c) -> std::string& { return c.service.host; }),
      FIELD("service.port", service.port),
      FIELD("service.max_turns", service.max_turns),
      FIELD("service.error_rate", service.error_rate),
      text_field("service.static_dir", +[](RunConfig& c) -> std::string& { return c.service.static_dir; }),
  };
  return f;
}

#undef FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string digest_hex(const unsigned char* md, unsigned len) {
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

constexpr Stage kStages[] = {Stage::Corpus, Stage::Sim, Stage::Dagger, Stage::Dql, Stage::Eval};

}  // namespace

void RunConfig::validate() const {
  episode.validate();
  dql.validate();
  require(corpus.base_traces >= 10, "corpus.base_traces must be at least 10");
  require(corpus.params.max_turns >= 1, "corpus.max_turns must be at least 1");
  for (double r : {corpus.params.eld.spontaneous_rate, corpus.params.eld.command_rate, eval.error_rate,
                   service.error_rate}) {
    require(r >= 0.0 && r <= 1.0, "rates must be in [0, 1]");
  }
  require(sim.max_epochs >= 1 && sim.patience >= 1 && sim.batch_size >= 1 && sim.lr > 0.0,
          "sim hyperparameters must be positive");
  require(dagger.iterations >= 1 && dagger.max_turns >= 1 && dagger.eval_episodes >= 1 && dagger.max_epochs >= 1 &&
              dagger.batch_size >= 1 && dagger.lr > 0.0 && dagger.tolerance >= 0.0,
          "dagger hyperparameters must be positive");
  require(eval.episodes >= 1 && eval.max_turns >= 1, "eval.episodes and eval.max_turns must be positive");
  require(service.port >= 0 && service.port <= 65535, "service.port must be in [0, 65535]");
  require(service.max_turns >= 1, "service.max_turns must be at least 1");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find_field(key).get(cfg); }

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw std::invalid_argument("config " + path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw std::invalid_argument("config key '" + section + "' must sit inside a section");
      }
      for (const auto& [key, value] : body) set_config_value(cfg, section + "." + key, value.data());
    }
  }
  for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string s = f.key.substr(0, dot);
    if (s != section) {
      out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

void to_json(json& j, const RunConfig& cfg) {
  j = json::object();
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    j[f.key.substr(0, dot)][f.key.substr(dot + 1)] = f.get(cfg);
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("sha256 failed");
  }
  return digest_hex(md, len);
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Corpus: return "corpus";
    case Stage::Sim: return "sim";
    case Stage::Dagger: return "dagger";
    case Stage::Dql: return "dql";
    case Stage::Eval: return "eval";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  for (Stage v : kStages) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown stage '" + s + "'");
}

void to_json(json& j, const RunManifest& m) {
  auto list = [](const std::vector<Artifact>& a) {
    json out = json::array();
    for (const auto& x : a) out.push_back({{"path", x.path}, {"sha256", x.sha256}});
    return out;
  };
  j = json{{"stage", to_string(m.stage)},
           {"seed", m.seed},
           {"params", m.params},
           {"inputs", list(m.inputs)},
           {"outputs", list(m.outputs)}};
}

void from_json(const json& j, RunManifest& m) {
  auto list = [](const json& a) {
    std::vector<Artifact> out;
    for (const auto& x : a) out.push_back({x.at("path").get<std::string>(), x.at("sha256").get<std::string>()});
    return out;
  };
  m.stage = parse_stage(j.at("stage").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.params = j.value("params", json::object());
  m.inputs = list(j.at("inputs"));
  m.outputs = list(j.at("outputs"));
}

std::string RunManifest::digest() const { return sha256_hex(json(*this).dump()); }

std::string RunManifest::run_digest() const {
  json j = *this;
  j.erase("outputs");
  return sha256_hex(j.dump());
}

namespace {
std::string canonical(const std::string& path) { return std::filesystem::weakly_canonical(path).string(); }
}  // namespace

void RunManifest::add_input(const std::string& path) { inputs.push_back({canonical(path), file_sha256(path)}); }
void RunManifest::add_output(const std::string& path) { outputs.push_back({canonical(path), file_sha256(path)}); }

void save_manifest(const std::string& path, const RunManifest& m) {
  json j = m;
  j["digest"] = m.digest();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing manifest " + path);
  RunManifest m;
  json j;
  try {
    j = json::parse(in);
    m = j.get<RunManifest>();
  } catch (const json::exception& e) {
    throw std::runtime_error("unreadable manifest " + path + ": " + e.what());
  }
  if (j.value("digest", std::string()) != m.digest()) throw std::runtime_error("manifest " + path + " was altered");
  return m;
}

ChainReport verify_chain(const std::vector<RunManifest>& manifests, bool check_files) {
  ChainReport r;
  auto problem = [&](std::string what) {
    r.ok = false;
    r.problems.push_back(std::move(what));
  };
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const RunManifest& m = manifests[i];
    const std::string name = to_string(m.stage);
    if (i > 0 && static_cast<int>(m.stage) <= static_cast<int>(manifests[i - 1].stage)) {
      problem(name + ": out of pipeline order after " + to_string(manifests[i - 1].stage));
    }
    for (const auto& in : m.inputs) {
      bool produced = false, same = false;
      for (std::size_t k = 0; k < i; ++k) {
        for (const auto& out : manifests[k].outputs) {
          if (out.path != in.path) continue;
          produced = true;
          same = same || out.sha256 == in.sha256;
        }
      }
      if (!produced) {
        if (i > 0) problem(name + ": input " + in.path + " was not produced by an earlier stage");
      } else if (!same) {
        problem(name + ": input " + in.path + " digest differs from the one produced upstream");
      }
    }
    if (!check_files) continue;
    for (const auto& out : m.outputs) {
      std::string now;
      try {
        now = file_sha256(out.path);
      } catch (const std::runtime_error&) {
        problem(name + ": output " + out.path + " is missing");
        continue;
      }
      if (now != out.sha256) problem(name + ": output " + out.path + " changed since the stage ran");
    }
  }
  return r;
}

ChainReport verify_chain(const std::vector<std::string>& manifest_paths, bool check_files) {
  std::vector<RunManifest> ms;
  for (const auto& p : manifest_paths) ms.push_back(load_manifest(p));
  return verify_chain(ms, check_files);
}

}  // namespace findrl
