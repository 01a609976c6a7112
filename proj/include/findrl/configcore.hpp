#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "findrl/corpus.hpp"
#include "findrl/env.hpp"
#include "findrl/jsonio.hpp"
#include "findrl/training.hpp"
#include "findrl/usersim.hpp"

namespace findrl {

struct CorpusConfig {
  int base_traces = 500;
  CorpusParams params;
};

struct EvalConfig {
  int episodes = 1000;
  int max_turns = 15;
  double error_rate = 0.25;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_turns = 15;
  double error_rate = 0.0;  // recognition errors in live sessions
  std::string static_dir;
};

// Every tunable of the pipeline. Sections of the config file:
// [run] [corpus] [episode] [sim] [dagger] [dql] [eval] [service]
struct RunConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  EpisodeParams episode;
  SimHyper sim;
  DaggerHyper dagger;
  DqlHyper dql;
  EvalConfig eval;
  ServiceConfig service;

  /// Throws std::invalid_argument on out-of-range or non-finite values.
  void validate() const;
};

/// "section.key" names accepted by the loader, in file order.
std::vector<std::string> config_keys();

/// Sets one "section.key"; unknown keys and unparsable values throw
/// std::invalid_argument naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// Defaults, then the INI file (if `path` is non-empty), then `overrides`
/// ("section.key" -> value). The result is validated.
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// INI text that load_config reads back to `cfg`.
std::string to_ini(const RunConfig& cfg);
void to_json(json& j, const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Manifests

std::string sha256_hex(const std::string& data);
/// Throws std::runtime_error when the file cannot be read.
std::string file_sha256(const std::string& path);

enum class Stage { Corpus, Sim, Dagger, Dql, Eval };
std::string to_string(Stage s);
Stage parse_stage(const std::string& s);

struct Artifact {
  std::string path;
  std::string sha256;
  friend bool operator==(const Artifact&, const Artifact&) = default;
};

struct RunManifest {
  Stage stage = Stage::Corpus;
  std::uint64_t seed = 0;
  json params;
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;

  /// Digest of everything above.
  std::string digest() const;
  /// Digest of stage, seed, params and inputs: known before the outputs
  /// exist, so artifacts can carry it.
  std::string run_digest() const;
  // Paths are stored canonicalized so stages match by path.
  void add_input(const std::string& path);
  void add_output(const std::string& path);
};

void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

/// Written as JSON together with its digest.
void save_manifest(const std::string& path, const RunManifest& m);
/// Throws std::runtime_error when missing, unreadable, or its stored digest
/// does not match its content.
RunManifest load_manifest(const std::string& path);

struct ChainReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Checks that stages appear in pipeline order, that every input of a stage
/// was an output of an earlier one with the same digest, and (optionally)
/// that files on disk still hash to the recorded outputs.
ChainReport verify_chain(const std::vector<RunManifest>& manifests, bool check_files = true);
/// Loads then verifies; a missing manifest throws std::runtime_error.
ChainReport verify_chain(const std::vector<std::string>& manifest_paths, bool check_files = true);

}  // namespace findrl
