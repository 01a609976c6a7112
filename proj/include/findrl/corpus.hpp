#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "findrl/domain.hpp"
#include "findrl/interaction.hpp"

namespace findrl {

struct TraceStep {
  BeliefState belief;  // ELD belief before the HEL move
  HelMove hel;
  EldMove eld;
  BeliefState next_belief;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

enum class Outcome : std::uint8_t { Success, Failure };

struct Trace {
  std::string id;
  std::string origin;  // id of the base trace an augmented trace was derived from
  bool augmented = false;
  WorldConfig world;
  std::vector<Location> suggestion_order;
  EldMove opening;
  BeliefState opening_belief;
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::Failure;
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct CorpusParams {
  int max_turns = 20;
  EldParams eld;
};

/// `n` expert-vs-scripted-ELD traces without recognition errors.
std::vector<Trace> generate_corpus(int n, std::uint64_t seed, const CorpusParams& params = {});

// Variants built per base trace, replaying its world and suggestion order:
//  - ot_mishear: HEL mishears the first O_T it is given, verifies the wrong
//    object, is denied and has to ask again;
//  - l_mishear: the same for the first location;
//  - probe: HEL departs from the expert on ~30% of turns with a random legal
//    move, and every grounding is subject to the 25% recognition error.
enum class Variant : std::uint8_t { OtMishear, LMishear, Probe };

/// Returns the input followed by its augmented variants (input order kept).
std::vector<Trace> augment_corpus(const std::vector<Trace>& traces, std::uint64_t seed,
                                  const CorpusParams& params = {});

Trace make_variant(const Trace& base, Variant v, std::uint64_t seed, const CorpusParams& params = {});

struct CorpusSplit {
  std::vector<Trace> train, validation, test;
};

/// 80/10/10 split by base trace, so a base trace and its variants stay in one
/// part.
CorpusSplit split_corpus(const std::vector<Trace>& traces, std::uint64_t seed);

// Line-delimited JSON. Each trace is a header line
//   {"type":"trace","id","origin","augmented","world","suggestion_order",
//    "opening","opening_belief","outcome","steps":n}
// followed by n step lines
//   {"type":"step","trace","index","belief","hel","eld","next_belief"}.
void save_traces(const std::vector<Trace>& traces, const std::filesystem::path& path);
std::vector<Trace> load_traces(const std::filesystem::path& path);
std::string traces_to_string(const std::vector<Trace>& traces);
std::vector<Trace> traces_from_string(const std::string& text);

/// Beliefs ELD can hold during an episode: exhaustive search over every legal
/// HEL label sequence and every recognition-error branch, on `worlds` sampled
/// rooms with both opening forms.
std::vector<BeliefState> reachable_beliefs(int worlds = 8, std::uint64_t seed = 1);

struct BeliefCoverage {
  std::vector<BeliefState> covered;      // seen as next_belief in the corpus
  std::vector<BeliefState> missing;      // reachable but not seen
  std::vector<BeliefState> unreachable;  // of the 27, never produced by the rules
};
BeliefCoverage belief_coverage(const std::vector<Trace>& traces);

std::string_view to_string(Outcome o);

}  // namespace findrl
