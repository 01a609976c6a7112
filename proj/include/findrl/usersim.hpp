#pragma once

#include <array>
#include <optional>
#include <vector>

#include "findrl/corpus.hpp"
#include "findrl/interaction.hpp"
#include "findrl/nn.hpp"

namespace findrl {

inline constexpr int kSimFeatures = 47;

/// One-hot groups: b_ot 3, b_l 3, b_o 3, pointing 4 (none last), ho 3,
/// hel action 9, hel da 7, previous eld action 7 (none last), previous eld da
/// 8 (none last).
nn::Vec encode_sim_features(const BeliefState& belief, const HelMove& hel,
                            const std::optional<EldMove>& prev_eld);

// Head order of the simulator output.
enum SimHead : int { kHeadBeliefOt, kHeadBeliefL, kHeadBeliefO, kHeadDa, kHeadAction, kNumSimHeads };

nn::MlpSpec sim_spec();

struct SimModel {
  nn::MlpSpec spec = sim_spec();
  nn::MlpParams params;
};

struct SimExample {
  nn::Vec x;
  std::array<int, kNumSimHeads> y{};
};

/// One example per trace step; the previous ELD move of step 0 is the opening.
std::vector<SimExample> sim_examples(const std::vector<Trace>& traces);

struct SimHyper {
  int max_epochs = 100;
  int patience = 10;
  int batch_size = 32;
  double lr = 1e-3;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct SimHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based epoch whose parameters were returned
};

/// Summed per-head cross-entropy with Adam and early stopping on validation
/// loss; returns the best-validation parameters.
SimModel train_sim(const CorpusSplit& split, std::uint64_t seed, const SimHyper& hyper = {},
                   SimHistory* history = nullptr);

struct SimAccuracy {
  double action = 0.0;
  double da = 0.0;
  double state = 0.0;  // all three belief heads right
  double overall = 0.0;  // every head right
  std::size_t examples = 0;
};

SimAccuracy eval_sim(const SimModel& model, const std::vector<Trace>& traces);
SimAccuracy eval_sim(const SimModel& model, const std::vector<SimExample>& examples);

/// Best accuracy any predictor of these features can reach on `examples`:
/// per distinct feature vector, the most frequent label (tuple) wins.
SimAccuracy bayes_ceiling(const std::vector<SimExample>& examples);

/// Raw head decisions of the simulator.
struct SimLabels {
  BeliefState belief;
  DaTag da = DaTag::Statement;
  EldActionLabel action = EldActionLabel::GiveOT;
};

struct Decode {
  bool sample = false;
  double temperature = 1.0;
  Rng* rng = nullptr;

  static Decode argmax() { return {}; }
  static Decode sampled(Rng& r, double t = 1.0) { return {true, t, &r}; }
};

SimLabels sim_predict(const SimModel& model, const BeliefState& belief, const HelMove& hel,
                      const std::optional<EldMove>& prev_eld, const Decode& decode);

/// The simulator's reply as a full ELD move. Arguments and the truth of
/// Affirm/Deny answers come from the scripted ELD's world knowledge: when the
/// simulator's answer to a verify/search/present/done contradicts the world,
/// the scripted reply is used. `ctx` advances exactly as with the scripted ELD.
EldReply sim_respond(const SimModel& model, const BeliefState& belief, const HelMove& hel,
                     const std::optional<EldMove>& prev_eld, EldContext& ctx, Rng& rng,
                     const Decode& decode, const EldParams& params = {});

}  // namespace findrl
