#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "findrl/rng.hpp"

namespace findrl::nn {

using Vec = std::vector<double>;

struct Head {
  std::string name;
  int size = 0;
  friend bool operator==(const Head&, const Head&) = default;
};

// Dense ReLU network. Dropout (inverted) follows the last hidden layer; the
// output layer is linear and split into named heads.
struct MlpSpec {
  std::vector<int> layer_sizes;
  double dropout_rate = 0.0;
  std::vector<Head> heads;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  /// Offset of head `i` in the output vector.
  int head_offset(std::size_t i) const;
  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct Layer {
  int in = 0, out = 0;
  Vec w;  // out x in, row-major
  Vec b;
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpParams {
  std::vector<Layer> layers;

  /// Zero-valued parameters shaped for `spec`.
  static MlpParams zeros(const MlpSpec& spec);
  /// Glorot-uniform weights, zero biases.
  static MlpParams init(const MlpSpec& spec, Rng& rng);

  std::size_t size() const;
  void fill(double v);
  /// this += scale * other
  void axpy(double scale, const MlpParams& other);
  /// FNV-1a over the raw parameter bytes; equal hashes <=> equal parameters
  /// for all practical purposes.
  std::uint64_t hash() const;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct Cache {
  std::vector<Vec> inputs;  // input to each layer (after ReLU/dropout of the previous)
  std::vector<Vec> pre;     // pre-activation of each layer
  Vec mask;                 // dropout multipliers of the last hidden layer; empty in eval mode
};

enum class Mode { Eval, Train };

/// Output logits for one input. In Train mode `rng` drives dropout.
Vec forward(const MlpParams& p, const MlpSpec& spec, std::span<const double> x, Mode mode,
            Rng* rng = nullptr, Cache* cache = nullptr);

/// Accumulates parameter gradients of sum(grad_out . logits) into `grads`.
void backward(const MlpParams& p, const Cache& cache, std::span<const double> grad_out,
              MlpParams& grads);

struct LossGrad {
  double loss = 0.0;
  Vec grad;
};

/// −log softmax(logits)[label] and its gradient softmax − onehot.
LossGrad softmax_xent(std::span<const double> logits, int label);
/// mean((pred − target)^2) and its gradient 2(pred − target)/n.
LossGrad mse(std::span<const double> pred, std::span<const double> target);
Vec softmax(std::span<const double> logits, double temperature = 1.0);
int argmax(std::span<const double> v);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpParams m, v;
  long step = 0;
  AdamHyper hyper;

  static AdamState for_params(const MlpParams& p, AdamHyper h = {});
};

/// One bias-corrected Adam update.
void adam_step(MlpParams& p, const MlpParams& grads, AdamState& st);

// Checkpoint: JSON with a spec echo, flat per-layer arrays and the digest of
// the manifest that produced it. Loading against a different spec throws.
void save_checkpoint(const std::filesystem::path& path, const MlpSpec& spec, const MlpParams& p,
                     const std::string& manifest_digest = "");
MlpParams load_checkpoint(const std::filesystem::path& path, const MlpSpec& expected,
                          std::string* manifest_digest = nullptr);
std::string checkpoint_to_string(const MlpSpec& spec, const MlpParams& p,
                                 const std::string& manifest_digest = "");
MlpParams checkpoint_from_string(const std::string& text, const MlpSpec& expected,
                                 std::string* manifest_digest = nullptr);

}  // namespace findrl::nn
