#include "findrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace findrl::nn {

using nlohmann::json;

int MlpSpec::head_offset(std::size_t i) const {
  int off = 0;
  for (std::size_t k = 0; k < i; ++k) off += heads.at(k).size;
  return off;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("mlp spec needs at least two layers");
  for (int n : layer_sizes) {
    if (n <= 0) throw std::invalid_argument("mlp layer sizes must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  int total = 0;
  for (const auto& h : heads) {
    if (h.size <= 0) throw std::invalid_argument("head '" + h.name + "' has no outputs");
    total += h.size;
  }
  if (total != output_size()) throw std::invalid_argument("head sizes do not sum to output size");
}

MlpParams MlpParams::zeros(const MlpSpec& spec) {
  spec.validate();
  MlpParams p;
  for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i) {
    Layer l;
    l.in = spec.layer_sizes[i];
    l.out = spec.layer_sizes[i + 1];
    l.w.assign(static_cast<std::size_t>(l.in * l.out), 0.0);
    l.b.assign(static_cast<std::size_t>(l.out), 0.0);
    p.layers.push_back(std::move(l));
  }
  return p;
}

MlpParams MlpParams::init(const MlpSpec& spec, Rng& rng) {
  MlpParams p = zeros(spec);
  for (auto& l : p.layers) {
    const double a = std::sqrt(6.0 / (l.in + l.out));
    for (double& w : l.w) w = rng.uniform(-a, a);
  }
  return p;
}

std::size_t MlpParams::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

void MlpParams::fill(double v) {
  for (auto& l : layers) {
    std::fill(l.w.begin(), l.w.end(), v);
    std::fill(l.b.begin(), l.b.end(), v);
  }
}

void MlpParams::axpy(double scale, const MlpParams& o) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const auto& r = o.layers.at(i);
    for (std::size_t k = 0; k < l.w.size(); ++k) l.w[k] += scale * r.w[k];
    for (std::size_t k = 0; k < l.b.size(); ++k) l.b[k] += scale * r.b[k];
  }
}

std::uint64_t MlpParams::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const Vec& v) {
    for (double d : v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof d);
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (const auto& l : layers) {
    mix(l.w);
    mix(l.b);
  }
  return h;
}

Vec forward(const MlpParams& p, const MlpSpec& spec, std::span<const double> x, Mode mode, Rng* rng,
            Cache* cache) {
  if (p.layers.empty() || static_cast<int>(x.size()) != p.layers.front().in) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " entries");
  }
  if (mode == Mode::Train && spec.dropout_rate > 0.0 && rng == nullptr) {
    throw std::invalid_argument("forward: train mode with dropout needs an rng");
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->mask.clear();
  }
  Vec a(x.begin(), x.end());
  const std::size_t last = p.layers.size() - 1;
  for (std::size_t li = 0; li <= last; ++li) {
    const Layer& l = p.layers[li];
    Vec z(static_cast<std::size_t>(l.out));
    for (int o = 0; o < l.out; ++o) {
      double s = l.b[static_cast<std::size_t>(o)];
      const double* row = &l.w[static_cast<std::size_t>(o * l.in)];
      for (int i = 0; i < l.in; ++i) s += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = s;
    }
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    if (li == last) return z;
    for (double& v : z) v = v > 0.0 ? v : 0.0;
    if (li + 1 == last && mode == Mode::Train && spec.dropout_rate > 0.0) {
      const double keep = 1.0 - spec.dropout_rate;
      Vec mask(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) {
        mask[k] = rng->uniform() < keep ? 1.0 / keep : 0.0;
        z[k] *= mask[k];
      }
      if (cache) cache->mask = std::move(mask);
    }
    a = std::move(z);
  }
  return a;  // unreachable
}

void backward(const MlpParams& p, const Cache& cache, std::span<const double> grad_out,
              MlpParams& grads) {
  const std::size_t n = p.layers.size();
  if (cache.inputs.size() != n) throw std::invalid_argument("backward: cache does not match");
  Vec g(grad_out.begin(), grad_out.end());
  for (std::size_t li = n; li-- > 0;) {
    const Layer& l = p.layers[li];
    Layer& gl = grads.layers[li];
    const Vec& in = cache.inputs[li];
    if (li + 1 < n) {
      // Through ReLU (and dropout when this layer feeds the output layer).
      const Vec& z = cache.pre[li];
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (z[k] <= 0.0) g[k] = 0.0;
        if (li + 2 == n && !cache.mask.empty()) g[k] *= cache.mask[k];
      }
    }
    Vec gin(static_cast<std::size_t>(l.in), 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double go = g[static_cast<std::size_t>(o)];
      if (go == 0.0) continue;
      gl.b[static_cast<std::size_t>(o)] += go;
      const std::size_t row = static_cast<std::size_t>(o * l.in);
      for (int i = 0; i < l.in; ++i) {
        gl.w[row + static_cast<std::size_t>(i)] += go * in[static_cast<std::size_t>(i)];
        gin[static_cast<std::size_t>(i)] += go * l.w[row + static_cast<std::size_t>(i)];
      }
    }
    g = std::move(gin);
  }
}

Vec softmax(std::span<const double> logits, double temperature) {
  Vec out(logits.size());
  double mx = -INFINITY;
  for (double v : logits) mx = std::max(mx, v / temperature);
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] / temperature - mx);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return out;
}

LossGrad softmax_xent(std::span<const double> logits, int label) {
  if (label < 0 || label >= static_cast<int>(logits.size())) {
    throw std::out_of_range("softmax_xent: label " + std::to_string(label) + " out of range");
  }
  double mx = -INFINITY;
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  LossGrad r;
  r.loss = lse - logits[static_cast<std::size_t>(label)];
  r.grad.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) r.grad[k] = std::exp(logits[k] - lse);
  r.grad[static_cast<std::size_t>(label)] -= 1.0;
  return r;
}

LossGrad mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("mse: length mismatch");
  }
  const double n = static_cast<double>(pred.size());
  LossGrad r;
  r.grad.resize(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - target[k];
    r.loss += d * d;
    r.grad[k] = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

AdamState AdamState::for_params(const MlpParams& p, AdamHyper h) {
  AdamState s;
  s.m = p;
  s.m.fill(0.0);
  s.v = s.m;
  s.hyper = h;
  return s;
}

void adam_step(MlpParams& p, const MlpParams& grads, AdamState& st) {
  ++st.step;
  const auto& h = st.hyper;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(st.step));
  auto update = [&](Vec& w, const Vec& g, Vec& m, Vec& v) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * g[k];
      v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * g[k] * g[k];
      w[k] -= h.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + h.eps);
    }
  };
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    update(p.layers[i].w, grads.layers[i].w, st.m.layers[i].w, st.v.layers[i].w);
    update(p.layers[i].b, grads.layers[i].b, st.m.layers[i].b, st.v.layers[i].b);
  }
}

namespace {

json spec_json(const MlpSpec& s) {
  json heads = json::array();
  for (const auto& h : s.heads) heads.push_back({{"name", h.name}, {"size", h.size}});
  return {{"layer_sizes", s.layer_sizes}, {"dropout", s.dropout_rate}, {"heads", heads}};
}

}  // namespace

std::string checkpoint_to_string(const MlpSpec& spec, const MlpParams& p,
                                 const std::string& manifest_digest) {
  json layers = json::array();
  for (const auto& l : p.layers) layers.push_back({{"w", l.w}, {"b", l.b}});
  json j = {{"format", "findrl-mlp"},
            {"version", 1},
            {"spec", spec_json(spec)},
            {"manifest", manifest_digest},
            {"layers", layers}};
  return j.dump() + "\n";
}

MlpParams checkpoint_from_string(const std::string& text, const MlpSpec& expected,
                                 std::string* manifest_digest) {
  const json j = json::parse(text);
  if (j.at("format") != "findrl-mlp" || j.at("version") != 1) {
    throw std::runtime_error("not a findrl-mlp v1 checkpoint");
  }
  if (j.at("spec") != spec_json(expected)) {
    throw std::runtime_error("checkpoint spec " + j.at("spec").dump() + " does not match expected " +
                             spec_json(expected).dump());
  }
  MlpParams p = MlpParams::zeros(expected);
  const auto& layers = j.at("layers");
  if (layers.size() != p.layers.size()) throw std::runtime_error("checkpoint layer count mismatch");
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto w = layers[i].at("w").get<Vec>();
    auto b = layers[i].at("b").get<Vec>();
    if (w.size() != p.layers[i].w.size() || b.size() != p.layers[i].b.size()) {
      throw std::runtime_error("checkpoint layer " + std::to_string(i) + " has the wrong shape");
    }
    p.layers[i].w = std::move(w);
    p.layers[i].b = std::move(b);
  }
  if (manifest_digest) *manifest_digest = j.value("manifest", "");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const MlpSpec& spec, const MlpParams& p,
                     const std::string& manifest_digest) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << checkpoint_to_string(spec, p, manifest_digest);
}

MlpParams load_checkpoint(const std::filesystem::path& path, const MlpSpec& expected,
                          std::string* manifest_digest) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return checkpoint_from_string(ss.str(), expected, manifest_digest);
}

}  // namespace findrl::nn
