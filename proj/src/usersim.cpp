#include "findrl/usersim.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace findrl {

namespace {

constexpr int kBeliefOffset = 0;
constexpr int kPointingOffset = 9;
constexpr int kHoOffset = 13;
constexpr int kHelActionOffset = 16;
constexpr int kHelDaOffset = 25;
constexpr int kPrevActionOffset = 32;
constexpr int kPrevDaOffset = 39;
static_assert(kPrevDaOffset + 8 == kSimFeatures);

std::array<int, kNumSimHeads> labels_of(const TraceStep& s) {
  return {static_cast<int>(s.next_belief.ot), static_cast<int>(s.next_belief.l),
          static_cast<int>(s.next_belief.o), static_cast<int>(s.eld.da),
          static_cast<int>(s.eld.action.label)};
}

std::span<const double> head(const nn::MlpSpec& spec, const nn::Vec& out, int h) {
  return std::span<const double>(out).subspan(static_cast<std::size_t>(spec.head_offset(static_cast<std::size_t>(h))),
                                              static_cast<std::size_t>(spec.heads[static_cast<std::size_t>(h)].size));
}

// Summed head cross-entropy; writes its gradient into `grad` if given.
double example_loss(const nn::MlpSpec& spec, const nn::Vec& out, const std::array<int, kNumSimHeads>& y,
                    nn::Vec* grad) {
  double loss = 0.0;
  if (grad) grad->assign(out.size(), 0.0);
  for (int h = 0; h < kNumSimHeads; ++h) {
    const auto lg = nn::softmax_xent(head(spec, out, h), y[static_cast<std::size_t>(h)]);
    loss += lg.loss;
    if (grad) {
      const int off = spec.head_offset(static_cast<std::size_t>(h));
      for (std::size_t k = 0; k < lg.grad.size(); ++k) (*grad)[static_cast<std::size_t>(off) + k] = lg.grad[k];
    }
  }
  return loss;
}

double mean_loss(const SimModel& m, const std::vector<SimExample>& xs) {
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : xs) {
    total += example_loss(m.spec, nn::forward(m.params, m.spec, e.x, nn::Mode::Eval), e.y, nullptr);
  }
  return total / static_cast<double>(xs.size());
}

int decode_head(std::span<const double> logits, const Decode& d) {
  if (!d.sample) return nn::argmax(logits);
  if (d.rng == nullptr) throw std::invalid_argument("sampled decoding needs an rng");
  const nn::Vec p = nn::softmax(logits, d.temperature);
  return static_cast<int>(d.rng->categorical(p));
}

bool truth_bearing(HelActionLabel a) {
  using A = HelActionLabel;
  return a == A::VerifyOT || a == A::VerifyL || a == A::VerifyO || a == A::SearchLocation ||
         a == A::PresentObject || a == A::DeclareDone;
}

}  // namespace

nn::Vec encode_sim_features(const BeliefState& belief, const HelMove& hel,
                            const std::optional<EldMove>& prev_eld) {
  nn::Vec x(kSimFeatures, 0.0);
  auto hot = [&](int offset, int idx) { x[static_cast<std::size_t>(offset + idx)] = 1.0; };
  hot(kBeliefOffset, static_cast<int>(belief.ot));
  hot(kBeliefOffset + 3, static_cast<int>(belief.l));
  hot(kBeliefOffset + 6, static_cast<int>(belief.o));
  hot(kPointingOffset, hel.pointing ? location_index(*hel.pointing) : kNumLocations);
  hot(kHoOffset, static_cast<int>(hel.ho));
  hot(kHelActionOffset, static_cast<int>(hel.action.label));
  hot(kHelDaOffset, static_cast<int>(hel.da));
  hot(kPrevActionOffset, prev_eld ? static_cast<int>(prev_eld->action.label) : kNumEldActions);
  hot(kPrevDaOffset, prev_eld ? static_cast<int>(prev_eld->da) : kNumDaTags);
  return x;
}

nn::MlpSpec sim_spec() {
  return {{kSimFeatures, 64, 64, 22},
          0.2,
          {{"belief_ot", 3}, {"belief_l", 3}, {"belief_o", 3}, {"da", kNumDaTags}, {"action", kNumEldActions}}};
}

std::vector<SimExample> sim_examples(const std::vector<Trace>& traces) {
  std::vector<SimExample> out;
  for (const auto& t : traces) {
    std::optional<EldMove> prev = t.opening;
    for (const auto& s : t.steps) {
      out.push_back({encode_sim_features(s.belief, s.hel, prev), labels_of(s)});
      prev = s.eld;
    }
  }
  return out;
}

SimModel train_sim(const CorpusSplit& split, std::uint64_t seed, const SimHyper& hyper,
                   SimHistory* history) {
  const auto train = sim_examples(split.train);
  const auto val = sim_examples(split.validation);
  if (train.empty() || val.empty()) throw std::invalid_argument("train_sim: empty train or validation split");

  Rng init_rng(derive_seed(seed, "sim/init"));
  Rng order_rng(derive_seed(seed, "sim/order"));
  Rng drop_rng(derive_seed(seed, "sim/dropout"));
  SimModel model;
  model.params = nn::MlpParams::init(model.spec, init_rng);
  auto adam = nn::AdamState::for_params(model.params, {hyper.lr});

  SimModel best = model;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  SimHistory hist;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Cache cache;
  nn::Vec grad;

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      auto grads = nn::MlpParams::zeros(model.spec);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const auto& e = train[order[i]];
        const nn::Vec out = nn::forward(model.params, model.spec, e.x, nn::Mode::Train, &drop_rng, &cache);
        train_loss += example_loss(model.spec, out, e.y, &grad);
        for (double& g : grad) g *= scale;
        nn::backward(model.params, cache, grad, grads);
      }
      nn::adam_step(model.params, grads, adam);
    }
    const double val_loss = mean_loss(model, val);
    hist.epochs.push_back({epoch, train_loss / static_cast<double>(train.size()), val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  if (history) *history = std::move(hist);
  return best;
}

SimAccuracy eval_sim(const SimModel& model, const std::vector<SimExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("eval_sim: empty test split");
  std::size_t action = 0, da = 0, state = 0, overall = 0;
  for (const auto& e : examples) {
    const nn::Vec out = nn::forward(model.params, model.spec, e.x, nn::Mode::Eval);
    std::array<bool, kNumSimHeads> ok{};
    for (int h = 0; h < kNumSimHeads; ++h) {
      ok[static_cast<std::size_t>(h)] = nn::argmax(head(model.spec, out, h)) == e.y[static_cast<std::size_t>(h)];
    }
    const bool st = ok[kHeadBeliefOt] && ok[kHeadBeliefL] && ok[kHeadBeliefO];
    action += ok[kHeadAction];
    da += ok[kHeadDa];
    state += st;
    overall += st && ok[kHeadAction] && ok[kHeadDa];
  }
  const double n = static_cast<double>(examples.size());
  return {action / n, da / n, state / n, overall / n, examples.size()};
}

SimAccuracy bayes_ceiling(const std::vector<SimExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("bayes_ceiling: no examples");
  using Labels = std::array<int, kNumSimHeads>;
  std::map<nn::Vec, std::map<Labels, std::size_t>> counts;
  for (const auto& e : examples) ++counts[e.x][e.y];
  auto best = [&](auto key_of) {
    std::size_t total = 0;
    for (const auto& [x, by_label] : counts) {
      std::map<decltype(key_of(Labels{})), std::size_t> c;
      for (const auto& [y, n] : by_label) c[key_of(y)] += n;
      std::size_t m = 0;
      for (const auto& [k, n] : c) m = std::max(m, n);
      total += m;
    }
    return static_cast<double>(total) / static_cast<double>(examples.size());
  };
  SimAccuracy a;
  a.action = best([](const Labels& y) { return y[kHeadAction]; });
  a.da = best([](const Labels& y) { return y[kHeadDa]; });
  a.state = best([](const Labels& y) { return std::array<int, 3>{y[kHeadBeliefOt], y[kHeadBeliefL], y[kHeadBeliefO]}; });
  a.overall = best([](const Labels& y) { return y; });
  a.examples = examples.size();
  return a;
}

SimAccuracy eval_sim(const SimModel& model, const std::vector<Trace>& traces) {
  return eval_sim(model, sim_examples(traces));
}

SimLabels sim_predict(const SimModel& model, const BeliefState& belief, const HelMove& hel,
                      const std::optional<EldMove>& prev_eld, const Decode& decode) {
  const nn::Vec out =
      nn::forward(model.params, model.spec, encode_sim_features(belief, hel, prev_eld), nn::Mode::Eval);
  SimLabels l;
  l.belief.ot = static_cast<Belief>(decode_head(head(model.spec, out, kHeadBeliefOt), decode));
  l.belief.l = static_cast<Belief>(decode_head(head(model.spec, out, kHeadBeliefL), decode));
  l.belief.o = static_cast<Belief>(decode_head(head(model.spec, out, kHeadBeliefO), decode));
  l.da = static_cast<DaTag>(decode_head(head(model.spec, out, kHeadDa), decode));
  l.action = static_cast<EldActionLabel>(decode_head(head(model.spec, out, kHeadAction), decode));
  return l;
}

EldReply sim_respond(const SimModel& model, const BeliefState& belief, const HelMove& hel,
                     const std::optional<EldMove>& prev_eld, EldContext& ctx, Rng& rng,
                     const Decode& decode, const EldParams& params) {
  using E = EldActionLabel;
  const EldReply scripted = scripted_eld(belief, hel, ctx, rng, params);
  const SimLabels p = sim_predict(model, belief, hel, prev_eld, decode);

  if (truth_bearing(hel.action.label) && p.action != scripted.move.action.label) return scripted;

  EldReply r;
  r.move.action.label = p.action;
  r.move.da = p.da;
  r.belief = p.belief;
  if (p.action == E::GiveOT || p.action == E::GiveOTL) {
    r.move.action.object = ctx.world.target;
    r.belief.ot = Belief::Knows;
  }
  if (p.action == E::GiveL || p.action == E::GiveOTL) {
    std::optional<Location> loc = scripted.move.action.location;
    if (!loc) {
      if (!ctx.current_suggestion() || ctx.suggestion_searched()) ctx.advance_suggestion();
      if (!ctx.suggestion_searched()) loc = ctx.current_suggestion();
    }
    if (!loc) return scripted;  // nothing left to suggest
    r.move.action.location = loc;
    r.belief.l = Belief::Knows;
  }
  return r;
}

}  // namespace findrl
