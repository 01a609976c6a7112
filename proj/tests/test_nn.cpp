#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "findrl/nn.hpp"
#include "support/gradcheck.hpp"

using namespace findrl;
using namespace findrl::nn;

namespace {

MlpSpec small_spec(double dropout = 0.0) { return {{8, 4, 4}, dropout, {{"out", 4}}}; }

Vec random_input(Rng& rng, int n) {
  Vec x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST(Nn, ZeroParamsGiveZeroLogits) {
  const auto spec = small_spec();
  Rng rng(1);
  const Vec out = forward(MlpParams::zeros(spec), spec, random_input(rng, 8), Mode::Eval);
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Nn, EvalIsDeterministic) {
  const auto spec = small_spec(0.5);
  Rng rng(2);
  const auto p = MlpParams::init(spec, rng);
  const Vec x = random_input(rng, 8);
  EXPECT_EQ(forward(p, spec, x, Mode::Eval), forward(p, spec, x, Mode::Eval));
}

TEST(Nn, InvertedDropoutScalesKeptUnits) {
  MlpSpec spec{{3, 5, 2}, 0.2, {{"out", 2}}};
  Rng rng(3);
  auto p = MlpParams::init(spec, rng);
  Cache cache;
  Rng drop(4);
  forward(p, spec, Vec{0.3, -0.2, 0.9}, Mode::Train, &drop, &cache);
  ASSERT_EQ(cache.mask.size(), 5u);
  for (double m : cache.mask) EXPECT_TRUE(m == 0.0 || std::abs(m - 1.0 / 0.8) < 1e-15) << m;
  EXPECT_THROW(forward(p, spec, Vec{1, 2}, Mode::Eval), std::invalid_argument);
}

TEST(Nn, SoftmaxXentAnalyticCases) {
  const Vec uniform(7, 0.25);
  const auto r = softmax_xent(uniform, 3);
  EXPECT_NEAR(r.loss, std::log(7.0), 1e-12);
  Vec margin(7, 0.0);
  margin[2] = 50.0;
  EXPECT_NEAR(softmax_xent(margin, 2).loss, 0.0, 1e-12);
  Rng rng(5);
  const Vec any = random_input(rng, 6);
  const auto g = softmax_xent(any, 1).grad;
  EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 0.0, 1e-15);
  EXPECT_THROW(softmax_xent(any, 6), std::out_of_range);
}

TEST(Nn, MseAnalyticCases) {
  const Vec a{0.5, -1.5, 2.0};
  const auto same = mse(a, a);
  EXPECT_EQ(same.loss, 0.0);
  for (double g : same.grad) EXPECT_EQ(g, 0.0);
  EXPECT_DOUBLE_EQ(mse(Vec{1, 0}, Vec{0, 0}).loss, 0.5);
  EXPECT_THROW(mse(Vec{1}, Vec{1, 2}), std::invalid_argument);
}

TEST(Nn, GradientCheckSmallNetwork) {
  const auto spec = small_spec();
  Rng rng(6);
  const auto p = MlpParams::init(spec, rng);
  const Vec x = random_input(rng, 8);
  const auto r = oracle::grad_check(spec, p, x, [](const Vec& o) { return softmax_xent(o, 2); });
  EXPECT_GT(r.checked, 20u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Nn, GradientCheckSimulatorShape) {
  const MlpSpec spec{{47, 64, 64, 22}, 0.2, {{"b_ot", 3}, {"b_l", 3}, {"b_o", 3}, {"da", 7}, {"action", 6}}};
  Rng rng(7);
  const auto p = MlpParams::init(spec, rng);
  const Vec x = random_input(rng, 47);
  const std::vector<int> labels{1, 0, 2, 5, 3};
  const auto r = oracle::grad_check(
      spec, p, x, [&](const Vec& o) { return oracle::multi_head_xent(spec, o, labels); });
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Nn, GradientCheckPolicyShape) {
  const MlpSpec spec{{34, 64, 14}, 0.1, {{"joint", 14}}};
  Rng rng(8);
  const auto p = MlpParams::init(spec, rng);
  const Vec x = random_input(rng, 34);
  const Vec target = random_input(rng, 14);
  const auto r = oracle::grad_check(spec, p, x, [&](const Vec& o) { return mse(o, target); });
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Nn, BackwardLinearityAndEvalDropout) {
  const auto spec = small_spec(0.3);
  Rng rng(9);
  const auto p = MlpParams::init(spec, rng);
  const Vec x = random_input(rng, 8);
  Cache c;
  forward(p, spec, x, Mode::Eval, nullptr, &c);
  auto g = MlpParams::zeros(spec);
  backward(p, c, Vec(4, 0.0), g);
  EXPECT_EQ(g, MlpParams::zeros(spec));

  // In eval mode the dropout spec has no effect on gradients.
  const auto plain = small_spec(0.0);
  Cache c2;
  forward(p, plain, x, Mode::Eval, nullptr, &c2);
  auto g1 = MlpParams::zeros(spec), g2 = MlpParams::zeros(spec);
  const Vec up{0.1, -0.4, 0.3, 1.0};
  backward(p, c, up, g1);
  backward(p, c2, up, g2);
  EXPECT_EQ(g1, g2);
}

TEST(Nn, AdamSingleStepOracle) {
  const MlpSpec spec{{1, 1}, 0.0, {{"y", 1}}};
  auto p = MlpParams::zeros(spec);
  auto g = MlpParams::zeros(spec);
  g.layers[0].w[0] = 1.0;
  auto st = AdamState::for_params(p);
  adam_step(p, g, st);
  // m̂ = 1, v̂ = 1  ->  w = −α / (1 + ε)
  EXPECT_NEAR(p.layers[0].w[0], -1e-3 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(p.layers[0].b[0], 0.0);

  auto q = MlpParams::zeros(spec);
  q.layers[0].w[0] = 0.7;
  auto st2 = AdamState::for_params(q);
  for (int i = 0; i < 10; ++i) adam_step(q, MlpParams::zeros(spec), st2);
  EXPECT_EQ(q.layers[0].w[0], 0.7);
}

TEST(Nn, TrainingReducesLossDeterministically) {
  const MlpSpec spec{{4, 16, 3}, 0.0, {{"cls", 3}}};
  auto run = [&]() {
    Rng rng(10);
    std::vector<Vec> xs;
    std::vector<int> ys;
    for (int i = 0; i < 50; ++i) {
      Vec x = random_input(rng, 4);
      ys.push_back(x[0] + x[1] > 0.3 ? 0 : (x[2] > 0 ? 1 : 2));
      xs.push_back(std::move(x));
    }
    auto p = MlpParams::init(spec, rng);
    auto st = AdamState::for_params(p, {1e-2});
    auto loss_of = [&]() {
      double l = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) l += softmax_xent(forward(p, spec, xs[i], Mode::Eval), ys[i]).loss;
      return l / static_cast<double>(xs.size());
    };
    const double before = loss_of();
    for (int step = 0; step < 200; ++step) {
      auto g = MlpParams::zeros(spec);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        Cache c;
        const Vec out = forward(p, spec, xs[i], Mode::Eval, nullptr, &c);
        Vec gr = softmax_xent(out, ys[i]).grad;
        for (double& v : gr) v /= static_cast<double>(xs.size());
        backward(p, c, gr, g);
      }
      adam_step(p, g, st);
    }
    return std::make_tuple(before, loss_of(), p);
  };
  const auto [before, after, p1] = run();
  EXPECT_LE(after, 0.5 * before) << before << " -> " << after;
  const auto [b2, a2, p2] = run();
  EXPECT_EQ(p1, p2);
}

TEST(Nn, CheckpointRoundTripAndSpecGuard) {
  const MlpSpec spec{{34, 64, 14}, 0.1, {{"joint", 14}}};
  Rng rng(11);
  const auto p = MlpParams::init(spec, rng);
  std::string digest;
  const auto text = checkpoint_to_string(spec, p, "abc123");
  EXPECT_EQ(checkpoint_from_string(text, spec, &digest), p);
  EXPECT_EQ(digest, "abc123");
  MlpSpec other = spec;
  other.dropout_rate = 0.2;
  EXPECT_THROW(checkpoint_from_string(text, other), std::runtime_error);
  other = spec;
  other.layer_sizes[1] = 32;
  EXPECT_THROW(checkpoint_from_string(text, other), std::runtime_error);
}
