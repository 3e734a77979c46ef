// Copyright 2026 The AugCondD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "augcondd/autograd.h"

#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "augcondd/errors.h"
#include "augcondd/ops.h"

namespace augcondd::nn {
namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(shape);
  for (double& v : t.storage()) v = n(rng);
  return t;
}

using Fn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central differences on every input element against one backward sweep.
void check_gradients(const Fn& f, std::vector<Tensor> inputs, double tol = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.leaf(t));
  Var out = f(tape, vars);
  tape.backward(out);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor g = vars[k].grad();
    ASSERT_EQ(g.size(), inputs[k].size()) << "input " << k;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> in = inputs;
        in[k][i] += delta;
        Tape t2;
        std::vector<Var> v2;
        for (const Tensor& t : in) v2.push_back(t2.leaf(t, false));
        return f(t2, v2).item();
      };
      const double h = 1e-6;
      const double num = (eval(h) - eval(-h)) / (2 * h);
      EXPECT_NEAR(g[i], num, tol * std::max(1.0, std::abs(num))) << "input " << k << " elem " << i;
    }
  }
}

Var scalarize(const Var& y) { return mean_squared_offset(y, 0.3); }

TEST(TapeTest, LeafGradientOfSharedUse) {
  Tape tape;
  Var x = tape.leaf(Tensor({1, 1, 3}, std::vector<double>{1, 2, 3}));
  Var y = add(x, x);
  Var loss = mean_squared_offset(y, 0.0);
  tape.backward(loss);
  // d/dx mean((2x)^2) = 8x / 3
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x.grad()[i], 8.0 * (i + 1) / 3.0, 1e-12);
}

TEST(TapeTest, ConstantsCollectNoGradient) {
  Tape tape;
  Var c = tape.constant(Tensor({1, 1, 2}, 1.0));
  Var x = tape.leaf(Tensor({1, 1, 2}, 2.0));
  tape.backward(mean_squared_offset(add(c, x), 0.0));
  EXPECT_EQ(c.grad().size(), 0u);
  EXPECT_EQ(x.grad().size(), 2u);
  EXPECT_FALSE(c.requires_grad());
}

TEST(TapeTest, RepeatedBackwardDoesNotAccumulate) {
  Tape tape;
  Var x = tape.leaf(Tensor({1, 1, 1}, 3.0));
  Var l = mean_squared_offset(x, 0.0);
  tape.backward(l);
  const double first = x.grad()[0];
  tape.backward(l);
  EXPECT_EQ(x.grad()[0], first);
}

TEST(OpsGradTest, Conv1dStridedDilatedPadded) {
  for (ConvSpec spec : {ConvSpec{1, 1, 2}, ConvSpec{2, 1, 1}, ConvSpec{1, 3, 3}, ConvSpec{4, 1, 0}}) {
    check_gradients(
        [spec](Tape&, const std::vector<Var>& v) { return scalarize(conv1d(v[0], v[1], v[2], spec)); },
        {random_tensor({2, 3, 13}, 1), random_tensor({4, 3, 3}, 2), random_tensor({4}, 3)});
  }
}

TEST(OpsGradTest, Conv1dWithoutBias) {
  check_gradients(
      [](Tape&, const std::vector<Var>& v) { return scalarize(conv1d(v[0], v[1], Var(), {1, 1, 1})); },
      {random_tensor({1, 2, 9}, 4), random_tensor({3, 2, 3}, 5)});
}

TEST(OpsGradTest, ConvTranspose) {
  for (auto [stride, pad, k] : {std::tuple{2, 1, 4}, std::tuple{4, 2, 8}, std::tuple{3, 0, 3}}) {
    check_gradients(
        [stride, pad](Tape&, const std::vector<Var>& v) {
          return scalarize(conv_transpose1d(v[0], v[1], v[2], stride, pad));
        },
        {random_tensor({2, 3, 5}, 6), random_tensor({3, 2, static_cast<std::size_t>(k)}, 7),
         random_tensor({2}, 8)});
  }
}

TEST(OpsShapeTest, ConvLengths) {
  Tape tape;
  Var x = tape.constant(Tensor({1, 2, 100}, 0.5));
  Var w = tape.constant(Tensor({3, 2, 5}, 0.1));
  EXPECT_EQ(conv1d(x, w, Var(), {1, 1, 2}).shape(), (Shape{1, 3, 100}));
  EXPECT_EQ(conv1d(x, w, Var(), {4, 1, 2}).shape(), (Shape{1, 3, 25}));
  Var wt = tape.constant(Tensor({2, 3, 8}, 0.1));
  EXPECT_EQ(conv_transpose1d(x, wt, Var(), 4, 2).shape(), (Shape{1, 3, 400}));
}

TEST(OpsGradTest, Pointwise) {
  check_gradients([](Tape&, const std::vector<Var>& v) { return scalarize(leaky_relu(v[0], 0.1)); },
                  {random_tensor({2, 2, 7}, 9)});
  check_gradients([](Tape&, const std::vector<Var>& v) { return scalarize(tanh(v[0])); },
                  {random_tensor({2, 2, 7}, 10)});
  check_gradients([](Tape&, const std::vector<Var>& v) { return scalarize(scale(add(v[0], v[1]), -1.7)); },
                  {random_tensor({1, 2, 4}, 11), random_tensor({1, 2, 4}, 12)});
  check_gradients([](Tape&, const std::vector<Var>& v) { return scalarize(avg_pool2(v[0])); },
                  {random_tensor({2, 3, 9}, 13)});
}

TEST(OpsGradTest, WeightedSumOfScalars) {
  check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        std::vector<Var> terms = {scalarize(v[0]), scalarize(v[1])};
        const std::vector<double> w = {2.0, 45.0};
        return weighted_sum(terms, w);
      },
      {random_tensor({1, 1, 3}, 14), random_tensor({1, 1, 3}, 15)});
}

TEST(OpsGradTest, ConcatConditionReachesMu) {
  check_gradients(
      [](Tape& t, const std::vector<Var>& v) {
        Var w = t.constant(random_tensor({2, 3, 3}, 16));
        return scalarize(conv1d(concat_condition(v[0], v[1]), w, Var(), {1, 1, 1}));
      },
      {random_tensor({2, 1, 6}, 17), random_tensor({2, 2}, 18)});
}

TEST(OpsTest, ConcatConditionLayoutAndErrors) {
  Tape tape;
  Var x = tape.constant(Tensor({1, 1, 4}, std::vector<double>{1, 2, 3, 4}));
  Var mu = tape.constant(Tensor({1, 2}, std::vector<double>{0.3, 0.7}));
  const Tensor y = concat_condition(x, mu).value();
  ASSERT_EQ(y.shape(), (Shape{1, 3, 4}));
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(y.at(0, 0, t), t + 1.0);
    EXPECT_EQ(y.at(0, 1, t), 0.3);
    EXPECT_EQ(y.at(0, 2, t), 0.7);
  }
  Var bad = tape.constant(Tensor({1, 1}, std::vector<double>{INFINITY}));
  EXPECT_THROW(concat_condition(x, bad), InvalidInputError);
}

TEST(OpsGradTest, MixBatch) {
  const std::vector<std::size_t> partner = {1, 2, 0};
  const std::vector<double> m = {0.2, 0.9, 0.5};
  check_gradients(
      [&](Tape&, const std::vector<Var>& v) { return scalarize(mix_batch(v[0], partner, m)); },
      {random_tensor({3, 1, 5}, 19)});
}

TEST(OpsGradTest, LinearMaps) {
  std::vector<dsp::LinearMap> maps = {dsp::time_scale_map(12, 1.5), dsp::time_scale_map(12, 0.7)};
  const std::vector<std::size_t> offset = {0, 3};
  check_gradients(
      [&](Tape&, const std::vector<Var>& v) { return scalarize(apply_linear_maps(v[0], maps, offset, 12)); },
      {random_tensor({2, 1, 12}, 20)});
}

TEST(OpsGradTest, MeanAbsDiff) {
  check_gradients(
      [](Tape&, const std::vector<Var>& v) { return mean_abs_diff(v[0], v[1]); },
      {random_tensor({2, 2, 5}, 21), random_tensor({2, 2, 5}, 22)});
}

TEST(OpsGradTest, LogMel) {
  dsp::MelConfig c;
  c.sample_rate = 8000;
  c.fft_size = 64;
  c.hop_length = 16;
  c.win_length = 64;
  c.n_mels = 8;
  c.fmax = 4000;
  dsp::MelExtractor ex(c);
  check_gradients(
      [&](Tape& t, const std::vector<Var>& v) {
        return mean_squared_offset(log_mel(v[0], ex), 0.1);
      },
      {random_tensor({2, 1, 80}, 24, 0.3)}, 1e-5);
}

TEST(OpsTest, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.constant(Tensor({1, 1, 3}, 0.0));
  Var b = tape.constant(Tensor({1, 1, 4}, 0.0));
  EXPECT_THROW(add(a, b), InvalidInputError);
  EXPECT_THROW(mean_abs_diff(a, b), InvalidInputError);
}

}  // namespace
}  // namespace augcondd::nn
