#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "magclimb/common/errors.hpp"
#include "magclimb/neural/adam.hpp"
#include "magclimb/neural/gradient_check.hpp"
#include "magclimb/neural/layers.hpp"
#include "magclimb/neural/loss.hpp"
#include "magclimb/neural/model_graph.hpp"

namespace {

using namespace magclimb;
using namespace magclimb::neural;

using TensorD = Tensor<double>;

TensorD seq(std::vector<double> v) {
  const std::size_t n = v.size();
  return TensorD({1, n, 1}, std::move(v));
}

TensorD random_tensor(Shape3 s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  TensorD t(s);
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Values bounded away from zero so ReLU-type kinks are never crossed by +-eps.
TensorD away_from_zero(Shape3 s, std::uint64_t seed) {
  auto t = random_tensor(s, seed, 0.2, 1.0);
  std::mt19937_64 rng(seed + 1);
  for (auto& v : t.storage()) {
    if (rng() & 1) v = -v;
  }
  return t;
}

TEST(Conv1D, HandDotProducts) {
  const TensorD kernel({1, 1, 3}, {1, 0, -1});
  const std::vector<double> bias{0.0};
  const auto y = conv1d(seq({1, 2, 3, 4}), kernel, std::span<const double>(bias), Padding::Valid);
  EXPECT_EQ(y.shape(), (Shape3{1, 2, 1}));
  EXPECT_EQ(y.storage(), (std::vector<double>{-2, -2}));
}

TEST(Conv1D, IdentityKernelSamePadding) {
  const TensorD kernel({1, 1, 3}, {0, 1, 0});
  const std::vector<double> bias{0.0};
  const auto x = seq({0.5, -1, 3, 7, 2});
  EXPECT_EQ(conv1d(x, kernel, std::span<const double>(bias), Padding::Same), x);
}

TEST(Conv1D, Linear) {
  const auto kernel = random_tensor({3, 2, 3}, 1);
  const std::vector<double> bias(3, 0.0);
  const auto x = random_tensor({2, 9, 2}, 2), y = random_tensor({2, 9, 2}, 3);
  TensorD mix(x.shape());
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = 1.5 * x.data()[i] - 2.0 * y.data()[i];
  const auto cx = conv1d(x, kernel, std::span<const double>(bias), Padding::Same);
  const auto cy = conv1d(y, kernel, std::span<const double>(bias), Padding::Same);
  const auto cm = conv1d(mix, kernel, std::span<const double>(bias), Padding::Same);
  for (std::size_t i = 0; i < cm.size(); ++i) EXPECT_NEAR(cm.data()[i], 1.5 * cx.data()[i] - 2.0 * cy.data()[i], 1e-12);
}

TEST(Conv1D, ShapesAndErrors) {
  Conv1D<double> same(2, 4, 3, Padding::Same);
  EXPECT_EQ(same.output_shape({17, 2}), (FeatureShape{17, 4}));
  Conv1D<double> valid(2, 4, 5, Padding::Valid);
  EXPECT_EQ(valid.output_shape({17, 2}), (FeatureShape{13, 4}));
  EXPECT_THROW(valid.output_shape({4, 2}), ShapeError);
  EXPECT_THROW(valid.output_shape({17, 3}), ShapeError);
}

TEST(AdaptiveRelu, Formula) {
  const std::vector<double> a{0.1};
  const auto y = adaptive_relu(seq({3, -2, 0}), std::span<const double>(a));
  EXPECT_DOUBLE_EQ(y.data()[0], 3.0);
  EXPECT_DOUBLE_EQ(y.data()[1], -0.2);
  EXPECT_DOUBLE_EQ(y.data()[2], 0.0);
  const std::vector<double> one{1.0};
  const auto x = seq({-4, 2.5, -0.1});
  EXPECT_EQ(adaptive_relu(x, std::span<const double>(one)), x);
}

TEST(MaxPool, ExamplesAndTies) {
  const auto x = seq({1, 3, 2, 5});
  EXPECT_EQ(maxpool1d(x, 1), x);
  EXPECT_EQ(maxpool1d(x, 2).storage(), (std::vector<double>{3, 5}));
  EXPECT_EQ(maxpool1d(seq({1, 2, 3, 4, 5}), 2).storage(), (std::vector<double>{2, 4}));
  MaxPool1D<double> pool(3);
  pool.forward(seq({4, 4, 1, 0, 2, 2}), Mode::Train);
  const auto g = pool.backward(TensorD({1, 2, 1}, {10, 20}));
  EXPECT_EQ(g.storage(), (std::vector<double>{10, 0, 0, 0, 20, 0}));
}

TEST(Dropout, IdentityCases) {
  const auto x = random_tensor({4, 10, 3}, 5);
  EXPECT_EQ(dropout(x, 0.2, Mode::Infer, 1), x);
  EXPECT_EQ(dropout(x, 0.0, Mode::Train, 1), x);
  EXPECT_EQ(dropout(x, 0.0, Mode::Infer, 1), x);
}

TEST(Dropout, InvertedScalingPreservesMean) {
  const TensorD x({1, 200000, 1}, 1.0);
  const auto y = dropout(x, 0.2, Mode::Train, 42);
  double mean = 0.0;
  std::size_t zeros = 0;
  for (double v : y.storage()) {
    mean += v;
    if (v == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(v, 1.25);
  }
  mean /= static_cast<double>(y.size());
  EXPECT_NEAR(mean, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(zeros) / y.size(), 0.2, 0.01);
  EXPECT_EQ(dropout(x, 0.2, Mode::Train, 42), y);
  EXPECT_NE(dropout(x, 0.2, Mode::Train, 43), y);
}

TEST(Dense, Examples) {
  const std::vector<double> w{1, 1}, b{0.5};
  const TensorD x({1, 1, 2}, {1, 2});
  EXPECT_EQ(dense(x, std::span<const double>(w), std::span<const double>(b)).storage(), std::vector<double>{3.5});
  const std::vector<double> eye{1, 0, 0, 1}, zero{0, 0};
  const auto r = random_tensor({3, 1, 2}, 7);
  EXPECT_EQ(dense(r, std::span<const double>(eye), std::span<const double>(zero)), r);
  EXPECT_THROW(dense(x, std::span<const double>(eye).first(3), std::span<const double>(zero)), ShapeError);
}

TEST(Lstm, ZeroWeightsHandEvaluation) {
  LstmParams<double> p(2, 3);
  RowMatrix<double> x = RowMatrix<double>::Constant(1, 2, 0.7);
  auto state = LstmState<double>::zeros(1, 3);
  LstmGates<double> gates;
  auto next = lstm_step(x, state, p, &gates);
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(gates.forget(0, j), 0.5);
    EXPECT_DOUBLE_EQ(gates.input(0, j), 0.5);
    EXPECT_DOUBLE_EQ(gates.output(0, j), 0.5);
    EXPECT_DOUBLE_EQ(gates.candidate(0, j), 0.0);
    EXPECT_DOUBLE_EQ(next.c(0, j), 0.0);
    EXPECT_DOUBLE_EQ(next.h(0, j), 0.0);
  }
  state.c.setConstant(2.0);
  next = lstm_step(x, state, p);
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(next.c(0, j), 1.0);
    EXPECT_NEAR(next.h(0, j), 0.38079, 1e-5);
  }
  EXPECT_THROW(lstm_step(RowMatrix<double>(RowMatrix<double>::Zero(1, 5)), state, p), ShapeError);
}

TEST(Lstm, LayerMatchesStepwiseCellAndStaysBounded) {
  Lstm<double> layer(2, 4, true);
  Rng rng(3);
  layer.initialize(rng);
  for (auto& v : layer.lstm_params().bias.value) v += 0.3;
  const auto x = random_tensor({3, 6, 2}, 11, -3.0, 3.0);
  const auto y = layer.forward(x, Mode::Infer);
  auto state = LstmState<double>::zeros(3, 4);
  for (std::size_t t = 0; t < 6; ++t) {
    RowMatrix<double> xt(3, 2);
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t c = 0; c < 2; ++c) xt(b, c) = x.at(b, t, c);
    }
    LstmGates<double> gates;
    state = lstm_step(xt, state, layer.lstm_params(), &gates);
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(y.at(b, t, j), state.h(b, j), 1e-14);
        EXPECT_GT(y.at(b, t, j), -1.0);
        EXPECT_LT(y.at(b, t, j), 1.0);
        for (const auto* g : {&gates.forget, &gates.input, &gates.output}) {
          EXPECT_GT((*g)(b, j), 0.0);
          EXPECT_LT((*g)(b, j), 1.0);
        }
      }
    }
  }
}

TEST(Softmax, Examples) {
  const auto p = softmax(TensorD({1, 1, 3}, {0, 0, 0}));
  for (double v : p.storage()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  const auto big = softmax(TensorD({1, 1, 2}, {1000, 0}));
  EXPECT_DOUBLE_EQ(big.data()[0], 1.0);
  EXPECT_GE(big.data()[1], 0.0);
  EXPECT_LT(big.data()[1], 1e-300);
  const auto z = random_tensor({5, 1, 4}, 13, -5, 5);
  TensorD shifted = z;
  for (auto& v : shifted.storage()) v += 123.0;
  const auto a = softmax(z), b = softmax(shifted);
  for (std::size_t r = 0; r < 5; ++r) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(a.at(r, 0, j), b.at(r, 0, j), 1e-12);
      EXPECT_GT(a.at(r, 0, j), 0.0);
      EXPECT_LT(a.at(r, 0, j), 1.0);
      sum += a.at(r, 0, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(CrossEntropy, Examples) {
  const TensorD y({1, 1, 3}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(cross_entropy(y, y), 0.0);
  EXPECT_NEAR(cross_entropy(TensorD({1, 1, 3}, 1.0 / 3.0), y), std::log(3.0), 1e-12);
  EXPECT_NEAR(cross_entropy(TensorD({1, 1, 3}, {0.5, 0, 0.5}), y), -std::log(1e-12), 1e-9);
}

TEST(CrossEntropy, SoftmaxGradientMatchesFiniteDifferences) {
  auto z = random_tensor({4, 1, 3}, 17, -2, 2);
  TensorD y({4, 1, 3});
  for (std::size_t b = 0; b < 4; ++b) y.at(b, 0, b % 3) = 1.0;
  const auto g = softmax_cross_entropy_grad(softmax(z), y);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double saved = z.data()[i];
    z.data()[i] = saved + 1e-6;
    const double up = cross_entropy(softmax(z), y);
    z.data()[i] = saved - 1e-6;
    const double down = cross_entropy(softmax(z), y);
    z.data()[i] = saved;
    EXPECT_LT(relative_error(g.data()[i], (up - down) / 2e-6), 1e-6);
  }
}

TEST(Adam, FirstStepHandComputation) {
  Param<double> p("theta", {1});
  p.value[0] = 1.0;
  p.grad[0] = 1.0;
  AdamState<double> state;
  adam_step<double>({&p}, state);
  EXPECT_NEAR(p.value[0], 0.999, 1e-9);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParametersBitIdentical) {
  Param<double> p("w", {5});
  for (std::size_t i = 0; i < 5; ++i) p.value[i] = 0.1 * static_cast<double>(i) - 0.17;
  const auto before = p.value;
  AdamState<double> state;
  for (int k = 0; k < 3; ++k) adam_step<double>({&p}, state);
  EXPECT_EQ(p.value, before);
  Param<float> pf("wf", {3});
  pf.value = {1.5f, -2.25f, 3.0f};
  const auto bf = pf.value;
  AdamState<float> sf;
  adam_step<float>({&pf}, sf);
  EXPECT_EQ(pf.value, bf);
}

TEST(Adam, SteadyStateStepApproachesLearningRate) {
  Param<double> p("w", {2});
  AdamState<double> state;
  double prev0 = 0.0, prev1 = 0.0;
  for (int k = 0; k < 5000; ++k) {
    p.grad = {0.37, -12.0};
    prev0 = p.value[0];
    prev1 = p.value[1];
    adam_step<double>({&p}, state);
  }
  EXPECT_NEAR(prev0 - p.value[0], 1e-3, 1e-6);
  EXPECT_NEAR(p.value[1] - prev1, 1e-3, 1e-6);
}

TEST(GradientCheck, DenseLayer) {
  Dense<double> layer(5, 4);
  Rng rng(1);
  layer.initialize(rng);
  for (auto& v : layer.bias().value) v = 0.1;
  const auto r = check_layer_gradients(layer, random_tensor({3, 2, 5}, 19), 1e-5, 1);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst;
}

TEST(GradientCheck, AdaptiveReluIncludingSlope) {
  AdaptiveRelu<double> layer(3, 0.25);
  const auto r = check_layer_gradients(layer, away_from_zero({2, 7, 3}, 23), 1e-5, 2);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst;
  EXPECT_EQ(r.checked, 3u + 42u);
}

TEST(GradientCheck, ConvSameAndValid) {
  for (Padding pad : {Padding::Same, Padding::Valid}) {
    for (std::size_t width : {2u, 3u, 4u}) {
      Conv1D<double> layer(2, 3, width, pad);
      Rng rng(width);
      layer.initialize(rng);
      const auto r = check_layer_gradients(layer, random_tensor({2, 8, 2}, 29), 1e-5, 3);
      EXPECT_LT(r.max_rel_error, 1e-6) << to_string(pad) << " " << width << " " << r.worst;
    }
  }
}

TEST(GradientCheck, MaxPoolAwayFromTies) {
  MaxPool1D<double> layer(2);
  const auto r = check_layer_gradients(layer, random_tensor({2, 9, 3}, 31), 1e-5, 4);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst;
}

TEST(GradientCheck, LstmBothOutputModes) {
  for (bool seqs : {true, false}) {
    Lstm<double> layer(3, 4, seqs);
    Rng rng(5);
    layer.initialize(rng);
    const auto r = check_layer_gradients(layer, random_tensor({2, 6, 3}, 37), 1e-5, 5);
    EXPECT_LT(r.max_rel_error, 1e-5) << seqs << " " << r.worst;
  }
}

TEST(GradientCheck, RnnFullBackprop) {
  for (bool seqs : {true, false}) {
    SimpleRnn<double> layer(3, 4, seqs, 0);
    Rng rng(6);
    layer.initialize(rng);
    const auto r = check_layer_gradients(layer, random_tensor({2, 6, 3}, 41), 1e-5, 6);
    EXPECT_LT(r.max_rel_error, 1e-5) << seqs << " " << r.worst;
  }
}

TEST(GradientCheck, DropoutWithFrozenMaskAndRelu) {
  ModelGraph<double> g("drop", {6, 3});
  g.emplace<Dense<double>>(3, 5);
  g.emplace<Relu<double>>();
  g.emplace<Dropout<double>>(0.3);
  g.emplace<Flatten<double>>();
  g.emplace<Dense<double>>(30, 3);
  g.initialize(9);
  TensorD y({4, 1, 3});
  for (std::size_t b = 0; b < 4; ++b) y.at(b, 0, (b + 1) % 3) = 1.0;
  // Bias the first dense layer so no ReLU input sits near zero.
  auto* dense0 = dynamic_cast<Dense<double>*>(&g.layer(0));
  for (auto& v : dense0->weight().value) v = std::abs(v);
  const auto r = check_model_gradients(g, random_tensor({4, 6, 3}, 43, 0.1, 1.0), y, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst;
}

TEST(GradientCheck, FullConvLstmChain) {
  ModelGraph<double> g("chain", {12, 1});
  g.emplace<Conv1D<double>>(1, 3, 3, Padding::Same);
  g.emplace<AdaptiveRelu<double>>(3);
  g.emplace<MaxPool1D<double>>(2);
  g.emplace<Dropout<double>>(0.2);
  g.emplace<Lstm<double>>(3, 4, true);
  g.emplace<Flatten<double>>();
  g.emplace<Dense<double>>(24, 3);
  g.initialize(4);
  TensorD y({3, 1, 3});
  for (std::size_t b = 0; b < 3; ++b) y.at(b, 0, b) = 1.0;
  const auto r = check_model_gradients(g, random_tensor({3, 12, 1}, 47), y, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_EQ(r.checked, g.parameter_count() + 36);
}

TEST(ModelGraph, RejectsIncompatibleLayers) {
  ModelGraph<double> g("bad", {8, 2});
  EXPECT_THROW(g.emplace<Dense<double>>(3, 2), ShapeError);
  g.emplace<Conv1D<double>>(2, 4, 3, Padding::Valid);
  EXPECT_EQ(g.output_shape(), (FeatureShape{6, 4}));
  EXPECT_THROW(g.emplace<MaxPool1D<double>>(7), ShapeError);
  EXPECT_THROW(g.forward(TensorD({1, 9, 2}), Mode::Infer), ShapeError);
}

ModelGraph<float> small_float_model() {
  ModelGraph<float> g("small", {10, 1});
  g.emplace<Conv1D<float>>(1, 4, 3, Padding::Same);
  g.emplace<AdaptiveRelu<float>>(4);
  g.emplace<MaxPool1D<float>>(2);
  g.emplace<Dropout<float>>(0.2);
  g.emplace<Lstm<float>>(4, 5, true);
  g.emplace<Flatten<float>>();
  g.emplace<Dense<float>>(25, 3);
  g.initialize(123);
  g.metadata()["note"] = "test";
  return g;
}

TEST(ModelGraph, SaveLoadRoundTrip) {
  auto g = small_float_model();
  const auto dir = std::filesystem::temp_directory_path() / "magclimb_model_test";
  std::filesystem::remove_all(dir);
  g.save(dir / "m.json");
  EXPECT_TRUE(std::filesystem::exists(dir / "m.bin"));
  EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), g.parameter_count() * 4);
  auto back = ModelGraph<float>::load(dir / "m.json");
  EXPECT_EQ(back.snapshot(), g.snapshot());
  EXPECT_EQ(back.metadata()["note"], "test");
  Tensor<float> x({2, 10, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = std::sin(static_cast<float>(i));
  EXPECT_EQ(back.predict_proba(x), g.predict_proba(x));
  auto bytes = g.blob();
  bytes[5] ^= 0x40;
  EXPECT_THROW(ModelGraph<float>::from_manifest(g.manifest("m.bin"), bytes), DataError);
  std::filesystem::remove_all(dir);
}

TEST(ModelGraph, CopyIsDeepAndInitializeIsDeterministic) {
  auto a = small_float_model();
  auto b = a;
  b.params()[0]->value[0] += 1.0f;
  EXPECT_NE(a.snapshot(), b.snapshot());
  EXPECT_EQ(small_float_model().snapshot(), a.snapshot());
  Tensor<float> x({3, 10, 1}, 0.5f);
  auto c = small_float_model(), d = small_float_model();
  EXPECT_EQ(c.forward(x, Mode::Train), d.forward(x, Mode::Train));
}

}  // namespace
