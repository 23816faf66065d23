#include <gtest/gtest.h>

#include <cmath>

#include "camel/numerics/attention.hpp"
#include "camel/numerics/conv.hpp"
#include "camel/numerics/grad_check.hpp"
#include "camel/numerics/ops.hpp"
#include "test_support.hpp"

namespace camel {
namespace {

using testing::random_tensor;

// Random linear functional of `t`, so every output element gets a distinct
// upstream gradient.
class Probe {
 public:
  explicit Probe(std::uint64_t seed) : rng_(seed) {}
  Tensor operator()(const Tensor& t) {
    if (!r_.defined() || r_.numel() != t.numel()) r_ = random_tensor({1, t.numel()}, rng_);
    return sum(matmul_nt(reshape(t, {1, t.numel()}), r_));
  }

 private:
  std::mt19937_64 rng_;
  Tensor r_;
};

void expect_passes(const LossFn& fn, ParamStore& store) {
  const GradCheckReport r = grad_check(fn, store);
  EXPECT_TRUE(r.passed) << r.diagnostic << " worst " << r.worst_parameter << "["
                        << r.worst_index << "] rel " << r.max_relative_error;
  EXPECT_GT(r.elements_checked, 0u);
}

struct OpGrad : ::testing::Test {
  std::mt19937_64 rng{21};
  ParamStore store;
  Probe probe{22};
  Tensor param(const std::string& name, Shape shape, double scale = 1.0) {
    Tensor t = random_tensor(std::move(shape), rng, scale, true);
    store.insert(name, t);
    return t;
  }
};

TEST_F(OpGrad, Matmul) {
  Tensor a = param("a", {3, 4}), b = param("b", {4, 2});
  expect_passes([&] { return probe(matmul(a, b)); }, store);
}

TEST_F(OpGrad, MatmulNT) {
  Tensor a = param("a", {3, 4}), b = param("b", {5, 4});
  expect_passes([&] { return probe(matmul_nt(a, b)); }, store);
}

TEST_F(OpGrad, AddSubAddRowScale) {
  Tensor a = param("a", {3, 4}), b = param("b", {3, 4}), c = param("c", {4});
  expect_passes([&] { return probe(scale(add_row(sub(add(a, b), scale(b, 0.3)), c), 1.7)); },
                store);
}

TEST_F(OpGrad, ReluAwayFromKink) {
  Tensor a = param("a", {3, 4});
  for (auto& v : a.mutable_data()) v = v > 0 ? v + 0.1 : v - 0.1;
  expect_passes([&] { return probe(relu(a)); }, store);
}

TEST_F(OpGrad, LinearWithAndWithoutBias) {
  Tensor x = param("x", {3, 4}), w = param("w", {4, 5}), b = param("b", {5});
  expect_passes([&] { return add(probe(linear(x, w, b)), probe(linear(x, w))); }, store);
}

TEST_F(OpGrad, LayerNorm) {
  Tensor x = param("x", {3, 6}), g = param("g", {6}), b = param("b", {6});
  expect_passes([&] { return probe(layer_norm(x, g, b)); }, store);
}

TEST_F(OpGrad, MaskedSoftmaxAndLogSoftmax) {
  Tensor x = param("x", {4, 4});
  const Mask m = Mask::causal(4);
  expect_passes([&] { return add(probe(softmax_rows(x, &m)), probe(log_softmax_rows(x))); },
                store);
}

TEST_F(OpGrad, CrossEntropy) {
  Tensor x = param("x", {3, 5});
  const std::vector<int> t = {1, 4, 0};
  expect_passes([&] { return cross_entropy(x, t); }, store);
}

TEST_F(OpGrad, MulColAndConvexMix) {
  Tensor w = param("w", {3, 1}), a = param("a", {3, 4}), b = param("b", {3, 4});
  expect_passes([&] { return add(probe(mul_col(a, w)), probe(convex_mix(w, a, b))); }, store);
}

TEST_F(OpGrad, SliceConcatReshape) {
  Tensor a = param("a", {3, 5}), b = param("b", {3, 2});
  expect_passes(
      [&] {
        const std::vector<Tensor> parts = {slice_cols(a, 1, 4), b};
        return probe(reshape(concat_cols(parts), {5, 3}));
      },
      store);
}

TEST_F(OpGrad, EmbeddingWithRepeatedIds) {
  Tensor table = param("table", {5, 3});
  const std::vector<int> ids = {2, 0, 2, 4};
  expect_passes([&] { return probe(embedding(table, ids)); }, store);
}

TEST_F(OpGrad, AddScalars) {
  Tensor a = param("a", {2, 2}), b = param("b", {2, 2});
  expect_passes(
      [&] {
        const std::vector<Tensor> terms = {sum(a), probe(b)};
        const std::vector<double> w = {0.25, -1.5};
        return add_scalars(terms, w);
      },
      store);
}

TEST_F(OpGrad, MultiHeadAttentionWithMask) {
  const AttentionParams p = AttentionParams::create(store, "att", 8, 2, rng);
  Tensor q = param("q", {3, 8}), kv = param("kv", {4, 8});
  Mask m(3, 4);
  m.set(1, 3, false);
  expect_passes([&] { return probe(multi_head_attention(q, kv, kv, p, &m)); }, store);
}

TEST_F(OpGrad, Conv2d) {
  Tensor x = param("x", {7, 5, 2}), w = param("w", {3, 3, 3, 2}), b = param("b", {3});
  expect_passes([&] { return probe(conv2d_k3s2(x, w, b)); }, store);
}

TEST_F(OpGrad, ConvDownsample) {
  const auto p = ConvFrontendParams::create(store, "fe", 9, 3, 8, rng);
  Tensor x = param("x", {11, 9});
  expect_passes([&] { return probe(conv_downsample(x, p)); }, store);
}

TEST(GradCheck, DetectsWrongBackward) {
  ParamStore store;
  Tensor x = Tensor::from({1, 2}, {0.7, -0.3}, true);
  store.insert("x", x);
  // Forward is sum(x^2) but the backward claims 3x.
  auto bad = [&] {
    const auto v = x.data();
    const double y = v[0] * v[0] + v[1] * v[1];
    return Tensor::make_result({1}, {y}, {x}, [](Node& self) {
      auto g = self.parents[0]->grad_buffer();
      const auto& xv = self.parents[0]->value;
      for (std::size_t i = 0; i < 2; ++i) g[i] += self.grad[0] * 3.0 * xv[i];
    });
  };
  const GradCheckReport r = grad_check(bad, store);
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.worst_parameter, "x");
  EXPECT_NEAR(r.max_relative_error, 1.0 / 3.0, 1e-6);
}

TEST(ReluPatternScope, HashTracksSignsOnly) {
  auto pattern = [](std::vector<double> v) {
    const std::size_t n = v.size();
    ReluPatternScope scope;
    relu(Tensor::from({1, n}, std::move(v)));
    return scope.hash();
  };
  EXPECT_EQ(pattern({0.5, -1.0, 2.0}), pattern({0.1, -3.0, 9.0}));
  EXPECT_NE(pattern({0.5, -1.0, 2.0}), pattern({0.5, 1.0, 2.0}));
}

// One relu input sits 3e-6 from its kink, inside the +-1e-5 stencil.
TEST(GradCheck, KinkCrossingIsSkippedNotScored) {
  ParamStore store;
  std::vector<double> v(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2 ? -0.3 : 0.4) * (1.0 + 0.1 * i);
  v[7] = 3e-6;
  Tensor x = Tensor::from({1, 20}, v, true);
  store.insert("x", x);
  const GradCheckReport r = grad_check([&] { return sum(relu(x)); }, store);
  EXPECT_EQ(r.kinks_skipped, 1u);
  EXPECT_EQ(r.elements_checked, 19u);
  EXPECT_TRUE(r.passed) << r.diagnostic;
}

TEST(GradCheck, MostlyKinkedLossFails) {
  ParamStore store;
  Tensor x = Tensor::from({1, 4}, {1e-6, -2e-6, 4e-6, 0.5}, true);
  store.insert("x", x);
  const GradCheckReport r = grad_check([&] { return sum(relu(x)); }, store);
  EXPECT_EQ(r.kinks_skipped, 3u);
  EXPECT_FALSE(r.passed);
}

// A large loss offset puts ~1e-5 of rounding noise on each quotient, far
// above the true gradient of 1e-7; that noise is not a mismatch.
TEST(GradCheck, RoundingNoiseOnLargeLossIsNotAMismatch) {
  ParamStore store;
  Tensor x = Tensor::from({1, 1}, {0.3}, true);
  store.insert("x", x);
  auto loss = [&] { return add(scale(sum(x), 1e-7), Tensor::full({1}, 1e6)); };
  EXPECT_TRUE(grad_check(loss, store).passed);
  GradCheckOptions exact;
  exact.rounding_factor = 0.0;
  exact.relative_floor = 1e-12;
  EXPECT_FALSE(grad_check(loss, store, exact).passed);
}

TEST(GradCheck, NaNLossAborts) {
  ParamStore store;
  Tensor x = Tensor::from({1, 1}, {-1.0}, true);
  store.insert("x", x);
  auto nan_loss = [&] {
    return Tensor::make_result({1}, {std::nan("")}, {x}, [](Node&) {});
  };
  const GradCheckReport r = grad_check(nan_loss, store);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.aborted);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(GradCheck, RestoresParameterValues) {
  std::mt19937_64 rng(23);
  ParamStore store;
  Tensor a = random_tensor({3, 3}, rng, 1.0, true);
  store.insert("a", a);
  const std::vector<double> before(a.data().begin(), a.data().end());
  grad_check([&] { return sum(matmul(a, a)); }, store);
  EXPECT_EQ(std::vector<double>(a.data().begin(), a.data().end()), before);
}

}  // namespace
}  // namespace camel
