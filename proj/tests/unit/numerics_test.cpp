#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "camel/errors.hpp"
#include "camel/numerics/attention.hpp"
#include "camel/numerics/conv.hpp"
#include "camel/numerics/ops.hpp"
#include "camel/numerics/param_store.hpp"
#include "test_support.hpp"

namespace camel {
namespace {

using testing::Matrix;
using testing::max_abs_diff;
using testing::random_tensor;
using testing::to_matrix;
using testing::to_vector;
namespace oracle = testing::oracle;

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(1);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 4, 5}, {7, 2, 6}}) {
    Tensor a = random_tensor({std::size_t(m), std::size_t(k)}, rng);
    Tensor b = random_tensor({std::size_t(k), std::size_t(n)}, rng);
    EXPECT_LT(max_abs_diff(matmul(a, b), oracle::matmul(to_matrix(a), to_matrix(b))), 1e-12);
  }
}

TEST(Matmul, IdentityIsExact) {
  std::mt19937_64 rng(2);
  Tensor a = random_tensor({4, 3}, rng);
  std::vector<double> eye(9, 0.0);
  eye[0] = eye[4] = eye[8] = 1.0;
  EXPECT_TRUE(testing::bit_equal(matmul(a, Tensor::from({3, 3}, eye)), a));
}

TEST(Matmul, RejectsMismatchedInnerDimension) {
  EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2})), DimensionError);
}

TEST(MatmulNT, EqualsMatmulWithTranspose) {
  std::mt19937_64 rng(3);
  Tensor a = random_tensor({3, 4}, rng), b = random_tensor({5, 4}, rng);
  Matrix bt(4, std::vector<double>(5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) bt[j][i] = b.at(i, j);
  EXPECT_LT(max_abs_diff(matmul_nt(a, b), oracle::matmul(to_matrix(a), bt)), 1e-12);
}

TEST(LayerNorm, RowsHaveZeroMeanUnitVariance) {
  std::mt19937_64 rng(4);
  Tensor x = random_tensor({5, 16}, rng, 3.0);
  // eps shifts the variance by about eps / var, far below the tolerance.
  Tensor y = layer_norm(x, Tensor::full({16}, 1.0), Tensor::zeros({16}), 1e-15);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 16; ++c) mean += y.at(r, c);
    mean /= 16;
    for (std::size_t c = 0; c < 16; ++c) var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
    var /= 16;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(LayerNorm, MatchesOracleWithAffine) {
  std::mt19937_64 rng(5);
  Tensor x = random_tensor({3, 8}, rng), g = random_tensor({8}, rng), b = random_tensor({8}, rng);
  EXPECT_LT(max_abs_diff(layer_norm(x, g, b), oracle::layer_norm(to_matrix(x), g, b)), 1e-12);
}

TEST(Softmax, MaskedEntriesAreExactlyZero) {
  std::mt19937_64 rng(6);
  Tensor x = random_tensor({4, 4}, rng);
  const Mask m = Mask::causal(4);
  Tensor y = softmax_rows(x, &m);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      if (c > r) EXPECT_EQ(y.at(r, c), 0.0);
      s += y.at(r, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Softmax, FullyMaskedRowIsAnError) {
  Mask m(2, 3);
  for (std::size_t c = 0; c < 3; ++c) m.set(1, c, false);
  EXPECT_THROW(softmax_rows(Tensor::zeros({2, 3}), &m), DegenerateMaskError);
}

TEST(Softmax, LargeLogitsStayFinite) {
  Tensor x = Tensor::from({1, 3}, {1000.0, 999.0, -1000.0});
  Tensor y = softmax_rows(x);
  EXPECT_TRUE(all_finite(y));
  EXPECT_NEAR(y.at(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  Tensor l = log_softmax_rows(x);
  EXPECT_NEAR(l.at(0, 2), -2000.0 - std::log1p(std::exp(-1.0)), 1e-9);
}

TEST(CrossEntropy, EqualsNegativeLogSoftmaxSum) {
  std::mt19937_64 rng(7);
  Tensor x = random_tensor({3, 5}, rng);
  const std::vector<int> t = {4, 0, 2};
  const Matrix p = oracle::softmax_rows(to_matrix(x));
  double expect = 0.0;
  for (int r = 0; r < 3; ++r) expect -= std::log(p[r][t[r]]);
  EXPECT_NEAR(cross_entropy(x, t).item(), expect, 1e-12);
}

TEST(ConvexMix, IdenticalInputsPassThroughBitForBit) {
  std::mt19937_64 rng(8);
  Tensor a = random_tensor({4, 6}, rng);
  Tensor w = random_tensor({4, 1}, rng);
  EXPECT_TRUE(testing::bit_equal(convex_mix(w, a, a), a));
}

TEST(Attention, MatchesPerHeadLoop) {
  std::mt19937_64 rng(9);
  ParamStore store;
  const std::size_t d = 8, heads = 2, dh = 4;
  const AttentionParams p = AttentionParams::create(store, "att", d, heads, rng);
  Tensor q = random_tensor({3, d}, rng), kv = random_tensor({5, d}, rng);
  Mask mask(3, 5);
  mask.set(0, 4, false);
  mask.set(2, 1, false);

  const Matrix Q = oracle::linear(to_matrix(q), p.wq, p.bq);
  const Matrix K = oracle::linear(to_matrix(kv), p.wk, Tensor{});
  const Matrix V = oracle::linear(to_matrix(kv), p.wv, p.bv);
  Matrix concat(3, std::vector<double>(d, 0.0));
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<double> s(5);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < 5; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < dh; ++c) dot += Q[i][h * dh + c] * K[j][h * dh + c];
        s[j] = mask.allowed(i, j) ? dot / std::sqrt(double(dh))
                                  : -std::numeric_limits<double>::infinity();
        mx = std::max(mx, s[j]);
      }
      double z = 0.0;
      for (auto& v : s) z += (v = std::exp(v - mx));
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t c = 0; c < dh; ++c) concat[i][h * dh + c] += s[j] / z * V[j][h * dh + c];
    }
  }
  const Matrix expect = oracle::linear(concat, p.wo, p.bo);
  EXPECT_LT(max_abs_diff(multi_head_attention(q, kv, kv, p, &mask), expect), 1e-12);
}

TEST(Attention, WeightsRespectMaskAndSumToOne) {
  std::mt19937_64 rng(10);
  ParamStore store;
  const AttentionParams p = AttentionParams::create(store, "att", 8, 2, rng);
  Tensor x = random_tensor({4, 8}, rng);
  const Mask m = Mask::causal(4);
  const auto r = multi_head_attention_with_weights(x, x, x, p, &m);
  ASSERT_EQ(r.weights.size(), 2u);
  for (const auto& w : r.weights)
    for (std::size_t i = 0; i < 4; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        if (j > i) EXPECT_EQ(w.at(i, j), 0.0);
        s += w.at(i, j);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Conv, OutputLengths) {
  EXPECT_EQ(subsampled_length(67), 16u);
  EXPECT_EQ(subsampled_length(7), 1u);
  EXPECT_EQ(subsampled_length(6), 0u);
  EXPECT_EQ(conv_out(2), 0u);
}

TEST(Conv, Conv2dMatchesDirectSum) {
  std::mt19937_64 rng(11);
  const std::size_t H = 7, W = 6, Cin = 2, Cout = 3;
  Tensor x = random_tensor({H, W, Cin}, rng), w = random_tensor({Cout, 3, 3, Cin}, rng),
         b = random_tensor({Cout}, rng);
  Tensor y = conv2d_k3s2(x, w, b);
  ASSERT_EQ(y.shape(), (Shape{3, 2, Cout}));
  const auto X = x.data(), Wt = w.data(), B = b.data(), Y = y.data();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t o = 0; o < Cout; ++o) {
        double s = B[o];
        for (std::size_t a = 0; a < 3; ++a)
          for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < Cin; ++k)
              s += X[((2 * i + a) * W + 2 * j + c) * Cin + k] * Wt[((o * 3 + a) * 3 + c) * Cin + k];
        EXPECT_NEAR(Y[(i * 2 + j) * Cout + o], s, 1e-12);
      }
}

TEST(Conv, DownsampleShapes) {
  std::mt19937_64 rng(12);
  ParamStore store;
  const auto p = ConvFrontendParams::create(store, "fe", 20, 4, 16, rng);
  EXPECT_EQ(conv_downsample(random_tensor({67, 20}, rng), p).shape(), (Shape{16, 16}));
  EXPECT_EQ(conv_downsample(random_tensor({7, 20}, rng), p).shape(), (Shape{1, 16}));
  EXPECT_THROW(conv_downsample(random_tensor({6, 20}, rng), p), InputTooShortError);
}

TEST(Tensor, BackwardAccumulatesThroughSharedUse) {
  // y = sum(x * x) via matmul_nt of a row with itself: dy/dx = 2x.
  Tensor x = Tensor::from({1, 3}, {1.0, -2.0, 0.5}, true);
  sum(matmul_nt(x, x)).backward();
  EXPECT_EQ(to_vector(x).size(), 3u);
  EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -4.0);
  EXPECT_DOUBLE_EQ(x.grad()[2], 1.0);
}

TEST(Tensor, NoGradGuardSkipsGraph) {
  Tensor x = Tensor::from({1, 1}, {2.0}, true);
  NoGradGuard g;
  Tensor y = scale(x, 3.0);
  EXPECT_FALSE(y.requires_grad());
}

TEST(ParamStore, CheckpointRoundTripIsExact) {
  testing::TempDir dir("ckpt");
  std::mt19937_64 rng(13);
  ParamStore store;
  store.create("b.weight", {3, 4}, Init::kUniformFanIn, rng);
  store.create("a.bias", {4}, Init::kZeros, rng);
  store.create("c.kernel", {2, 3, 3, 1}, Init::kUniformFanIn, rng);
  // Values that are float-representable survive the float32 payload exactly.
  for (const auto& [_, t] : store.entries()) {
    Tensor h = t;
    for (auto& v : h.mutable_data()) v = static_cast<float>(v);
  }
  save_checkpoint(dir / "x.ckpt", store, {42, 7, 1.25});
  const Checkpoint back = load_checkpoint(dir / "x.ckpt");
  EXPECT_EQ(back.meta.config_hash, 42u);
  EXPECT_EQ(back.meta.epoch, 7u);
  EXPECT_EQ(back.meta.dev_loss, 1.25);
  ASSERT_EQ(back.params.size(), store.size());
  for (const auto& [name, t] : store.entries()) {
    EXPECT_TRUE(testing::bit_equal(back.params.get(name), t)) << name;
  }
  // Saving what was loaded reproduces the file byte for byte.
  save_checkpoint(dir / "y.ckpt", back.params, back.meta);
  std::ifstream a(dir / "x.ckpt", std::ios::binary), b(dir / "y.ckpt", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}),
            std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST(ParamStore, TruncatedCheckpointReportsOffset) {
  testing::TempDir dir("trunc");
  std::mt19937_64 rng(14);
  ParamStore store;
  store.create("w", {4, 4}, Init::kUniformFanIn, rng);
  save_checkpoint(dir / "x.ckpt", store, {});
  std::filesystem::resize_file(dir / "x.ckpt", std::filesystem::file_size(dir / "x.ckpt") - 5);
  try {
    load_checkpoint(dir / "x.ckpt");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST(ParamStore, AssignValuesRejectsShapeMismatch) {
  std::mt19937_64 rng(15);
  ParamStore a, b;
  a.create("w", {2, 3}, Init::kZeros, rng);
  b.create("w", {3, 2}, Init::kZeros, rng);
  EXPECT_THROW(a.assign_values(b), IncompatibleCheckpointError);
  ParamStore c;
  c.create("v", {2, 3}, Init::kZeros, rng);
  EXPECT_THROW(a.assign_values(c), IncompatibleCheckpointError);
}

TEST(ParamStore, UniformInitRespectsFanInBound) {
  std::mt19937_64 rng(16);
  ParamStore s;
  Tensor w = s.create("w", {16, 5}, Init::kUniformFanIn, rng);
  for (double v : w.data()) EXPECT_LE(std::abs(v), 0.25);
}

}  // namespace
}  // namespace camel
