#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "camel/ctc/ctc.hpp"
#include "camel/errors.hpp"
#include "camel/numerics/grad_check.hpp"
#include "camel/numerics/ops.hpp"
#include "test_support.hpp"

namespace camel {
namespace {

using testing::random_tensor;
using testing::to_matrix;
namespace oracle = testing::oracle;

TEST(LogAdd, HandlesNegativeInfinityAndLargeGaps) {
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(log_add(ninf, ninf), ninf);
  EXPECT_EQ(log_add(ninf, -3.0), -3.0);
  EXPECT_NEAR(log_add(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
  EXPECT_EQ(log_add(0.0, -1000.0), 0.0);
}

TEST(CtcCollapse, MergesRepeatsThenDropsBlanks) {
  const std::vector<int> path = {1, 1, 0, 1, 2, 2, 0, 0, 2};
  EXPECT_EQ(ctc_collapse(path), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(ctc_min_frames(std::vector<int>{1, 1, 2}), 4u);
}

TEST(CtcLoss, MatchesAlignmentEnumeration) {
  std::mt19937_64 rng(1);
  for (std::size_t T = 1; T <= 4; ++T)
    for (std::size_t V = 2; V <= 3; ++V) {
      const Tensor logits = random_tensor({T, V}, rng, 2.0);
      const auto masses = oracle::ctc_path_masses(oracle::softmax_rows(to_matrix(logits)));
      double total = 0.0;
      for (const auto& [labels, p] : masses) {
        EXPECT_NEAR(ctc_loss(logits, labels).item(), -std::log(p), 1e-10)
            << "T=" << T << " V=" << V << " U=" << labels.size();
        total += std::exp(-ctc_loss(logits, labels).item());
      }
      EXPECT_NEAR(total, 1.0, 1e-8);
    }
}

TEST(CtcLoss, SingleFrameSingleLabelIsNegLogSoftmax) {
  const Tensor logits = Tensor::from({1, 3}, {0.2, 1.3, -0.4});
  const auto lp = log_softmax_rows(logits);
  EXPECT_NEAR(ctc_loss(logits, std::vector<int>{1}).item(), -lp.at(0, 1), 1e-14);
}

TEST(CtcLoss, Errors) {
  const Tensor logits = Tensor::zeros({2, 3});
  EXPECT_THROW(ctc_loss(logits, std::vector<int>{1, 1}), InfeasibleTargetError);
  EXPECT_THROW(ctc_loss(logits, std::vector<int>{1, 2, 1}), InfeasibleTargetError);
  EXPECT_THROW(ctc_loss(logits, std::vector<int>{0}), InvalidTokenError);
  EXPECT_THROW(ctc_loss(logits, std::vector<int>{3}), InvalidTokenError);
}

TEST(CtcLoss, LongSequenceStaysFinite) {
  std::mt19937_64 rng(2);
  const Tensor logits = random_tensor({400, 6}, rng, 8.0);
  std::vector<int> labels;
  for (int i = 0; i < 150; ++i) labels.push_back(1 + i % 5);
  const double l = ctc_loss(logits, labels).item();
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_GT(l, 0.0);
}

TEST(CtcLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  ParamStore store;
  Tensor logits = random_tensor({7, 4}, rng, 1.5, true);
  store.insert("logits", logits);
  for (const std::vector<int>& labels :
       {std::vector<int>{1, 2, 2}, std::vector<int>{3}, std::vector<int>{}}) {
    const GradCheckReport r = grad_check([&] { return ctc_loss(logits, labels); }, store);
    EXPECT_TRUE(r.passed) << r.max_relative_error;
  }
}

TEST(PrefixBeamSearch, ExactWithWideBeam) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor logits = random_tensor({4, 3}, rng, 1.5);
    const Tensor lp = log_softmax_rows(logits);
    const auto masses = oracle::ctc_path_masses(oracle::softmax_rows(to_matrix(logits)));
    const auto hyps = ctc_prefix_beam_search(lp, 100);
    ASSERT_EQ(hyps.size(), masses.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      EXPECT_NEAR(hyps[i].ctc_score, std::log(masses.at(hyps[i].tokens)), 1e-10);
      if (i) EXPECT_GE(hyps[i - 1].ctc_score, hyps[i].ctc_score);
    }
  }
}

TEST(PrefixBeamSearch, BeamOneOnPeakedInputEqualsGreedyCollapse) {
  // Each frame puts almost all mass on one symbol, so the greedy path
  // dominates every other labeling.
  const std::vector<int> greedy = {1, 1, 0, 2, 2, 0, 1};
  std::vector<double> v;
  for (int s : greedy)
    for (int k = 0; k < 3; ++k) v.push_back(k == s ? 0.0 : -30.0);
  const auto hyps = ctc_prefix_beam_search(Tensor::from({7, 3}, v), 1);
  ASSERT_EQ(hyps.size(), 1u);
  EXPECT_EQ(hyps[0].tokens, ctc_collapse(greedy));
}

TEST(PrefixBeamSearch, RejectsZeroBeam) {
  EXPECT_THROW(ctc_prefix_beam_search(Tensor::zeros({2, 3}), 0), ConfigError);
}

}  // namespace
}  // namespace camel
