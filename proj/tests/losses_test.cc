// Copyright (c) 2026 wwspot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "wws/losses.hpp"
#include "wws/rng.hpp"

namespace wws {
namespace {

TEST(MaxPoolingLossTest, PerfectPredictionApproachesZero) {
  // Target probability at 1-1e-8, everything else at 1e-8.
  const int frames = 4, K = 3, target = 1;
  std::vector<double> probs(frames * K, 1e-8);
  probs[static_cast<std::size_t>(2) * K + target] = 1.0 - 1e-8;
  LossResult res = MaxPoolingLoss(probs, frames, K, target);
  EXPECT_LT(res.loss, 1e-5);
}

TEST(MaxPoolingLossTest, SingleKeywordClosedForm) {
  std::vector<double> probs = {0.2, 0.5, 0.3};  // one keyword, three frames
  LossResult res = MaxPoolingLoss(probs, 3, 1, 0);
  EXPECT_NEAR(res.loss, -std::log(0.5), 1e-12);
  // Gradient lives at the argmax frame only: s - 1 = -0.5.
  EXPECT_DOUBLE_EQ(res.dlogits[1], -0.5);
  EXPECT_DOUBLE_EQ(res.dlogits[0], 0.0);
  EXPECT_DOUBLE_EQ(res.dlogits[2], 0.0);
}

TEST(MaxPoolingLossTest, FillerPenalizesEveryKeyword) {
  std::vector<double> probs = {0.3, 0.6, 0.1, 0.2};  // 2 frames x 2 keywords
  LossResult res = MaxPoolingLoss(probs, 2, 2, kFillerLabel);
  double expected = -std::log1p(-0.3) - std::log1p(-0.6);
  EXPECT_NEAR(res.loss, expected, 1e-12);
  EXPECT_DOUBLE_EQ(res.dlogits[0], 0.3);
  EXPECT_DOUBLE_EQ(res.dlogits[1], 0.6);
}

TEST(MaxPoolingLossTest, GradientMatchesFiniteDifferences) {
  const int frames = 6, K = 3;
  Rng rng(2024);
  for (int target : {0, 1, 2, kFillerLabel}) {
    std::vector<double> logits =
        wwstest::RandomLogits(&rng, static_cast<std::size_t>(frames) * K);
    auto probs = wwstest::SigmoidAll(logits);
    LossResult res = MaxPoolingLoss(probs, frames, K, target);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      double numeric = wwstest::CentralDiff(&logits, i, 1e-5, [&]() {
        auto p = wwstest::SigmoidAll(logits);
        return MaxPoolingLoss(p, frames, K, target).loss;
      });
      EXPECT_LT(wwstest::RelError(res.dlogits[i], numeric), 1e-4)
          << "coordinate " << i << " target " << target;
    }
  }
}

TEST(MaxPoolingLossTest, FramePermutationInvariance) {
  const int frames = 5, K = 4;
  Rng rng(7);
  std::vector<double> probs =
      wwstest::SigmoidAll(wwstest::RandomLogits(&rng, static_cast<std::size_t>(frames) * K));
  double base = MaxPoolingLoss(probs, frames, K, 2).loss;

  std::vector<int> order(frames);
  std::iota(order.begin(), order.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    for (int i = frames - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(rng.UniformInt(i + 1))]);
    }
    std::vector<double> shuffled(probs.size());
    for (int t = 0; t < frames; ++t) {
      for (int j = 0; j < K; ++j) {
        shuffled[static_cast<std::size_t>(t) * K + j] =
            probs[static_cast<std::size_t>(order[static_cast<std::size_t>(t)]) * K + j];
      }
    }
    EXPECT_DOUBLE_EQ(MaxPoolingLoss(shuffled, frames, K, 2).loss, base);
  }
}

TEST(MaxPoolingLossTest, RaisingTargetMaxStrictlyDecreasesLoss) {
  const int frames = 4, K = 3, target = 1;
  Rng rng(8);
  std::vector<double> probs =
      wwstest::SigmoidAll(wwstest::RandomLogits(&rng, static_cast<std::size_t>(frames) * K));
  double prev = MaxPoolingLoss(probs, frames, K, target).loss;
  for (double bump : {0.05, 0.1, 0.2}) {
    std::vector<double> raised = probs;
    int argmax = 0;
    for (int t = 1; t < frames; ++t) {
      if (raised[static_cast<std::size_t>(t) * K + target] >
          raised[static_cast<std::size_t>(argmax) * K + target]) {
        argmax = t;
      }
    }
    auto& cell = raised[static_cast<std::size_t>(argmax) * K + target];
    cell = std::min(0.999, cell + bump);
    double loss = MaxPoolingLoss(raised, frames, K, target).loss;
    EXPECT_LT(loss, prev);
  }
}

TEST(MaxPoolingLossTest, Errors) {
  std::vector<double> probs = {0.5, 0.5};
  EXPECT_THROW(MaxPoolingLoss(probs, 1, 2, 2), std::out_of_range);
  EXPECT_THROW(MaxPoolingLoss(probs, 1, 2, -2), std::out_of_range);
  EXPECT_THROW(MaxPoolingLoss({}, 0, 2, 0), std::invalid_argument);
}

TEST(CtcLossTest, SingleFrameSinglePath) {
  // T=1, tokens=[a]: the only path is (a), so loss = -ln q.
  const int vocab = 3;
  Rng rng(100);
  auto logprob = wwstest::LogSoftmaxRows(wwstest::RandomLogits(&rng, vocab), 1, vocab);
  LossResult res = CtcLoss(logprob, 1, vocab, {1});
  EXPECT_NEAR(res.loss, -logprob[1], 1e-12);
}

TEST(CtcLossTest, TwoFrameUniformEnumeration) {
  // V={blank,a}, uniform rows: paths (a,-), (-,a), (a,a) total 0.75.
  std::vector<double> logprob(4, std::log(0.5));
  LossResult res = CtcLoss(logprob, 2, 2, {1});
  EXPECT_NEAR(res.loss, -std::log(0.75), 1e-12);
  EXPECT_NEAR(res.loss, 0.28768, 1e-5);
  EXPECT_NEAR(res.loss, wwstest::BruteForceCtcLoss(logprob, 2, 2, {1}), 1e-12);
}

TEST(CtcLossTest, EmptyLabelIsAllBlanks) {
  const int vocab = 3;
  Rng rng(101);
  auto logprob = wwstest::LogSoftmaxRows(
      wwstest::RandomLogits(&rng, 2 * vocab), 2, vocab);
  LossResult res = CtcLoss(logprob, 2, vocab, {});
  EXPECT_NEAR(res.loss, -(logprob[0] + logprob[static_cast<std::size_t>(vocab)]),
              1e-12);
}

TEST(CtcLossTest, MatchesBruteForceOnRandomInstances) {
  Rng rng(555);
  for (int trial = 0; trial < 200; ++trial) {
    int frames = 1 + rng.UniformInt(6);
    int vocab = 2 + rng.UniformInt(3);
    auto logprob = wwstest::LogSoftmaxRows(
        wwstest::RandomLogits(&rng, static_cast<std::size_t>(frames) * vocab),
        frames, vocab);
    // Draw a feasible blank-free label.
    std::vector<int> tokens;
    int len = rng.UniformInt(4);
    for (int i = 0; i < len; ++i) tokens.push_back(1 + rng.UniformInt(vocab - 1));
    if (frames < detail::CtcMinFrames(tokens)) {
      EXPECT_THROW(CtcLoss(logprob, frames, vocab, tokens), std::invalid_argument);
      continue;
    }
    double expected = wwstest::BruteForceCtcLoss(logprob, frames, vocab, tokens);
    LossResult res = CtcLoss(logprob, frames, vocab, tokens);
    EXPECT_NEAR(res.loss, expected, 1e-6) << "trial " << trial;
  }
}

TEST(CtcLossTest, GradientMatchesFiniteDifferences) {
  Rng rng(777);
  int checked = 0;
  for (int trial = 0; trial < 8; ++trial) {
    int frames = 3 + rng.UniformInt(3);
    int vocab = 3 + rng.UniformInt(2);
    std::vector<double> logits =
        wwstest::RandomLogits(&rng, static_cast<std::size_t>(frames) * vocab);
    std::vector<int> tokens = {1 + rng.UniformInt(vocab - 1),
                               1 + rng.UniformInt(vocab - 1)};
    if (frames < detail::CtcMinFrames(tokens)) continue;

    auto logprob = wwstest::LogSoftmaxRows(logits, frames, vocab);
    LossResult res = CtcLoss(logprob, frames, vocab, tokens);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      double numeric = wwstest::CentralDiff(&logits, i, 1e-5, [&]() {
        auto lp = wwstest::LogSoftmaxRows(logits, frames, vocab);
        return CtcLoss(lp, frames, vocab, tokens).loss;
      });
      EXPECT_LT(wwstest::RelError(res.dlogits[i], numeric), 1e-4)
          << "trial " << trial << " coordinate " << i;
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(CtcLossTest, Errors) {
  std::vector<double> logprob(6, std::log(1.0 / 3.0));
  EXPECT_THROW(CtcLoss(logprob, 2, 3, {0}), std::out_of_range);   // blank token
  EXPECT_THROW(CtcLoss(logprob, 2, 3, {5}), std::out_of_range);   // out of vocab
  EXPECT_THROW(CtcLoss(logprob, 2, 3, {1, 1}), std::invalid_argument);  // infeasible
  EXPECT_THROW(CtcLoss({}, 0, 3, {1}), std::invalid_argument);
}

TEST(CombinedLossTest, Examples) {
  LossBundle zero = CombinedLoss(0.0, 0.0);
  EXPECT_DOUBLE_EQ(zero.l_total, 0.0);

  // Default weights: 0.5 * 2.0 + 1.0 * 1.0 = 2.0.
  LossBundle paper = CombinedLoss(2.0, 1.0);
  EXPECT_DOUBLE_EQ(paper.l_total, 2.0);

  LossWeights even;
  even.ctc = 1.0;
  even.wws = 1.0;
  LossBundle identity = CombinedLoss(1.7, 0.0, even);
  EXPECT_DOUBLE_EQ(identity.l_total, 1.7);

  EXPECT_THROW(CombinedLoss(std::nan(""), 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace wws
