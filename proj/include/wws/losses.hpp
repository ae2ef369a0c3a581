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
//
// The two training losses and their combination:
//  - max-pooling keyword loss: binary cross-entropy applied at each
//    keyword's maximum-probability frame (positive for the target keyword,
//    negative for all others and for filler utterances);
//  - CTC loss over the blank-augmented label lattice, forward/backward
//    recursions in log space;
//  - the combined objective  L = w_ctc * L_CTC + w_wws * L_WWS  with
//    default weights (0.5, 1.0).
// Both losses return gradients with respect to the pre-activation logits
// (pre-sigmoid for the keyword head, pre-softmax for the ASR head).

#ifndef WWS_LOSSES_HPP_
#define WWS_LOSSES_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wws/common.hpp"

namespace wws {

// Probabilities are clamped to this band inside the losses to avoid log(0).
inline constexpr double kProbClampLo = 1e-7;
inline constexpr double kProbClampHi = 1.0 - 1e-7;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogSumExp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a))
               : b + std::log1p(std::exp(a - b));
}

inline double LogSumExp(double a, double b, double c) {
  return LogSumExp(LogSumExp(a, b), c);
}

struct LossResult {
  double loss = 0.0;
  std::vector<double> dlogits;  // frames x width, row-major
};

// Max-pooling keyword loss. kws_prob is frames x n_keywords of per-keyword
// sigmoid probabilities; target is a keyword index or kFillerLabel. With
// s_j = max_t p[t][j]:
//   loss = -log s_k - sum_{j != k} log(1 - s_j)     target = k
//   loss = -sum_j log(1 - s_j)                      target = filler
// The gradient w.r.t. the pre-sigmoid logits is (s_j - y_j) at each
// keyword's argmax frame (earliest frame on ties) and zero elsewhere.
inline LossResult MaxPoolingLoss(const std::vector<double>& kws_prob,
                                 int frames, int n_keywords, int target) {
  if (frames < 1) {
    throw std::invalid_argument("max_pooling_loss: need at least one frame");
  }
  if (target != kFillerLabel && (target < 0 || target >= n_keywords)) {
    throw std::out_of_range("max_pooling_loss: target keyword out of range");
  }

  LossResult result;
  result.dlogits.assign(kws_prob.size(), 0.0);
  for (int j = 0; j < n_keywords; ++j) {
    int argmax_t = 0;
    double s = kws_prob[static_cast<std::size_t>(j)];
    for (int t = 1; t < frames; ++t) {
      double p = kws_prob[static_cast<std::size_t>(t) * n_keywords + j];
      if (p > s) {
        s = p;
        argmax_t = t;
      }
    }
    double clamped = std::min(std::max(s, kProbClampLo), kProbClampHi);
    double y = (j == target) ? 1.0 : 0.0;
    result.loss += (j == target) ? -std::log(clamped) : -std::log1p(-clamped);
    if (s > kProbClampLo && s < kProbClampHi) {
      result.dlogits[static_cast<std::size_t>(argmax_t) * n_keywords + j] = s - y;
    }
  }
  return result;
}

namespace detail {

// Minimum number of frames needed to emit `tokens`: one per token plus a
// mandatory blank between adjacent repeats.
inline int CtcMinFrames(const std::vector<int>& tokens) {
  int min_len = static_cast<int>(tokens.size());
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i] == tokens[i - 1]) ++min_len;
  }
  return min_len;
}

}  // namespace detail

// CTC loss. asr_logprob is frames x vocab of log-softmax rows; blank is
// token 0; `tokens` is the blank-free label sequence. Returns
// -log sum over all alignments and the gradient w.r.t. the pre-softmax
// logits: p[t][v] - q[t][v], where q is the lattice occupation probability.
// Infeasible labels are an error (they indicate a corpus bug).
inline LossResult CtcLoss(const std::vector<double>& asr_logprob, int frames,
                          int vocab_size, const std::vector<int>& tokens) {
  if (frames < 1) {
    throw std::invalid_argument("ctc_loss: need at least one frame");
  }
  if (vocab_size < 2) {
    throw std::invalid_argument("ctc_loss: vocab must include blank and a token");
  }
  for (int tok : tokens) {
    if (tok <= 0 || tok >= vocab_size) {
      throw std::out_of_range("ctc_loss: token index out of range: " +
                              std::to_string(tok));
    }
  }
  if (frames < detail::CtcMinFrames(tokens)) {
    throw std::invalid_argument("ctc_loss: label infeasible for " +
                                std::to_string(frames) + " frames");
  }

  const int L = static_cast<int>(tokens.size());
  const int S = 2 * L + 1;
  auto ext = [&tokens](int s) { return (s % 2 == 1) ? tokens[s / 2] : 0; };
  auto logp = [&asr_logprob, vocab_size](int t, int v) {
    return asr_logprob[static_cast<std::size_t>(t) * vocab_size + v];
  };

  // Forward variables, alpha[t][s] over the extended label sequence.
  std::vector<double> alpha(static_cast<std::size_t>(frames) * S, kLogZero);
  alpha[0] = logp(0, 0);
  if (S > 1) alpha[1] = logp(0, ext(1));
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < S; ++s) {
      double stay = alpha[static_cast<std::size_t>(t - 1) * S + s];
      double step = s >= 1 ? alpha[static_cast<std::size_t>(t - 1) * S + s - 1]
                           : kLogZero;
      double skip = kLogZero;
      if (s >= 2 && ext(s) != 0 && ext(s) != ext(s - 2)) {
        skip = alpha[static_cast<std::size_t>(t - 1) * S + s - 2];
      }
      double best = LogSumExp(stay, step, skip);
      if (best != kLogZero) {
        alpha[static_cast<std::size_t>(t) * S + s] = best + logp(t, ext(s));
      }
    }
  }

  double log_total = alpha[static_cast<std::size_t>(frames - 1) * S + S - 1];
  if (S > 1) {
    log_total = LogSumExp(
        log_total, alpha[static_cast<std::size_t>(frames - 1) * S + S - 2]);
  }
  if (!std::isfinite(log_total)) {
    throw std::runtime_error("ctc_loss: vanished path probability");
  }

  // Backward variables.
  std::vector<double> beta(static_cast<std::size_t>(frames) * S, kLogZero);
  beta[static_cast<std::size_t>(frames - 1) * S + S - 1] =
      logp(frames - 1, ext(S - 1));
  if (S > 1) {
    beta[static_cast<std::size_t>(frames - 1) * S + S - 2] =
        logp(frames - 1, ext(S - 2));
  }
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = S - 1; s >= 0; --s) {
      double stay = beta[static_cast<std::size_t>(t + 1) * S + s];
      double step = s + 1 < S ? beta[static_cast<std::size_t>(t + 1) * S + s + 1]
                              : kLogZero;
      double skip = kLogZero;
      if (s + 2 < S && ext(s + 2) != 0 && ext(s + 2) != ext(s)) {
        skip = beta[static_cast<std::size_t>(t + 1) * S + s + 2];
      }
      double best = LogSumExp(stay, step, skip);
      if (best != kLogZero) {
        beta[static_cast<std::size_t>(t) * S + s] = best + logp(t, ext(s));
      }
    }
  }

  LossResult result;
  result.loss = -log_total;
  result.dlogits.assign(asr_logprob.size(), 0.0);
  for (int t = 0; t < frames; ++t) {
    // Occupation probability of each vocabulary symbol at frame t.
    std::vector<double> occ(static_cast<std::size_t>(vocab_size), 0.0);
    for (int s = 0; s < S; ++s) {
      double a = alpha[static_cast<std::size_t>(t) * S + s];
      double b = beta[static_cast<std::size_t>(t) * S + s];
      if (a == kLogZero || b == kLogZero) continue;
      occ[static_cast<std::size_t>(ext(s))] +=
          std::exp(a + b - logp(t, ext(s)) - log_total);
    }
    for (int v = 0; v < vocab_size; ++v) {
      result.dlogits[static_cast<std::size_t>(t) * vocab_size + v] =
          std::exp(logp(t, v)) - occ[static_cast<std::size_t>(v)];
    }
  }
  return result;
}

struct LossWeights {
  double ctc = 0.5;
  double wws = 1.0;
};

struct LossBundle {
  double l_ctc = 0.0;
  double l_wws = 0.0;
  double l_total = 0.0;
};

inline LossBundle CombinedLoss(double l_ctc, double l_wws,
                               const LossWeights& weights = LossWeights()) {
  if (!std::isfinite(l_ctc) || !std::isfinite(l_wws)) {
    throw std::invalid_argument("combined_loss: non-finite loss term");
  }
  LossBundle bundle;
  bundle.l_ctc = l_ctc;
  bundle.l_wws = l_wws;
  bundle.l_total = weights.ctc * l_ctc + weights.wws * l_wws;
  return bundle;
}

}  // namespace wws

#endif  // WWS_LOSSES_HPP_
