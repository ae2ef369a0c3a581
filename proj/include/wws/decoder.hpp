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
// CTC decoding of the ASR branch: greedy best-path and prefix beam search.
// Blank is always token 0. Ties are fully specified (lowest token index for
// argmax, lexicographic token sequence for equal beam scores) so decoders
// are reproducible across implementations.

#ifndef WWS_DECODER_HPP_
#define WWS_DECODER_HPP_

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "wws/losses.hpp"
#include "wws/model.hpp"

namespace wws {

// A blank-free decoding hypothesis with its total log-probability.
struct Hypothesis {
  std::vector<int> tokens;
  double logprob = 0.0;
};

// Merge adjacent repeats, then drop blanks. Idempotent.
inline std::vector<int> CollapseCtc(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int tok : path) {
    if (tok != prev && tok != 0) out.push_back(tok);
    prev = tok;
  }
  return out;
}

// Best-path decoding: per-frame argmax (lowest index wins ties), collapsed.
// The reported log-probability is the sum of the selected per-frame
// log-probabilities, i.e. the probability of the best path itself.
inline Hypothesis GreedyDecode(const std::vector<double>& asr_logprob,
                               int frames, int vocab_size) {
  if (frames < 1) {
    throw std::invalid_argument("greedy_decode: need at least one frame");
  }
  std::vector<int> path(static_cast<std::size_t>(frames));
  double logprob = 0.0;
  for (int t = 0; t < frames; ++t) {
    const double* row =
        asr_logprob.data() + static_cast<std::size_t>(t) * vocab_size;
    int best = 0;
    for (int v = 1; v < vocab_size; ++v) {
      if (row[v] > row[best]) best = v;
    }
    path[static_cast<std::size_t>(t)] = best;
    logprob += row[best];
  }
  Hypothesis hyp;
  hyp.tokens = CollapseCtc(path);
  hyp.logprob = logprob;
  return hyp;
}

inline Hypothesis GreedyDecode(const PosteriorStream& post) {
  return GreedyDecode(post.asr_logprob, post.frames, post.vocab_size);
}

namespace detail {

// Per-prefix probability pair: ending in blank / ending in non-blank.
struct PrefixScore {
  double log_pb = kLogZero;
  double log_pnb = kLogZero;
  double Total() const { return LogSumExp(log_pb, log_pnb); }
};

}  // namespace detail

// Standard CTC prefix beam search. Keeps the top `width` prefixes by total
// probability at every frame; equal scores are ordered by lexicographic
// token sequence. Returns up to `width` hypotheses, best first.
inline std::vector<Hypothesis> PrefixBeamSearch(
    const std::vector<double>& asr_logprob, int frames, int vocab_size,
    int width) {
  if (width < 1) {
    throw std::invalid_argument("prefix_beam_search: width must be >= 1");
  }
  if (frames < 1) {
    throw std::invalid_argument("prefix_beam_search: need at least one frame");
  }

  // std::map keys keep prefixes in lexicographic order, which makes the
  // tie-break deterministic without extra bookkeeping.
  using Beam = std::map<std::vector<int>, detail::PrefixScore>;
  Beam beam;
  beam[{}].log_pb = 0.0;  // empty prefix, probability 1

  for (int t = 0; t < frames; ++t) {
    const double* row =
        asr_logprob.data() + static_cast<std::size_t>(t) * vocab_size;
    Beam next;
    for (const auto& [prefix, score] : beam) {
      double total = score.Total();
      // Emit blank: the prefix is unchanged and now ends in blank.
      {
        auto& ns = next[prefix];
        ns.log_pb = LogSumExp(ns.log_pb, total + row[0]);
      }
      for (int v = 1; v < vocab_size; ++v) {
        double logp = row[v];
        if (!prefix.empty() && prefix.back() == v) {
          // Repeating the final symbol extends the same emission...
          auto& same = next[prefix];
          same.log_pnb = LogSumExp(same.log_pnb, score.log_pnb + logp);
          // ...unless a blank separated them, which emits a new symbol.
          std::vector<int> extended = prefix;
          extended.push_back(v);
          auto& ns = next[extended];
          ns.log_pnb = LogSumExp(ns.log_pnb, score.log_pb + logp);
        } else {
          std::vector<int> extended = prefix;
          extended.push_back(v);
          auto& ns = next[extended];
          ns.log_pnb = LogSumExp(ns.log_pnb, total + logp);
        }
      }
    }

    if (static_cast<int>(next.size()) > width) {
      // Prune to the top `width`; map iteration order supplies the
      // lexicographic tie-break via stable_sort.
      std::vector<Beam::iterator> order;
      order.reserve(next.size());
      for (auto it = next.begin(); it != next.end(); ++it) order.push_back(it);
      std::stable_sort(order.begin(), order.end(),
                       [](const Beam::iterator& a, const Beam::iterator& b) {
                         return a->second.Total() > b->second.Total();
                       });
      Beam pruned;
      for (int i = 0; i < width; ++i) {
        pruned.insert(*order[static_cast<std::size_t>(i)]);
      }
      next = std::move(pruned);
    }
    beam = std::move(next);
  }

  std::vector<Hypothesis> result;
  result.reserve(beam.size());
  for (const auto& [prefix, score] : beam) {
    Hypothesis hyp;
    hyp.tokens = prefix;
    hyp.logprob = score.Total();
    result.push_back(std::move(hyp));
  }
  std::stable_sort(result.begin(), result.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.logprob > b.logprob;
                   });
  if (static_cast<int>(result.size()) > width) {
    result.resize(static_cast<std::size_t>(width));
  }
  return result;
}

inline std::vector<Hypothesis> PrefixBeamSearch(const PosteriorStream& post,
                                                int width) {
  return PrefixBeamSearch(post.asr_logprob, post.frames, post.vocab_size, width);
}

}  // namespace wws

#endif  // WWS_DECODER_HPP_
