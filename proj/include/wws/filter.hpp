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
// Two-stage decision refinement. The threshold filter keeps the rank-th
// highest temporal score and above; everything below becomes filler. The
// ASR filter then discards surviving keyword decisions whose wake-word
// character length matches neither of the two transcripts.

#ifndef WWS_FILTER_HPP_
#define WWS_FILTER_HPP_

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wws/common.hpp"
#include "wws/model.hpp"

namespace wws {

// A per-utterance decision as it flows through the dual filter.
struct Decision {
  std::string utt_id;
  double temporal_score = 0.0;
  int temporal_label = kFillerLabel;
  int final_label = kFillerLabel;
};

struct WakeWordList {
  std::vector<std::string> words;

  int Size() const { return static_cast<int>(words.size()); }
  bool Contains(int label) const { return label >= 0 && label < Size(); }
  std::size_t CharLength(int label) const {
    return Utf8Length(words[static_cast<std::size_t>(label)]);
  }
};

using TranscriptMap = std::unordered_map<std::string, std::string>;

// Maximum keyword probability over all frames and keywords, with its
// keyword. Earliest frame wins score ties, lowest keyword index wins ties
// within a frame.
inline std::pair<double, int> TemporalScoring(
    const std::vector<double>& kws_prob, int frames, int n_keywords) {
  if (frames < 1) {
    throw std::invalid_argument("temporal_scoring: need at least one frame");
  }
  double best = -1.0;
  int label = 0;
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < n_keywords; ++j) {
      double p = kws_prob[static_cast<std::size_t>(t) * n_keywords + j];
      if (p > best) {
        best = p;
        label = j;
      }
    }
  }
  return {best, label};
}

inline std::pair<double, int> TemporalScoring(const PosteriorStream& post) {
  return TemporalScoring(post.kws_prob, post.frames, post.n_keywords);
}

// Rank-based threshold filter. The threshold is the rank-th highest
// temporal score (the minimum score when rank exceeds the batch); scores
// at or above it keep their temporal label, the rest become filler.
// Input order is preserved.
inline std::vector<Decision> ThresholdFilter(
    const std::vector<Decision>& decisions, int rank) {
  if (rank < 1) {
    throw std::invalid_argument("threshold_filter: rank must be >= 1");
  }
  if (decisions.empty()) {
    throw std::invalid_argument("threshold_filter: empty decision list");
  }
  std::vector<double> scores;
  scores.reserve(decisions.size());
  for (const auto& d : decisions) scores.push_back(d.temporal_score);
  std::sort(scores.begin(), scores.end(), std::greater<double>());
  std::size_t idx = std::min(static_cast<std::size_t>(rank), scores.size()) - 1;
  double threshold = scores[idx];

  std::vector<Decision> out = decisions;
  for (auto& d : out) {
    d.final_label =
        d.temporal_score >= threshold ? d.temporal_label : kFillerLabel;
  }
  return out;
}

// Algorithm: keep a surviving keyword decision if either transcript has the
// same character length as the detected wake word, otherwise relabel it as
// filler. Filler decisions pass through untouched.
inline Decision AsrFilter(const Decision& decision, std::string_view asr1,
                          std::string_view asr2,
                          const WakeWordList& wake_words) {
  Decision out = decision;
  if (!wake_words.Contains(decision.final_label)) {
    return out;  // filler or unknown label: nothing to re-check
  }
  std::size_t want = wake_words.CharLength(decision.final_label);
  if (Utf8Length(asr1) != want && Utf8Length(asr2) != want) {
    out.final_label = kFillerLabel;
  }
  return out;
}

// Threshold filter then ASR filter, transcripts keyed by utterance id;
// a missing transcript counts as the empty string.
inline std::vector<Decision> RunDualFilter(const std::vector<Decision>& decisions,
                                           const TranscriptMap& asr1,
                                           const TranscriptMap& asr2,
                                           const WakeWordList& wake_words,
                                           int rank) {
  std::vector<Decision> out = ThresholdFilter(decisions, rank);
  for (auto& d : out) {
    auto it1 = asr1.find(d.utt_id);
    auto it2 = asr2.find(d.utt_id);
    d = AsrFilter(d, it1 == asr1.end() ? std::string_view() : it1->second,
                  it2 == asr2.end() ? std::string_view() : it2->second,
                  wake_words);
  }
  return out;
}

}  // namespace wws

#endif  // WWS_FILTER_HPP_
