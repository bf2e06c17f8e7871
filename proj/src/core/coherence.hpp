// Copyright 2026 The SPINE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINE_CORE_COHERENCE_HPP
#define SPINE_CORE_COHERENCE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core/trainer.hpp"
#include "core/types.hpp"

namespace spine {

/// Window-based unigram and unordered-pair counts over a reference corpus.
/// A word's unigram count is the number of windows containing it; a pair
/// count is the number of windows containing both words. Each window
/// contributes at most once per word / per distinct pair.
struct CooccurrenceCounts {
  std::unordered_map<std::string, int64_t> unigrams;
  std::unordered_map<std::string, int64_t> pairs;  // key "min\tmax"
  int64_t total_windows = 0;

  int64_t unigram_count(const std::string& word) const;
  int64_t pair_count(const std::string& w1, const std::string& w2) const;
};

/// Slides a `window`-token window over each document (one document per
/// line, whitespace tokens) and counts in-vocab words and pairs. Documents
/// shorter than the window form a single window.
CooccurrenceCounts build_cooccurrence(
    const std::string& corpus_path, int window,
    const std::unordered_set<std::string>& vocab);

/// Normalized pointwise mutual information in [-1, 1]:
/// log(p12 / (p1 p2)) / (-log p12), with `smoothing` added to the raw pair
/// count. Pairs covering every window score 1. Both words must have
/// nonzero unigram counts.
double npmi(const std::string& w1, const std::string& w2,
            const CooccurrenceCounts& counts, double smoothing = 1.0);

/// Mean NPMI over all unordered pairs of the given words. Pairs involving
/// a word absent from the corpus contribute the floor value -1.
double dimension_coherence(const std::vector<std::string>& top_words,
                           const CooccurrenceCounts& counts,
                           double smoothing = 1.0);

struct CoherenceReport {
  int n_top = 0;
  std::vector<int> dimensions;  // scored dimensions
  std::vector<double> scores;   // parallel to `dimensions`
  std::vector<std::vector<std::string>> top_words;  // parallel
  std::vector<int> skipped_dimensions;  // all-zero columns
  std::optional<double> aggregate;      // absent when nothing was scored
};

/// Scores every dimension by the coherence of its n_top highest-activation
/// words (ties by vocabulary order). All-zero dimensions are skipped and
/// reported separately.
CoherenceReport model_coherence(const SparseEmbeddings& sparse,
                                const CooccurrenceCounts& counts, int n_top,
                                double smoothing = 1.0);

/// CSV rows `dimension,score,top_words` plus a trailing aggregate line.
void write_coherence_csv(const CoherenceReport& report,
                         const std::string& path);

}  // namespace spine

#endif  // SPINE_CORE_COHERENCE_HPP
