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

#include "core/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace spine {

namespace {

std::string pair_key(const std::string& w1, const std::string& w2) {
  return w1 <= w2 ? w1 + '\t' + w2 : w2 + '\t' + w1;
}

}  // namespace

int64_t CooccurrenceCounts::unigram_count(const std::string& word) const {
  auto it = unigrams.find(word);
  return it == unigrams.end() ? 0 : it->second;
}

int64_t CooccurrenceCounts::pair_count(const std::string& w1,
                                       const std::string& w2) const {
  auto it = pairs.find(pair_key(w1, w2));
  return it == pairs.end() ? 0 : it->second;
}

CooccurrenceCounts build_cooccurrence(
    const std::string& corpus_path, int window,
    const std::unordered_set<std::string>& vocab) {
  if (window < 1) fail(ErrorCode::config, "window must be >= 1");
  if (vocab.empty()) fail(ErrorCode::config, "empty coherence vocabulary");
  std::ifstream in(corpus_path);
  if (!in) fail(ErrorCode::io, "cannot open corpus: " + corpus_path);

  CooccurrenceCounts counts;
  std::string line;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    tokens.clear();
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      tokens.push_back(std::move(tok));
    }
    if (tokens.empty()) continue;

    size_t n_windows =
        tokens.size() > static_cast<size_t>(window)
            ? tokens.size() - static_cast<size_t>(window) + 1
            : 1;
    for (size_t start = 0; start < n_windows; ++start) {
      size_t stop = std::min(tokens.size(), start + static_cast<size_t>(window));
      counts.total_windows += 1;

      // distinct in-vocab words of this window
      std::vector<const std::string*> present;
      for (size_t i = start; i < stop; ++i) {
        if (vocab.count(tokens[i]) == 0) continue;
        bool dup = false;
        for (const std::string* p : present) {
          if (*p == tokens[i]) {
            dup = true;
            break;
          }
        }
        if (!dup) present.push_back(&tokens[i]);
      }
      for (const std::string* p : present) {
        counts.unigrams[*p] += 1;
      }
      for (size_t a = 0; a < present.size(); ++a) {
        for (size_t b = a + 1; b < present.size(); ++b) {
          counts.pairs[pair_key(*present[a], *present[b])] += 1;
        }
      }
    }
  }
  return counts;
}

double npmi(const std::string& w1, const std::string& w2,
            const CooccurrenceCounts& counts, double smoothing) {
  if (!(smoothing > 0.0)) fail(ErrorCode::config, "smoothing must be > 0");
  if (counts.total_windows == 0) {
    fail(ErrorCode::config, "empty co-occurrence counts");
  }
  int64_t c1 = counts.unigram_count(w1);
  int64_t c2 = counts.unigram_count(w2);
  if (c1 == 0) fail(ErrorCode::config, "word not in corpus: " + w1);
  if (c2 == 0) fail(ErrorCode::config, "word not in corpus: " + w2);

  double total = static_cast<double>(counts.total_windows);
  double p1 = static_cast<double>(c1) / total;
  double p2 = static_cast<double>(c2) / total;
  double p12 =
      (static_cast<double>(counts.pair_count(w1, w2)) + smoothing) / total;
  if (p12 >= 1.0) return 1.0;  // smoothed pair mass covers every window

  double value = std::log(p12 / (p1 * p2)) / (-std::log(p12));
  return std::clamp(value, -1.0, 1.0);
}

double dimension_coherence(const std::vector<std::string>& top_words,
                           const CooccurrenceCounts& counts,
                           double smoothing) {
  if (top_words.size() < 2) {
    fail(ErrorCode::config, "dimension coherence needs at least 2 words");
  }
  double sum = 0.0;
  size_t n_pairs = 0;
  for (size_t a = 0; a < top_words.size(); ++a) {
    for (size_t b = a + 1; b < top_words.size(); ++b) {
      ++n_pairs;
      if (counts.unigram_count(top_words[a]) == 0 ||
          counts.unigram_count(top_words[b]) == 0) {
        sum += -1.0;  // out-of-corpus words are scored at the floor
      } else {
        sum += npmi(top_words[a], top_words[b], counts, smoothing);
      }
    }
  }
  return sum / static_cast<double>(n_pairs);
}

CoherenceReport model_coherence(const SparseEmbeddings& sparse,
                                const CooccurrenceCounts& counts, int n_top,
                                double smoothing) {
  if (n_top < 2) fail(ErrorCode::config, "n_top must be >= 2");
  if (sparse.z.rows() == 0) fail(ErrorCode::shape, "empty embeddings");
  if (static_cast<size_t>(n_top) > sparse.vocab.size()) {
    fail(ErrorCode::config, "n_top exceeds vocabulary size");
  }

  CoherenceReport report;
  report.n_top = n_top;
  const Eigen::Index v = sparse.z.rows();
  std::vector<Eigen::Index> order(static_cast<size_t>(v));

  for (Eigen::Index h = 0; h < sparse.z.cols(); ++h) {
    if ((sparse.z.col(h).array() == 0.0).all()) {
      report.skipped_dimensions.push_back(static_cast<int>(h));
      continue;
    }
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return sparse.z(a, h) > sparse.z(b, h);
                     });
    std::vector<std::string> words;
    words.reserve(static_cast<size_t>(n_top));
    for (int i = 0; i < n_top; ++i) {
      words.push_back(sparse.vocab[static_cast<size_t>(order[i])]);
    }
    report.dimensions.push_back(static_cast<int>(h));
    report.scores.push_back(dimension_coherence(words, counts, smoothing));
    report.top_words.push_back(std::move(words));
  }

  if (!report.scores.empty()) {
    report.aggregate =
        std::accumulate(report.scores.begin(), report.scores.end(), 0.0) /
        static_cast<double>(report.scores.size());
  }
  return report;
}

void write_coherence_csv(const CoherenceReport& report,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write coherence report: " + path);
  out << "dimension,score,top_words\n";
  char buf[64];
  for (size_t i = 0; i < report.dimensions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.scores[i]);
    out << report.dimensions[i] << ',' << buf << ',';
    for (size_t w = 0; w < report.top_words[i].size(); ++w) {
      if (w > 0) out << ' ';
      out << report.top_words[i][w];
    }
    out << '\n';
  }
  if (report.aggregate.has_value()) {
    std::snprintf(buf, sizeof(buf), "%.17g", *report.aggregate);
    out << "aggregate," << buf << ",\n";
  } else {
    out << "aggregate,nan,\n";
  }
  out << "skipped_dimensions," << report.skipped_dimensions.size() << ",\n";
}

}  // namespace spine
