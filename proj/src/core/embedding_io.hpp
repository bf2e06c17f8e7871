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

#ifndef SPINE_CORE_EMBEDDING_IO_HPP
#define SPINE_CORE_EMBEDDING_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core/types.hpp"

namespace spine {

/// A vocabulary plus one dense row per word. Words are unique and the row
/// count always equals the vocabulary size.
struct EmbeddingMatrix {
  std::vector<std::string> vocab;
  Matrix matrix;  // |vocab| x d

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }
};

/// Word-to-row lookup (built on demand; the matrix itself stays plain data).
std::unordered_map<std::string, Eigen::Index> vocab_index(
    const std::vector<std::string>& vocab);

struct VocabSplit {
  std::vector<std::string> train;
  std::vector<std::string> dev;
};

struct LoadOptions {
  size_t max_words = 0;  // 0 = no limit
  const std::unordered_set<std::string>* vocab_filter = nullptr;
  bool lowercase = false;  // case-fold words before filtering/storing
};

/// Reads a whitespace-separated text embedding file (`word v1 ... vd` per
/// line). A first line consisting of two integers is treated as a `V d`
/// header and skipped. Duplicate words, ragged rows and unparseable values
/// are rejected with the offending line number. When `lowercase` is set,
/// case-folding may merge words; the first occurrence wins.
EmbeddingMatrix load_embeddings(const std::string& path,
                                const LoadOptions& options = {});

/// Writes the same text format, `precision` significant digits per value.
/// Precision 17 round-trips doubles exactly.
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     int precision = 6);

/// Top-k words of a frequency list (`word` or `word count` per line),
/// sorted by count descending, ties in file order. A list without counts
/// is taken as already sorted.
std::vector<std::string> select_vocabulary(const std::string& freq_list_path,
                                           size_t k, bool lowercase = false);

/// Seeded uniform shuffle split: n_train words for training, the rest for
/// development. Pure function of (vocab, n_train, seed).
VocabSplit split_train_dev(const std::vector<std::string>& vocab,
                           size_t n_train, uint64_t seed);

}  // namespace spine

#endif  // SPINE_CORE_EMBEDDING_IO_HPP
