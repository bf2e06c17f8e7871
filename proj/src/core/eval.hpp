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

#ifndef SPINE_CORE_EVAL_HPP
#define SPINE_CORE_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/embedding_io.hpp"
#include "core/types.hpp"

namespace spine {

struct WordPair {
  std::string word1;
  std::string word2;
  double human_score = 0.0;
};

/// `word1<TAB>word2<TAB>score` per line.
std::vector<WordPair> load_word_pairs(const std::string& path);

/// u.v / (|u||v|). An all-zero vector yields similarity 0 with the flag
/// set rather than an error; sparse embeddings can zero a word out and
/// silently dropping such pairs would bias rank lists.
double cosine_similarity(const Vector& u, const Vector& v,
                         bool* zero_vector_flag = nullptr);

/// Spearman rank correlation: Pearson correlation of the fractional
/// (average-for-ties) rank vectors. Perfectly reversed inputs give exactly
/// -1.
double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y);

struct SimilarityResult {
  double rho = 0.0;
  double coverage = 0.0;  // surviving fraction of the pair list
  size_t pairs_used = 0;
  size_t pairs_total = 0;
};

/// Filters to pairs with both words in vocabulary, then correlates human
/// scores with cosine similarities over the survivors.
SimilarityResult word_similarity_eval(const EmbeddingMatrix& emb,
                                      const std::vector<WordPair>& pairs);

struct LabeledTextSet {
  std::vector<std::vector<std::string>> tokens;  // one token list per example
  std::vector<std::string> labels;               // parallel to `tokens`
};

/// `label<TAB>space-separated tokens` per line.
LabeledTextSet load_labeled_text(const std::string& path);

/// Mean of the in-vocabulary word vectors. Out-of-vocabulary tokens
/// contribute zero vectors and still count in the denominator. An all-OOV
/// sentence yields the zero vector with the flag set.
Vector sentence_features(const std::vector<std::string>& tokens,
                         const EmbeddingMatrix& emb,
                         bool* all_oov_flag = nullptr);

/// Multinomial logistic regression over averaged word vectors.
struct LinearClassifier {
  std::vector<std::string> classes;  // sorted label set
  Matrix weights;                    // d x |classes|
  Vector bias;                       // |classes|
  double chosen_reg = 0.0;
  double dev_accuracy = 0.0;
  double train_accuracy = 0.0;
  bool converged = false;
};

/// L2-regularized softmax regression trained by full-batch gradient
/// descent with backtracking; converged when the gradient norm drops below
/// 1e-6 (otherwise the flag stays false at the iteration cap). The
/// regularization strength is picked by dev accuracy, ties to the earlier
/// candidate. Deterministic: weights start at zero.
LinearClassifier train_linear_classifier(const LabeledTextSet& train,
                                         const EmbeddingMatrix& emb,
                                         const std::vector<double>& reg_strengths,
                                         const LabeledTextSet& dev);

/// Fraction of argmax predictions matching the labels. Errors on labels
/// the model never saw.
double evaluate_classifier(const LinearClassifier& model,
                           const LabeledTextSet& test,
                           const EmbeddingMatrix& emb);

/// Feature-matrix export (`label,f0,f1,...` with a header row) so external
/// toolkits can run their own classifiers on the same features.
void export_features_csv(const LabeledTextSet& data,
                         const EmbeddingMatrix& emb, const std::string& path);

}  // namespace spine

#endif  // SPINE_CORE_EVAL_HPP
