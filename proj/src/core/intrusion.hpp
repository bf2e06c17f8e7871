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

#ifndef SPINE_CORE_INTRUSION_HPP
#define SPINE_CORE_INTRUSION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/trainer.hpp"

namespace spine {

/// One intrusion test item: a dimension's four most active words plus a
/// planted intruder, shuffled for presentation.
struct IntrusionQuestion {
  int id = 0;
  int dimension = 0;
  std::array<std::string, 4> top_words;
  std::string intruder;
  std::array<std::string, 5> presented;  // shuffled top_words + intruder
  int answer_index = 0;                  // intruder's slot in `presented`
};

/// The k words with the highest activation in the given column, sorted
/// descending, activation ties broken by vocabulary order.
std::vector<std::string> top_words(const SparseEmbeddings& sparse, int dim,
                                   int k);

/// Row indices eligible as intruders for `dim`: activation rank strictly in
/// the bottom half of the column (rank by value descending, ties by
/// vocabulary order) and activation at or above the column's 90th
/// percentile (nearest-rank) in at least one other dimension.
std::vector<Eigen::Index> intruder_candidates(const SparseEmbeddings& sparse,
                                              int dim);

/// Uniform draw from intruder_candidates(dim). Errors when no word
/// qualifies.
std::string sample_intruder(const SparseEmbeddings& sparse, int dim,
                            Rng& rng);

struct QuestionSet {
  std::vector<IntrusionQuestion> questions;
  std::vector<int> skipped_dimensions;  // unusable dims encountered
};

/// Samples n_dims distinct usable dimensions uniformly and builds one
/// question per dimension. Dimensions with fewer than four strictly
/// positive activations, or with no intruder candidate outside the top
/// four, are skipped (and logged) and another dimension is drawn. Errors
/// when fewer than n_dims usable dimensions exist.
QuestionSet generate_questions(const SparseEmbeddings& sparse, int n_dims,
                               Rng& rng);

/// Annotator choices per question id; each choice indexes the presented
/// word list (0..4).
struct AnnotationSet {
  struct Entry {
    std::string annotator_id;
    int choice = 0;
  };
  std::map<int, std::vector<Entry>> by_question;
};

struct IntrusionScore {
  double precision = 0.0;   // resolved answer equals the true intruder
  double agree2plus = 0.0;  // questions where >= 2 annotators agree
  double agree3 = 0.0;      // questions where all annotators agree
  int n_questions = 0;      // annotated questions scored
  bool single_annotator = false;  // degenerate one-judge panel
};

/// Majority-vote scoring. Ties between equally voted choices resolve to a
/// seeded uniform pick among the tied choices. Single-annotator panels are
/// scored (precision = raw accuracy) with agreement trivially 1 and the
/// degenerate flag set.
IntrusionScore score_annotations(const std::vector<IntrusionQuestion>& questions,
                                 const AnnotationSet& annotations, Rng& rng);

/// `question_id,dimension,word1..word5,answer_index` rows; the
/// annotator-facing variant drops the answer column.
void save_questions_csv(const std::vector<IntrusionQuestion>& questions,
                        const std::string& path, bool include_answer = true);

std::vector<IntrusionQuestion> load_questions_csv(const std::string& path);

/// `question_id,annotator_id,choice_index` rows.
AnnotationSet load_annotations_csv(const std::string& path);

}  // namespace spine

#endif  // SPINE_CORE_INTRUSION_HPP
