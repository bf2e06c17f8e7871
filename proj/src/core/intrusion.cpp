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

#include "core/intrusion.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "core/csv.hpp"

namespace spine {

namespace {

void check_dim(const SparseEmbeddings& sparse, int dim) {
  if (dim < 0 || dim >= sparse.z.cols()) {
    fail(ErrorCode::config, "dimension " + std::to_string(dim) +
                                " out of range (m = " +
                                std::to_string(sparse.z.cols()) + ")");
  }
}

/// Row indices sorted by activation in `dim` descending, ties by vocab
/// order.
std::vector<Eigen::Index> column_ranking(const SparseEmbeddings& sparse,
                                         int dim) {
  std::vector<Eigen::Index> order(static_cast<size_t>(sparse.z.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return sparse.z(a, dim) > sparse.z(b, dim);
                   });
  return order;
}

/// Nearest-rank 90th percentile of one column: the value at ascending rank
/// ceil(0.9 * V).
double column_percentile90(const Matrix& z, Eigen::Index col) {
  std::vector<double> values(static_cast<size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    values[static_cast<size_t>(i)] = z(i, col);
  }
  std::sort(values.begin(), values.end());
  size_t v = values.size();
  size_t rank = (9 * v + 9) / 10;  // ceil(0.9 v), 1-based
  if (rank < 1) rank = 1;
  return values[rank - 1];
}

int parse_int_field(const std::string& field, const std::string& context) {
  try {
    size_t pos = 0;
    int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::shape, context + ": bad integer '" + field + "'");
  }
}

}  // namespace

std::vector<std::string> top_words(const SparseEmbeddings& sparse, int dim,
                                   int k) {
  check_dim(sparse, dim);
  if (k < 0 || static_cast<Eigen::Index>(k) > sparse.z.rows()) {
    fail(ErrorCode::config, "k out of range");
  }
  auto order = column_ranking(sparse, dim);
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    words.push_back(sparse.vocab[static_cast<size_t>(order[static_cast<size_t>(i)])]);
  }
  return words;
}

std::vector<Eigen::Index> intruder_candidates(const SparseEmbeddings& sparse,
                                              int dim) {
  check_dim(sparse, dim);
  const Eigen::Index v = sparse.z.rows();
  auto order = column_ranking(sparse, dim);

  // rank of each row in this column (0 = most active)
  std::vector<Eigen::Index> rank(static_cast<size_t>(v));
  for (size_t pos = 0; pos < order.size(); ++pos) {
    rank[static_cast<size_t>(order[pos])] = static_cast<Eigen::Index>(pos);
  }
  const Eigen::Index half = (v + 1) / 2;  // first rank strictly below median

  std::vector<double> p90(static_cast<size_t>(sparse.z.cols()));
  for (Eigen::Index h = 0; h < sparse.z.cols(); ++h) {
    p90[static_cast<size_t>(h)] = column_percentile90(sparse.z, h);
  }

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index w = 0; w < v; ++w) {
    if (rank[static_cast<size_t>(w)] < half) continue;
    for (Eigen::Index h = 0; h < sparse.z.cols(); ++h) {
      if (h == dim) continue;
      if (sparse.z(w, h) >= p90[static_cast<size_t>(h)]) {
        candidates.push_back(w);
        break;
      }
    }
  }
  return candidates;
}

std::string sample_intruder(const SparseEmbeddings& sparse, int dim,
                            Rng& rng) {
  auto candidates = intruder_candidates(sparse, dim);
  if (candidates.empty()) {
    fail(ErrorCode::config,
         "no intruder candidate for dimension " + std::to_string(dim));
  }
  Eigen::Index pick =
      candidates[static_cast<size_t>(rng.integer(candidates.size()))];
  return sparse.vocab[static_cast<size_t>(pick)];
}

QuestionSet generate_questions(const SparseEmbeddings& sparse, int n_dims,
                               Rng& rng) {
  const Eigen::Index m = sparse.z.cols();
  if (n_dims < 0 || static_cast<Eigen::Index>(n_dims) > m) {
    fail(ErrorCode::config, "n_dims out of range");
  }
  if (sparse.z.rows() < 5) {
    fail(ErrorCode::config, "need at least 5 words for intrusion questions");
  }

  std::vector<int> dims(static_cast<size_t>(m));
  std::iota(dims.begin(), dims.end(), 0);
  rng.shuffle(dims);

  QuestionSet set;
  for (int dim : dims) {
    if (static_cast<int>(set.questions.size()) == n_dims) break;

    // "most active" needs at least four strictly positive activations
    Eigen::Index positives = (sparse.z.col(dim).array() > 0.0).count();
    if (positives < 4) {
      set.skipped_dimensions.push_back(dim);
      continue;
    }

    auto top = top_words(sparse, dim, 4);
    std::unordered_set<std::string> top_set(top.begin(), top.end());
    auto candidates = intruder_candidates(sparse, dim);
    std::erase_if(candidates, [&](Eigen::Index w) {
      return top_set.count(sparse.vocab[static_cast<size_t>(w)]) > 0;
    });
    if (candidates.empty()) {
      set.skipped_dimensions.push_back(dim);
      continue;
    }

    IntrusionQuestion q;
    q.id = static_cast<int>(set.questions.size());
    q.dimension = dim;
    std::copy(top.begin(), top.end(), q.top_words.begin());
    Eigen::Index pick =
        candidates[static_cast<size_t>(rng.integer(candidates.size()))];
    q.intruder = sparse.vocab[static_cast<size_t>(pick)];

    std::vector<std::string> presented(top.begin(), top.end());
    presented.push_back(q.intruder);
    rng.shuffle(presented);
    std::copy(presented.begin(), presented.end(), q.presented.begin());
    q.answer_index = static_cast<int>(
        std::find(presented.begin(), presented.end(), q.intruder) -
        presented.begin());
    set.questions.push_back(std::move(q));
  }

  if (static_cast<int>(set.questions.size()) < n_dims) {
    fail(ErrorCode::config,
         "only " + std::to_string(set.questions.size()) +
             " usable dimensions, " + std::to_string(n_dims) + " requested");
  }
  return set;
}

IntrusionScore score_annotations(
    const std::vector<IntrusionQuestion>& questions,
    const AnnotationSet& annotations, Rng& rng) {
  std::map<int, const IntrusionQuestion*> by_id;
  for (const auto& q : questions) by_id[q.id] = &q;

  IntrusionScore score;
  int n_correct = 0, n_agree2 = 0, n_agree3 = 0;
  bool all_single = !annotations.by_question.empty();

  for (const auto& [qid, entries] : annotations.by_question) {
    auto it = by_id.find(qid);
    if (it == by_id.end()) {
      fail(ErrorCode::config,
           "annotation references unknown question " + std::to_string(qid));
    }
    if (entries.empty()) continue;
    if (entries.size() > 1) all_single = false;

    int votes[5] = {0, 0, 0, 0, 0};
    for (const auto& e : entries) {
      if (e.choice < 0 || e.choice >= 5) {
        fail(ErrorCode::config, "choice index " + std::to_string(e.choice) +
                                    " out of range for question " +
                                    std::to_string(qid));
      }
      votes[e.choice] += 1;
    }
    int max_votes = *std::max_element(votes, votes + 5);
    std::vector<int> tied;
    for (int c = 0; c < 5; ++c) {
      if (votes[c] == max_votes) tied.push_back(c);
    }
    int resolved = tied.size() == 1
                       ? tied[0]
                       : tied[static_cast<size_t>(rng.integer(tied.size()))];

    score.n_questions += 1;
    if (resolved == it->second->answer_index) n_correct += 1;
    if (entries.size() == 1) {
      // one judge: agreement is trivial
      n_agree2 += 1;
      n_agree3 += 1;
    } else {
      if (max_votes >= 2) n_agree2 += 1;
      if (max_votes == static_cast<int>(entries.size())) n_agree3 += 1;
    }
  }

  if (score.n_questions == 0) {
    fail(ErrorCode::config, "no annotated questions to score");
  }
  double n = static_cast<double>(score.n_questions);
  score.precision = n_correct / n;
  score.agree2plus = n_agree2 / n;
  score.agree3 = n_agree3 / n;
  score.single_annotator = all_single;
  return score;
}

void save_questions_csv(const std::vector<IntrusionQuestion>& questions,
                        const std::string& path, bool include_answer) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write questions file: " + path);
  out << "question_id,dimension,word1,word2,word3,word4,word5";
  if (include_answer) out << ",answer_index";
  out << '\n';
  for (const auto& q : questions) {
    out << q.id << ',' << q.dimension;
    for (const auto& w : q.presented) out << ',' << csv_escape(w);
    if (include_answer) out << ',' << q.answer_index;
    out << '\n';
  }
}

std::vector<IntrusionQuestion> load_questions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open questions file: " + path);

  std::vector<IntrusionQuestion> questions;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "question_id") {
      if (fields.size() != 8) {
        fail(ErrorCode::shape,
             path + ": scoring needs the variant with the answer column");
      }
      continue;
    }
    std::string ctx = path + ":" + std::to_string(line_no);
    if (fields.size() != 8) {
      fail(ErrorCode::shape, ctx + ": expected 8 fields, got " +
                                 std::to_string(fields.size()));
    }
    IntrusionQuestion q;
    q.id = parse_int_field(fields[0], ctx);
    q.dimension = parse_int_field(fields[1], ctx);
    for (int i = 0; i < 5; ++i) {
      q.presented[static_cast<size_t>(i)] = fields[static_cast<size_t>(i) + 2];
    }
    q.answer_index = parse_int_field(fields[7], ctx);
    if (q.answer_index < 0 || q.answer_index >= 5) {
      fail(ErrorCode::shape, ctx + ": answer index out of range");
    }
    q.intruder = q.presented[static_cast<size_t>(q.answer_index)];
    int t = 0;
    for (int i = 0; i < 5; ++i) {
      if (i != q.answer_index) {
        q.top_words[static_cast<size_t>(t++)] =
            q.presented[static_cast<size_t>(i)];
      }
    }
    questions.push_back(std::move(q));
  }
  if (questions.empty()) fail(ErrorCode::shape, path + ": no questions");
  return questions;
}

AnnotationSet load_annotations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open annotations file: " + path);

  AnnotationSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "question_id") {
      continue;
    }
    std::string ctx = path + ":" + std::to_string(line_no);
    if (fields.size() != 3) {
      fail(ErrorCode::shape, ctx + ": expected 3 fields, got " +
                                 std::to_string(fields.size()));
    }
    AnnotationSet::Entry entry;
    entry.annotator_id = fields[1];
    entry.choice = parse_int_field(fields[2], ctx);
    set.by_question[parse_int_field(fields[0], ctx)].push_back(
        std::move(entry));
  }
  if (set.by_question.empty()) fail(ErrorCode::shape, path + ": no annotations");
  return set;
}

}  // namespace spine
