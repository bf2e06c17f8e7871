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

#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "core/csv.hpp"

namespace spine {

namespace {

/// Fractional ranks, 1-based, ties get the average of their rank range.
std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(std::move(tok));
  return tokens;
}

Vector mean_vector(const std::vector<std::string>& tokens,
                   const EmbeddingMatrix& emb,
                   const std::unordered_map<std::string, Eigen::Index>& index,
                   bool* all_oov_flag) {
  if (tokens.empty()) fail(ErrorCode::config, "empty token list");
  Vector sum = Vector::Zero(emb.dim());
  size_t in_vocab = 0;
  for (const auto& tok : tokens) {
    auto it = index.find(tok);
    if (it != index.end()) {
      sum += emb.matrix.row(it->second).transpose();
      ++in_vocab;
    }
    // out-of-vocabulary tokens contribute zero vectors but still count
  }
  if (all_oov_flag != nullptr) *all_oov_flag = (in_vocab == 0);
  return sum / static_cast<double>(tokens.size());
}

Matrix feature_matrix(const LabeledTextSet& data, const EmbeddingMatrix& emb) {
  auto index = vocab_index(emb.vocab);
  Matrix features(static_cast<Eigen::Index>(data.tokens.size()), emb.dim());
  for (size_t i = 0; i < data.tokens.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) =
        mean_vector(data.tokens[i], emb, index, nullptr).transpose();
  }
  return features;
}

std::vector<int> label_indices(const LabeledTextSet& data,
                               const std::vector<std::string>& classes) {
  std::vector<int> indices(data.labels.size());
  for (size_t i = 0; i < data.labels.size(); ++i) {
    auto it = std::lower_bound(classes.begin(), classes.end(), data.labels[i]);
    if (it == classes.end() || *it != data.labels[i]) {
      fail(ErrorCode::config, "label not seen in training: " + data.labels[i]);
    }
    indices[i] = static_cast<int>(it - classes.begin());
  }
  return indices;
}

/// Row-wise softmax probabilities, numerically shifted.
Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double mx = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

struct SoftmaxFit {
  Matrix weights;
  Vector bias;
  bool converged = false;
};

SoftmaxFit fit_softmax(const Matrix& x, const std::vector<int>& y,
                       int n_classes, double reg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Matrix onehot = Matrix::Zero(n, n_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    onehot(i, y[static_cast<size_t>(i)]) = 1.0;
  }

  SoftmaxFit fit;
  fit.weights = Matrix::Zero(d, n_classes);
  fit.bias = Vector::Zero(n_classes);

  auto objective = [&](const Matrix& w, const Vector& b) {
    Matrix logits = (x * w).rowwise() + b.transpose();
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = logits.row(i).maxCoeff();
      double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
      nll -= logits(i, y[static_cast<size_t>(i)]) - lse;
    }
    return nll * inv_n + 0.5 * reg * w.squaredNorm();
  };

  const int max_iters = 10000;
  const double grad_tol = 1e-6;
  double step = 1.0;
  double loss = objective(fit.weights, fit.bias);

  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix p = softmax_rows((x * fit.weights).rowwise() +
                            fit.bias.transpose());
    Matrix residual = p - onehot;
    Matrix grad_w = inv_n * (x.transpose() * residual) + reg * fit.weights;
    Vector grad_b = inv_n * residual.colwise().sum().transpose();

    double grad_norm =
        std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
    if (grad_norm < grad_tol) {
      fit.converged = true;
      break;
    }

    // backtracking on the objective
    for (;;) {
      Matrix w_next = fit.weights - step * grad_w;
      Vector b_next = fit.bias - step * grad_b;
      double loss_next = objective(w_next, b_next);
      if (loss_next <= loss || step < 1e-12) {
        fit.weights = std::move(w_next);
        fit.bias = std::move(b_next);
        loss = loss_next;
        step *= 1.1;  // recover step size after successful moves
        break;
      }
      step *= 0.5;
    }
  }
  return fit;
}

double accuracy_of(const Matrix& x, const std::vector<int>& y,
                   const Matrix& w, const Vector& b) {
  Matrix logits = (x * w).rowwise() + b.transpose();
  int correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index argmax = 0;
    logits.row(i).maxCoeff(&argmax);
    if (static_cast<int>(argmax) == y[static_cast<size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace

std::vector<WordPair> load_word_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open word-pair file: " + path);

  std::vector<WordPair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    WordPair p;
    std::string score_tok;
    if (!(ls >> p.word1 >> p.word2 >> score_tok)) {
      fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                 ": expected `word1 word2 score`");
    }
    try {
      size_t pos = 0;
      p.human_score = std::stod(score_tok, &pos);
      if (pos != score_tok.size()) throw std::invalid_argument(score_tok);
    } catch (const std::exception&) {
      fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                 ": bad score '" + score_tok + "'");
    }
    if (!std::isfinite(p.human_score)) {
      fail(ErrorCode::numeric, path + ":" + std::to_string(line_no) +
                                   ": non-finite score");
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) fail(ErrorCode::shape, path + ": no word pairs");
  return pairs;
}

double cosine_similarity(const Vector& u, const Vector& v,
                         bool* zero_vector_flag) {
  if (u.size() != v.size()) {
    fail(ErrorCode::shape, "cosine: length mismatch");
  }
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    if (zero_vector_flag != nullptr) *zero_vector_flag = true;
    return 0.0;
  }
  if (zero_vector_flag != nullptr) *zero_vector_flag = false;
  return u.dot(v) / (nu * nv);
}

double spearman_rho(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorCode::shape, "spearman: length mismatch");
  if (x.size() < 2) fail(ErrorCode::shape, "spearman: need at least 2 points");

  auto rx = fractional_ranks(x);
  auto ry = fractional_ranks(y);

  // Pearson on the ranks, accumulated in extended precision so that
  // perfectly (anti)monotone inputs land exactly on +/-1 after rounding.
  const size_t n = rx.size();
  long double mean_x = 0.0L, mean_y = 0.0L;
  for (size_t i = 0; i < n; ++i) {
    mean_x += rx[i];
    mean_y += ry[i];
  }
  mean_x /= static_cast<long double>(n);
  mean_y /= static_cast<long double>(n);

  long double cov = 0.0L, var_x = 0.0L, var_y = 0.0L;
  for (size_t i = 0; i < n; ++i) {
    long double dx = rx[i] - mean_x;
    long double dy = ry[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0L || var_y == 0.0L) {
    fail(ErrorCode::numeric, "spearman: zero rank variance");
  }
  long double rho = cov / (std::sqrt(var_x) * std::sqrt(var_y));
  return std::clamp(static_cast<double>(rho), -1.0, 1.0);
}

SimilarityResult word_similarity_eval(const EmbeddingMatrix& emb,
                                      const std::vector<WordPair>& pairs) {
  if (pairs.empty()) fail(ErrorCode::config, "empty word-pair set");
  auto index = vocab_index(emb.vocab);

  std::vector<double> human, predicted;
  for (const auto& p : pairs) {
    auto it1 = index.find(p.word1);
    auto it2 = index.find(p.word2);
    if (it1 == index.end() || it2 == index.end()) continue;
    human.push_back(p.human_score);
    predicted.push_back(cosine_similarity(
        emb.matrix.row(it1->second).transpose(),
        emb.matrix.row(it2->second).transpose()));
  }
  if (human.size() < 2) {
    fail(ErrorCode::config, "fewer than 2 word pairs survive the vocabulary");
  }

  SimilarityResult result;
  result.pairs_used = human.size();
  result.pairs_total = pairs.size();
  result.coverage = static_cast<double>(result.pairs_used) /
                    static_cast<double>(result.pairs_total);
  result.rho = spearman_rho(human, predicted);
  return result;
}

LabeledTextSet load_labeled_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open labeled text file: " + path);

  LabeledTextSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                 ": expected `label<TAB>tokens`");
    }
    std::string label = line.substr(0, tab);
    auto tokens = split_tokens(line.substr(tab + 1));
    if (label.empty() || tokens.empty()) {
      fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                 ": empty label or token list");
    }
    set.labels.push_back(std::move(label));
    set.tokens.push_back(std::move(tokens));
  }
  if (set.labels.empty()) fail(ErrorCode::shape, path + ": no examples");
  return set;
}

Vector sentence_features(const std::vector<std::string>& tokens,
                         const EmbeddingMatrix& emb, bool* all_oov_flag) {
  auto index = vocab_index(emb.vocab);
  return mean_vector(tokens, emb, index, all_oov_flag);
}

LinearClassifier train_linear_classifier(
    const LabeledTextSet& train, const EmbeddingMatrix& emb,
    const std::vector<double>& reg_strengths, const LabeledTextSet& dev) {
  if (reg_strengths.empty()) {
    fail(ErrorCode::config, "need at least one regularization strength");
  }
  std::set<std::string> label_set(train.labels.begin(), train.labels.end());
  if (label_set.size() < 2) {
    fail(ErrorCode::config, "training data has fewer than 2 classes");
  }

  LinearClassifier model;
  model.classes.assign(label_set.begin(), label_set.end());

  Matrix x_train = feature_matrix(train, emb);
  Matrix x_dev = feature_matrix(dev, emb);
  auto y_train = label_indices(train, model.classes);
  auto y_dev = label_indices(dev, model.classes);
  int n_classes = static_cast<int>(model.classes.size());

  double best_acc = -1.0;
  for (double reg : reg_strengths) {
    if (reg < 0.0) fail(ErrorCode::config, "regularization must be >= 0");
    SoftmaxFit fit = fit_softmax(x_train, y_train, n_classes, reg);
    double acc = accuracy_of(x_dev, y_dev, fit.weights, fit.bias);
    if (acc > best_acc) {
      best_acc = acc;
      model.weights = fit.weights;
      model.bias = fit.bias;
      model.chosen_reg = reg;
      model.converged = fit.converged;
    }
  }
  model.dev_accuracy = best_acc;
  model.train_accuracy = accuracy_of(x_train, y_train, model.weights,
                                     model.bias);
  return model;
}

double evaluate_classifier(const LinearClassifier& model,
                           const LabeledTextSet& test,
                           const EmbeddingMatrix& emb) {
  Matrix x = feature_matrix(test, emb);
  auto y = label_indices(test, model.classes);
  return accuracy_of(x, y, model.weights, model.bias);
}

void export_features_csv(const LabeledTextSet& data,
                         const EmbeddingMatrix& emb,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write feature file: " + path);
  out << "label";
  for (Eigen::Index j = 0; j < emb.dim(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  auto index = vocab_index(emb.vocab);
  for (size_t i = 0; i < data.tokens.size(); ++i) {
    out << csv_escape(data.labels[i]);
    Vector f = mean_vector(data.tokens[i], emb, index, nullptr);
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      std::snprintf(buf, sizeof(buf), ",%.17g", f(j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace spine
