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

#include "core/embedding_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/rng.hpp"

namespace spine {

namespace {

std::string to_lower(std::string word) {
  for (char& c : word) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return word;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(std::move(tok));
  return tokens;
}

bool parse_double(const std::string& tok, double* out) {
  try {
    size_t pos = 0;
    *out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool is_count_header(const std::vector<std::string>& tokens) {
  if (tokens.size() != 2) return false;
  for (const auto& tok : tokens) {
    if (tok.empty()) return false;
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
  }
  return true;
}

}  // namespace

std::unordered_map<std::string, Eigen::Index> vocab_index(
    const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, Eigen::Index> index;
  index.reserve(vocab.size());
  for (size_t i = 0; i < vocab.size(); ++i) {
    index.emplace(vocab[i], static_cast<Eigen::Index>(i));
  }
  return index;
}

EmbeddingMatrix load_embeddings(const std::string& path,
                                const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open embedding file: " + path);

  std::vector<std::string> vocab;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> seen_raw;
  Eigen::Index dim = -1;

  std::string line;
  size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (first_data_line && is_count_header(tokens)) {
      first_data_line = false;
      continue;  // `V d` header
    }
    first_data_line = false;

    std::string word = tokens[0];
    if (options.lowercase) word = to_lower(word);

    if (dim < 0) {
      dim = static_cast<Eigen::Index>(tokens.size()) - 1;
      if (dim < 1) {
        fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                   ": no embedding values on first data line");
      }
    } else if (static_cast<Eigen::Index>(tokens.size()) - 1 != dim) {
      fail(ErrorCode::shape,
           path + ":" + std::to_string(line_no) + ": expected " +
               std::to_string(dim) + " values, got " +
               std::to_string(tokens.size() - 1));
    }

    if (options.vocab_filter != nullptr &&
        options.vocab_filter->count(word) == 0) {
      continue;
    }
    if (options.lowercase && !seen_raw.insert(tokens[0]).second) {
      fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                 ": duplicate word '" + tokens[0] + "'");
    }
    if (!seen.insert(word).second) {
      if (!options.lowercase) {
        fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                   ": duplicate word '" + word + "'");
      }
      continue;  // merged by case-folding; first occurrence wins
    }

    std::vector<double> values(static_cast<size_t>(dim));
    for (Eigen::Index j = 0; j < dim; ++j) {
      double v = 0.0;
      if (!parse_double(tokens[static_cast<size_t>(j) + 1], &v)) {
        fail(ErrorCode::shape, path + ":" + std::to_string(line_no) +
                                   ": non-numeric token '" +
                                   tokens[static_cast<size_t>(j) + 1] + "'");
      }
      if (!std::isfinite(v)) {
        fail(ErrorCode::numeric, path + ":" + std::to_string(line_no) +
                                     ": non-finite embedding value");
      }
      values[static_cast<size_t>(j)] = v;
    }
    vocab.push_back(std::move(word));
    rows.push_back(std::move(values));
    if (options.max_words > 0 && vocab.size() >= options.max_words) break;
  }

  if (vocab.empty()) {
    fail(ErrorCode::shape, "no embeddings loaded from " + path);
  }

  EmbeddingMatrix emb;
  emb.vocab = std::move(vocab);
  emb.matrix.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      emb.matrix(static_cast<Eigen::Index>(i), j) =
          rows[i][static_cast<size_t>(j)];
    }
  }
  return emb;
}

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path,
                     int precision) {
  if (emb.vocab.empty()) {
    fail(ErrorCode::shape, "refusing to save empty embedding matrix");
  }
  if (static_cast<Eigen::Index>(emb.vocab.size()) != emb.matrix.rows()) {
    fail(ErrorCode::shape, "vocab size does not match matrix rows");
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write embedding file: " + path);

  char buf[64];
  for (Eigen::Index i = 0; i < emb.matrix.rows(); ++i) {
    out << emb.vocab[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < emb.matrix.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), " %.*g", precision, emb.matrix(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

std::vector<std::string> select_vocabulary(const std::string& freq_list_path,
                                           size_t k, bool lowercase) {
  std::ifstream in(freq_list_path);
  if (!in) fail(ErrorCode::io, "cannot open frequency list: " + freq_list_path);

  struct Entry {
    std::string word;
    double count;
    size_t order;
  };
  std::vector<Entry> entries;
  std::string line;
  size_t line_no = 0;
  bool any_count = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() > 2) {
      fail(ErrorCode::shape, freq_list_path + ":" + std::to_string(line_no) +
                                 ": expected `word [count]`");
    }
    Entry e;
    e.word = lowercase ? to_lower(tokens[0]) : tokens[0];
    e.count = 0.0;
    e.order = entries.size();
    if (tokens.size() == 2) {
      if (!parse_double(tokens[1], &e.count)) {
        fail(ErrorCode::shape, freq_list_path + ":" + std::to_string(line_no) +
                                   ": non-numeric count '" + tokens[1] + "'");
      }
      any_count = true;
    }
    entries.push_back(std::move(e));
  }

  if (any_count) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) {
                       return a.count > b.count;
                     });
  }

  std::vector<std::string> result;
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (result.size() == k) break;
    if (seen.insert(e.word).second) result.push_back(e.word);
  }
  if (result.size() < k) {
    fail(ErrorCode::config, "requested top " + std::to_string(k) +
                                " words but the list has only " +
                                std::to_string(result.size()));
  }
  return result;
}

VocabSplit split_train_dev(const std::vector<std::string>& vocab,
                           size_t n_train, uint64_t seed) {
  if (n_train > vocab.size()) {
    fail(ErrorCode::config,
         "n_train " + std::to_string(n_train) + " exceeds vocabulary size " +
             std::to_string(vocab.size()));
  }
  std::vector<size_t> order(vocab.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  VocabSplit split;
  split.train.reserve(n_train);
  split.dev.reserve(vocab.size() - n_train);
  for (size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.dev).push_back(vocab[order[i]]);
  }
  return split;
}

}  // namespace spine
