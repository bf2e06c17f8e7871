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

#include "spine/spine.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/coherence.hpp"
#include "core/csv.hpp"
#include "core/embedding_io.hpp"
#include "core/eval.hpp"
#include "core/intrusion.hpp"
#include "core/rng.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

struct spine_strings {
  std::vector<std::string> words;
};

struct spine_embeddings {
  spine::EmbeddingMatrix emb;
};

struct spine_model {
  spine::Checkpoint ckpt;
  std::optional<spine::TrainingMetrics> metrics;  // fresh runs only
};

struct spine_cooccurrence {
  spine::CooccurrenceCounts counts;
};

namespace {

thread_local std::string g_last_error;

spine_status to_status(spine::ErrorCode code) {
  switch (code) {
    case spine::ErrorCode::io:
      return SPINE_ERR_IO;
    case spine::ErrorCode::shape:
      return SPINE_ERR_SHAPE;
    case spine::ErrorCode::numeric:
      return SPINE_ERR_NUMERIC;
    case spine::ErrorCode::config:
      return SPINE_ERR_CONFIG;
    case spine::ErrorCode::generic:
      break;
  }
  return SPINE_ERR;
}

template <typename Fn>
spine_status wrap(Fn&& fn) {
  try {
    fn();
    return SPINE_OK;
  } catch (const spine::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPINE_ERR;
  } catch (...) {
    g_last_error = "unknown error";
    return SPINE_ERR;
  }
}

spine_status arg_error(const char* message) {
  g_last_error = message;
  return SPINE_ERR_CONFIG;
}

void require(bool condition, const char* message) {
  if (!condition) spine::fail(spine::ErrorCode::config, message);
}

spine::Hyperparams hyper_from_options(const spine_train_options& o) {
  spine::Hyperparams h;
  h.rho_star = o.rho_star;
  h.hidden = static_cast<int>(o.hidden);
  h.sigma = o.sigma;
  h.lambda1 = o.lambda1;
  h.lambda2 = o.lambda2;
  h.mode = o.use_l1 ? spine::SparsityMode::l1 : spine::SparsityMode::asl_psl;
  h.l1_coeff = o.l1_coeff;
  return h;
}

spine::TrainConfig cfg_from_options(const spine_train_options& o) {
  spine::TrainConfig c;
  c.epochs = static_cast<int>(o.epochs);
  c.batch_size = static_cast<int>(o.batch_size);
  c.learning_rate = o.learning_rate;
  c.seed = o.seed;
  c.optimizer =
      o.optimizer == 1 ? spine::OptimizerKind::sgd : spine::OptimizerKind::adam;
  c.sgd_momentum = o.sgd_momentum;
  c.deterministic = o.deterministic != 0;
  c.noise_mode = o.noise_fixed_per_example != 0
                     ? spine::NoiseMode::fixed_per_example
                     : spine::NoiseMode::per_batch;
  return c;
}

spine::SparseEmbeddings as_sparse(const spine::EmbeddingMatrix& emb) {
  if ((emb.matrix.array() < 0.0).any() || (emb.matrix.array() > 1.0).any()) {
    spine::fail(spine::ErrorCode::shape,
                "embeddings are not sparse activations: values outside [0,1]");
  }
  spine::SparseEmbeddings sparse;
  sparse.vocab = emb.vocab;
  sparse.z = emb.matrix;
  return sparse;
}

}  // namespace

extern "C" {

const char* spine_version(void) { return "1.0.0"; }

const char* spine_last_error(void) { return g_last_error.c_str(); }

/* ---------------------------------------------------------------- */

spine_status spine_strings_create(const char* const* words, size_t count,
                                  spine_strings** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (words == nullptr && count > 0) return arg_error("words is NULL");
  return wrap([&] {
    auto list = std::make_unique<spine_strings>();
    list->words.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(words[i] != nullptr, "NULL word");
      list->words.emplace_back(words[i]);
    }
    *out = list.release();
  });
}

size_t spine_strings_size(const spine_strings* list) {
  return list == nullptr ? 0 : list->words.size();
}

const char* spine_strings_get(const spine_strings* list, size_t index) {
  if (list == nullptr || index >= list->words.size()) return nullptr;
  return list->words[index].c_str();
}

void spine_strings_free(spine_strings* list) { delete list; }

spine_status spine_select_vocabulary(const char* freq_list_path, size_t k,
                                     int lowercase, spine_strings** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (freq_list_path == nullptr) return arg_error("freq_list_path is NULL");
  return wrap([&] {
    auto list = std::make_unique<spine_strings>();
    list->words = spine::select_vocabulary(freq_list_path, k, lowercase != 0);
    *out = list.release();
  });
}

/* ---------------------------------------------------------------- */

spine_status spine_embeddings_load(const char* path, size_t max_words,
                                   const spine_strings* filter, int lowercase,
                                   spine_embeddings** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (path == nullptr) return arg_error("path is NULL");
  return wrap([&] {
    spine::LoadOptions options;
    options.max_words = max_words;
    options.lowercase = lowercase != 0;
    std::unordered_set<std::string> filter_set;
    if (filter != nullptr) {
      for (std::string w : filter->words) {
        if (options.lowercase) {
          for (char& c : w) {
            c = static_cast<char>(
                std::tolower(static_cast<unsigned char>(c)));
          }
        }
        filter_set.insert(std::move(w));
      }
      options.vocab_filter = &filter_set;
    }
    auto handle = std::make_unique<spine_embeddings>();
    handle->emb = spine::load_embeddings(path, options);
    *out = handle.release();
  });
}

spine_status spine_embeddings_save(const spine_embeddings* emb,
                                   const char* path, int precision) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (path == nullptr) return arg_error("path is NULL");
  return wrap([&] { spine::save_embeddings(emb->emb, path, precision); });
}

size_t spine_embeddings_rows(const spine_embeddings* emb) {
  return emb == nullptr ? 0 : static_cast<size_t>(emb->emb.rows());
}

size_t spine_embeddings_dim(const spine_embeddings* emb) {
  return emb == nullptr ? 0 : static_cast<size_t>(emb->emb.dim());
}

const char* spine_embeddings_word(const spine_embeddings* emb, size_t row) {
  if (emb == nullptr || row >= emb->emb.vocab.size()) return nullptr;
  return emb->emb.vocab[row].c_str();
}

spine_status spine_embeddings_get_row(const spine_embeddings* emb, size_t row,
                                      double* buffer, size_t buffer_len) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (buffer == nullptr) return arg_error("buffer is NULL");
  return wrap([&] {
    require(row < static_cast<size_t>(emb->emb.rows()), "row out of range");
    require(buffer_len >= static_cast<size_t>(emb->emb.dim()),
            "buffer too small");
    for (Eigen::Index j = 0; j < emb->emb.dim(); ++j) {
      buffer[j] = emb->emb.matrix(static_cast<Eigen::Index>(row), j);
    }
  });
}

spine_status spine_embeddings_sparsity(const spine_embeddings* emb,
                                       double epsilon, double* fraction,
                                       double* mean_active) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  return wrap([&] {
    if (fraction != nullptr) {
      *fraction = spine::sparsity_fraction(emb->emb.matrix, epsilon);
    }
    if (mean_active != nullptr) {
      *mean_active = spine::mean_active_per_word(emb->emb.matrix, epsilon);
    }
  });
}

void spine_embeddings_free(spine_embeddings* emb) { delete emb; }

/* ---------------------------------------------------------------- */

void spine_train_options_init(spine_train_options* options) {
  if (options == nullptr) return;
  std::memset(options, 0, sizeof(*options));
  options->rho_star = 0.15;
  options->hidden = 1000;
  options->sigma = 0.4;
  options->lambda1 = 1.0;
  options->lambda2 = 1.0;
  options->use_l1 = 0;
  options->l1_coeff = 1.0;
  options->epochs = 4000;
  options->batch_size = 64;
  options->learning_rate = 1e-3;
  options->optimizer = 0;
  options->sgd_momentum = 0.0;
  options->n_train = 0;
  options->seed = 42;
  options->deterministic = 1;
  options->noise_fixed_per_example = 0;
}

spine_status spine_train(const spine_embeddings* emb,
                         const spine_train_options* options,
                         spine_model** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (options == nullptr) return arg_error("options is NULL");
  return wrap([&] {
    size_t vocab_size = emb->emb.vocab.size();
    size_t n_train = options->n_train == 0 ? vocab_size : options->n_train;
    require(n_train <= vocab_size, "n_train exceeds vocabulary size");

    spine::VocabSplit split = spine::split_train_dev(
        emb->emb.vocab, n_train, spine::derive_seed(options->seed, "split"));

    auto handle = std::make_unique<spine_model>();
    spine::TrainResult result = spine::train(
        emb->emb, split, hyper_from_options(*options),
        cfg_from_options(*options));

    handle->ckpt.params = std::move(result.params);
    handle->ckpt.opt_state = std::move(result.opt_state);
    handle->ckpt.rng_state = std::move(result.rng_state);
    handle->ckpt.hyper = hyper_from_options(*options);
    handle->ckpt.train_cfg = cfg_from_options(*options);
    handle->metrics = std::move(result.metrics);
    *out = handle.release();
  });
}

spine_status spine_model_save(const spine_model* model, const char* path) {
  if (model == nullptr) return arg_error("model handle is NULL");
  if (path == nullptr) return arg_error("path is NULL");
  return wrap([&] { spine::save_checkpoint(model->ckpt, path); });
}

spine_status spine_model_load(const char* path, spine_model** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (path == nullptr) return arg_error("path is NULL");
  return wrap([&] {
    auto handle = std::make_unique<spine_model>();
    handle->ckpt = spine::load_checkpoint(path);
    *out = handle.release();
  });
}

spine_status spine_model_transform(const spine_model* model,
                                   const spine_embeddings* emb,
                                   spine_embeddings** out_sparse) {
  if (model == nullptr) return arg_error("model handle is NULL");
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (out_sparse == nullptr) return arg_error("out is NULL");
  return wrap([&] {
    spine::SparseEmbeddings sparse =
        spine::transform(emb->emb, model->ckpt.params);
    auto handle = std::make_unique<spine_embeddings>();
    handle->emb.vocab = std::move(sparse.vocab);
    handle->emb.matrix = std::move(sparse.z);
    *out_sparse = handle.release();
  });
}

spine_status spine_model_metrics_csv(const spine_model* model,
                                     const char* path) {
  if (model == nullptr) return arg_error("model handle is NULL");
  if (path == nullptr) return arg_error("path is NULL");
  return wrap([&] {
    require(model->metrics.has_value(),
            "no metrics: model was loaded from a checkpoint");
    spine::write_metrics_csv(*model->metrics, path);
  });
}

spine_status spine_model_final_metrics(const spine_model* model, double* rl,
                                       double* asl, double* psl,
                                       double* total, double* dev_rl) {
  if (model == nullptr) return arg_error("model handle is NULL");
  return wrap([&] {
    require(model->metrics.has_value() && !model->metrics->epochs.empty(),
            "no metrics available");
    const spine::EpochMetrics& m = model->metrics->epochs.back();
    if (rl != nullptr) *rl = m.rl;
    if (asl != nullptr) *asl = m.asl;
    if (psl != nullptr) *psl = m.psl;
    if (total != nullptr) *total = m.total;
    if (dev_rl != nullptr) *dev_rl = m.dev_rl;
  });
}

size_t spine_model_input_dim(const spine_model* model) {
  return model == nullptr
             ? 0
             : static_cast<size_t>(model->ckpt.params.input_dim());
}

size_t spine_model_hidden_dim(const spine_model* model) {
  return model == nullptr
             ? 0
             : static_cast<size_t>(model->ckpt.params.hidden_dim());
}

void spine_model_free(spine_model* model) { delete model; }

/* ---------------------------------------------------------------- */

spine_status spine_cooccurrence_build(const char* corpus_path, int window,
                                      const spine_strings* vocab,
                                      spine_cooccurrence** out) {
  if (out == nullptr) return arg_error("out is NULL");
  if (corpus_path == nullptr) return arg_error("corpus_path is NULL");
  if (vocab == nullptr) return arg_error("vocab is NULL");
  return wrap([&] {
    std::unordered_set<std::string> vocab_set(vocab->words.begin(),
                                              vocab->words.end());
    auto handle = std::make_unique<spine_cooccurrence>();
    handle->counts = spine::build_cooccurrence(corpus_path, window, vocab_set);
    *out = handle.release();
  });
}

void spine_cooccurrence_free(spine_cooccurrence* counts) { delete counts; }

spine_status spine_coherence(const spine_embeddings* sparse,
                             const spine_cooccurrence* counts, int n_top,
                             double smoothing, const char* report_csv,
                             double* aggregate, size_t* n_scored,
                             size_t* n_skipped) {
  if (sparse == nullptr) return arg_error("embeddings handle is NULL");
  if (counts == nullptr) return arg_error("counts handle is NULL");
  return wrap([&] {
    spine::CoherenceReport report = spine::model_coherence(
        as_sparse(sparse->emb), counts->counts, n_top, smoothing);
    if (report_csv != nullptr) {
      spine::write_coherence_csv(report, report_csv);
    }
    if (aggregate != nullptr) {
      *aggregate = report.aggregate.value_or(
          std::numeric_limits<double>::quiet_NaN());
    }
    if (n_scored != nullptr) *n_scored = report.scores.size();
    if (n_skipped != nullptr) *n_skipped = report.skipped_dimensions.size();
  });
}

/* ---------------------------------------------------------------- */

spine_status spine_intrusion_generate(const spine_embeddings* sparse,
                                      size_t n_dims, unsigned long long seed,
                                      const char* questions_csv,
                                      const char* sheet_csv,
                                      size_t* n_questions, size_t* n_skipped) {
  if (sparse == nullptr) return arg_error("embeddings handle is NULL");
  if (questions_csv == nullptr) return arg_error("questions_csv is NULL");
  return wrap([&] {
    spine::Rng rng = spine::Rng::substream(seed, "intrusion");
    spine::QuestionSet set = spine::generate_questions(
        as_sparse(sparse->emb), static_cast<int>(n_dims), rng);
    spine::save_questions_csv(set.questions, questions_csv, true);
    if (sheet_csv != nullptr) {
      spine::save_questions_csv(set.questions, sheet_csv, false);
    }
    if (n_questions != nullptr) *n_questions = set.questions.size();
    if (n_skipped != nullptr) *n_skipped = set.skipped_dimensions.size();
  });
}

spine_status spine_intrusion_score(const char* questions_csv,
                                   const char* annotations_csv,
                                   unsigned long long seed,
                                   const char* report_path, double* precision,
                                   double* agree2plus, double* agree3) {
  if (questions_csv == nullptr) return arg_error("questions_csv is NULL");
  if (annotations_csv == nullptr) return arg_error("annotations_csv is NULL");
  return wrap([&] {
    auto questions = spine::load_questions_csv(questions_csv);
    auto annotations = spine::load_annotations_csv(annotations_csv);
    spine::Rng rng = spine::Rng::substream(seed, "intrusion-ties");
    spine::IntrusionScore score =
        spine::score_annotations(questions, annotations, rng);
    if (report_path != nullptr) {
      std::ofstream out(report_path);
      if (!out) {
        spine::fail(spine::ErrorCode::io, "cannot write score report");
      }
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "questions scored: %d\nprecision: %.6f\n"
                    "agree2plus: %.6f\nagree3: %.6f\n",
                    score.n_questions, score.precision, score.agree2plus,
                    score.agree3);
      out << buf;
      if (score.single_annotator) {
        out << "note: single-annotator panel, agreement is trivial\n";
      }
      out << "\nprecision,agree2plus,agree3\n";
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", score.precision,
                    score.agree2plus, score.agree3);
      out << buf;
    }
    if (precision != nullptr) *precision = score.precision;
    if (agree2plus != nullptr) *agree2plus = score.agree2plus;
    if (agree3 != nullptr) *agree3 = score.agree3;
  });
}

/* ---------------------------------------------------------------- */

spine_status spine_report_dimensions(const spine_embeddings* sparse,
                                     const spine_strings* words,
                                     size_t dims_per_word,
                                     size_t words_per_dim, char** out_text) {
  if (sparse == nullptr) return arg_error("embeddings handle is NULL");
  if (words == nullptr) return arg_error("words is NULL");
  if (out_text == nullptr) return arg_error("out_text is NULL");
  return wrap([&] {
    require(dims_per_word >= 1 && words_per_dim >= 1,
            "dims_per_word and words_per_dim must be >= 1");
    spine::SparseEmbeddings z = as_sparse(sparse->emb);
    auto index = spine::vocab_index(z.vocab);

    std::ostringstream out;
    char buf[64];
    for (const auto& word : words->words) {
      auto it = index.find(word);
      if (it == index.end()) {
        out << word << ": not in vocabulary\n";
        continue;
      }
      Eigen::Index row = it->second;
      std::vector<int> dims(static_cast<size_t>(z.z.cols()));
      std::iota(dims.begin(), dims.end(), 0);
      std::stable_sort(dims.begin(), dims.end(), [&](int a, int b) {
        return z.z(row, a) > z.z(row, b);
      });

      out << word << ":\n";
      bool any = false;
      for (size_t k = 0; k < dims.size() && k < dims_per_word; ++k) {
        int dim = dims[k];
        double activation = z.z(row, dim);
        if (activation <= 0.0) break;
        any = true;
        std::snprintf(buf, sizeof(buf), "%.4f", activation);
        out << "  dim " << dim << " (activation " << buf << "):";
        for (const auto& top : spine::top_words(
                 z, dim, static_cast<int>(std::min(
                             words_per_dim,
                             static_cast<size_t>(z.z.rows()))))) {
          out << ' ' << top;
        }
        out << '\n';
      }
      if (!any) out << "  no active dimensions\n";
    }
    const std::string text = out.str();
    char* result = static_cast<char*>(std::malloc(text.size() + 1));
    require(result != nullptr, "out of memory");
    std::memcpy(result, text.c_str(), text.size() + 1);
    *out_text = result;
  });
}

void spine_string_free(char* text) { std::free(text); }

/* ---------------------------------------------------------------- */

spine_status spine_eval_similarity(const spine_embeddings* emb,
                                   const char* pairs_tsv, double* rho,
                                   double* coverage, size_t* pairs_used,
                                   size_t* pairs_total) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (pairs_tsv == nullptr) return arg_error("pairs_tsv is NULL");
  return wrap([&] {
    auto pairs = spine::load_word_pairs(pairs_tsv);
    spine::SimilarityResult result =
        spine::word_similarity_eval(emb->emb, pairs);
    if (rho != nullptr) *rho = result.rho;
    if (coverage != nullptr) *coverage = result.coverage;
    if (pairs_used != nullptr) *pairs_used = result.pairs_used;
    if (pairs_total != nullptr) *pairs_total = result.pairs_total;
  });
}

spine_status spine_eval_classifier(const spine_embeddings* emb,
                                   const char* train_tsv, const char* dev_tsv,
                                   const char* test_tsv, const double* regs,
                                   size_t n_regs, double* test_accuracy,
                                   double* dev_accuracy, double* chosen_reg,
                                   int* converged) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (train_tsv == nullptr || dev_tsv == nullptr || test_tsv == nullptr) {
    return arg_error("train/dev/test path is NULL");
  }
  if (regs == nullptr || n_regs == 0) {
    return arg_error("need at least one regularization strength");
  }
  if (test_accuracy == nullptr) return arg_error("test_accuracy is NULL");
  return wrap([&] {
    auto train_set = spine::load_labeled_text(train_tsv);
    auto dev_set = spine::load_labeled_text(dev_tsv);
    auto test_set = spine::load_labeled_text(test_tsv);
    std::vector<double> reg_list(regs, regs + n_regs);
    spine::LinearClassifier model = spine::train_linear_classifier(
        train_set, emb->emb, reg_list, dev_set);
    *test_accuracy = spine::evaluate_classifier(model, test_set, emb->emb);
    if (dev_accuracy != nullptr) *dev_accuracy = model.dev_accuracy;
    if (chosen_reg != nullptr) *chosen_reg = model.chosen_reg;
    if (converged != nullptr) *converged = model.converged ? 1 : 0;
  });
}

spine_status spine_export_features(const spine_embeddings* emb,
                                   const char* labeled_tsv,
                                   const char* out_csv) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (labeled_tsv == nullptr || out_csv == nullptr) {
    return arg_error("path is NULL");
  }
  return wrap([&] {
    auto data = spine::load_labeled_text(labeled_tsv);
    spine::export_features_csv(data, emb->emb, out_csv);
  });
}

/* ---------------------------------------------------------------- */

void spine_grid_options_init(spine_grid_options* options) {
  if (options == nullptr) return;
  std::memset(options, 0, sizeof(*options));
  options->rl_cap = 1.0;
  options->epochs_fraction = 0.25;
  options->coherence_top = 5;
  options->coherence_smoothing = 1.0;
  options->threads = 1;
}

spine_status spine_grid_search(const spine_embeddings* emb,
                               const spine_train_options* base,
                               const spine_grid_options* grid,
                               const spine_cooccurrence* counts,
                               const char* results_csv, size_t* n_cells,
                               size_t* n_admitted) {
  if (emb == nullptr) return arg_error("embeddings handle is NULL");
  if (base == nullptr) return arg_error("base options is NULL");
  if (grid == nullptr) return arg_error("grid options is NULL");
  if (counts == nullptr) return arg_error("counts handle is NULL");
  if (results_csv == nullptr) return arg_error("results_csv is NULL");
  return wrap([&] {
    auto copy_doubles = [](const double* p, size_t n) {
      require(p != nullptr || n == 0, "NULL candidate list");
      return std::vector<double>(p, p + n);
    };
    spine::GridSearchSpec spec;
    spec.rho_star_values = copy_doubles(grid->rho_star_values,
                                        grid->n_rho_star);
    spec.sigma_values = copy_doubles(grid->sigma_values, grid->n_sigma);
    spec.lambda1_values = copy_doubles(grid->lambda1_values, grid->n_lambda1);
    spec.lambda2_values = copy_doubles(grid->lambda2_values, grid->n_lambda2);
    require(grid->hidden_values != nullptr || grid->n_hidden == 0,
            "NULL candidate list");
    for (size_t i = 0; i < grid->n_hidden; ++i) {
      spec.hidden_values.push_back(static_cast<int>(grid->hidden_values[i]));
    }
    spec.rl_cap = grid->rl_cap;
    spec.epochs_fraction = grid->epochs_fraction;

    size_t vocab_size = emb->emb.vocab.size();
    size_t n_train = base->n_train == 0 ? vocab_size : base->n_train;
    require(n_train <= vocab_size, "n_train exceeds vocabulary size");
    spine::VocabSplit split = spine::split_train_dev(
        emb->emb.vocab, n_train, spine::derive_seed(base->seed, "split"));

    int n_top = grid->coherence_top;
    double smoothing = grid->coherence_smoothing;
    const spine::CooccurrenceCounts& count_ref = counts->counts;
    spine::CoherenceScorer scorer =
        [&count_ref, n_top, smoothing](const spine::SparseEmbeddings& sparse) {
          spine::CoherenceReport report =
              spine::model_coherence(sparse, count_ref, n_top, smoothing);
          return report.aggregate.value_or(
              -std::numeric_limits<double>::infinity());
        };

    auto results =
        spine::grid_search(emb->emb, split, spec, cfg_from_options(*base),
                           scorer, grid->threads);

    std::ofstream out(results_csv);
    if (!out) {
      spine::fail(spine::ErrorCode::io,
                  std::string("cannot write grid results: ") + results_csv);
    }
    out << "rank,rho_star,hidden,sigma,lambda1,lambda2,dev_rl,coherence,"
           "admitted\n";
    char buf[512];
    size_t admitted = 0;
    for (size_t i = 0; i < results.size(); ++i) {
      const auto& cell = results[i];
      if (cell.admitted) ++admitted;
      std::snprintf(buf, sizeof(buf),
                    "%zu,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i,
                    cell.hyper.rho_star, cell.hyper.hidden, cell.hyper.sigma,
                    cell.hyper.lambda1, cell.hyper.lambda2, cell.dev_rl,
                    cell.coherence, cell.admitted ? 1 : 0);
      out << buf;
    }
    if (n_cells != nullptr) *n_cells = results.size();
    if (n_admitted != nullptr) *n_admitted = admitted;
  });
}

}  // extern "C"
