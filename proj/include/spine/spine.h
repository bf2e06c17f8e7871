/* Copyright 2026 The SPINE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Shared-library C interface to the SPINE toolkit: training of the sparse
 * interpretable autoencoder over pretrained word embeddings, the sparse
 * transform, topic-coherence scoring, word-intrusion test generation and
 * scoring, and the downstream word-similarity / text-classification
 * benchmarks.
 *
 * Every object is an opaque handle owned by the library and released with
 * the matching *_free function. Functions return SPINE_OK (0) on success
 * or a nonzero status; spine_last_error() describes the most recent
 * failure on the calling thread.
 */

#ifndef SPINE_SPINE_H
#define SPINE_SPINE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spine_status {
  SPINE_OK = 0,
  SPINE_ERR = 1,         /* unclassified failure */
  SPINE_ERR_IO = 2,      /* missing/unreadable/unwritable file */
  SPINE_ERR_SHAPE = 3,   /* dimension or format mismatch */
  SPINE_ERR_NUMERIC = 4, /* non-finite value (e.g. diverged training) */
  SPINE_ERR_CONFIG = 5,  /* invalid configuration or argument */
} spine_status;

const char* spine_version(void);

/* Message for the calling thread's most recent error. Never NULL. */
const char* spine_last_error(void);

/* ---------------------------------------------------------------- */
/* Word lists                                                        */

typedef struct spine_strings spine_strings;

spine_status spine_strings_create(const char* const* words, size_t count,
                                  spine_strings** out);
size_t spine_strings_size(const spine_strings* list);
/* NULL when the index is out of range. */
const char* spine_strings_get(const spine_strings* list, size_t index);
void spine_strings_free(spine_strings* list);

/* Top-k words of a frequency list (`word` or `word count` per line). */
spine_status spine_select_vocabulary(const char* freq_list_path, size_t k,
                                     int lowercase, spine_strings** out);

/* ---------------------------------------------------------------- */
/* Embeddings (dense inputs and sparse outputs share the format)     */

typedef struct spine_embeddings spine_embeddings;

/* Loads `word v1 ... vd` lines; an optional `V d` first line is skipped.
 * max_words 0 means no limit; filter may be NULL. */
spine_status spine_embeddings_load(const char* path, size_t max_words,
                                   const spine_strings* filter, int lowercase,
                                   spine_embeddings** out);
spine_status spine_embeddings_save(const spine_embeddings* emb,
                                   const char* path, int precision);
size_t spine_embeddings_rows(const spine_embeddings* emb);
size_t spine_embeddings_dim(const spine_embeddings* emb);
const char* spine_embeddings_word(const spine_embeddings* emb, size_t row);
spine_status spine_embeddings_get_row(const spine_embeddings* emb, size_t row,
                                      double* buffer, size_t buffer_len);
/* Fraction of entries <= epsilon, and mean count per row above epsilon. */
spine_status spine_embeddings_sparsity(const spine_embeddings* emb,
                                       double epsilon, double* fraction,
                                       double* mean_active);
void spine_embeddings_free(spine_embeddings* emb);

/* ---------------------------------------------------------------- */
/* Training                                                          */

typedef struct spine_train_options {
  /* loss */
  double rho_star;   /* target mean activation per hidden unit */
  size_t hidden;     /* hidden layer width m */
  double sigma;      /* input corruption noise stddev */
  double lambda1;    /* average sparsity loss weight */
  double lambda2;    /* partial sparsity loss weight */
  int use_l1;        /* nonzero: replace ASL+PSL with an l1 penalty */
  double l1_coeff;
  /* optimization */
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  int optimizer; /* 0 = adam, 1 = sgd */
  double sgd_momentum;
  /* data and reproducibility */
  size_t n_train;              /* 0: train on all rows, empty dev split */
  unsigned long long seed;     /* master seed for all sub-streams */
  int deterministic;           /* fixed reduction order */
  int noise_fixed_per_example; /* nonzero: corrupt once, reuse */
} spine_train_options;

void spine_train_options_init(spine_train_options* options);

typedef struct spine_model spine_model;

spine_status spine_train(const spine_embeddings* emb,
                         const spine_train_options* options,
                         spine_model** out);
/* Binary checkpoint plus a `path.json` sidecar. */
spine_status spine_model_save(const spine_model* model, const char* path);
spine_status spine_model_load(const char* path, spine_model** out);
spine_status spine_model_transform(const spine_model* model,
                                   const spine_embeddings* emb,
                                   spine_embeddings** out_sparse);
/* Per-epoch `epoch,rl,asl,psl,total,dev_rl,sparsity_fraction,
 * mean_active_per_word` rows. Only available on freshly trained models. */
spine_status spine_model_metrics_csv(const spine_model* model,
                                     const char* path);
spine_status spine_model_final_metrics(const spine_model* model, double* rl,
                                       double* asl, double* psl,
                                       double* total, double* dev_rl);
size_t spine_model_input_dim(const spine_model* model);
size_t spine_model_hidden_dim(const spine_model* model);
void spine_model_free(spine_model* model);

/* ---------------------------------------------------------------- */
/* Topic coherence                                                   */

typedef struct spine_cooccurrence spine_cooccurrence;

/* Sliding-window counts over a tokenized corpus (one document per line). */
spine_status spine_cooccurrence_build(const char* corpus_path, int window,
                                      const spine_strings* vocab,
                                      spine_cooccurrence** out);
void spine_cooccurrence_free(spine_cooccurrence* counts);

/* Scores every dimension by the mean pairwise NPMI of its n_top words.
 * report_csv may be NULL. aggregate is NaN when no dimension was scored;
 * n_scored/n_skipped may be NULL. */
spine_status spine_coherence(const spine_embeddings* sparse,
                             const spine_cooccurrence* counts, int n_top,
                             double smoothing, const char* report_csv,
                             double* aggregate, size_t* n_scored,
                             size_t* n_skipped);

/* ---------------------------------------------------------------- */
/* Word intrusion test                                               */

/* Writes `question_id,dimension,word1..word5,answer_index` rows to
 * questions_csv and, when sheet_csv is non-NULL, an annotator-facing copy
 * without the answer column. */
spine_status spine_intrusion_generate(const spine_embeddings* sparse,
                                      size_t n_dims, unsigned long long seed,
                                      const char* questions_csv,
                                      const char* sheet_csv,
                                      size_t* n_questions, size_t* n_skipped);

/* Majority-vote scoring of `question_id,annotator_id,choice_index` rows
 * against the generated questions. report_path may be NULL. */
spine_status spine_intrusion_score(const char* questions_csv,
                                   const char* annotations_csv,
                                   unsigned long long seed,
                                   const char* report_path, double* precision,
                                   double* agree2plus, double* agree3);

/* ---------------------------------------------------------------- */
/* Reports                                                           */

/* For each query word: its most active dimensions and each dimension's
 * most active words. The returned text is released with
 * spine_string_free. */
spine_status spine_report_dimensions(const spine_embeddings* sparse,
                                     const spine_strings* words,
                                     size_t dims_per_word,
                                     size_t words_per_dim, char** out_text);
void spine_string_free(char* text);

/* ---------------------------------------------------------------- */
/* Downstream benchmarks                                             */

/* Spearman correlation between human scores and cosine similarities over
 * `word1<TAB>word2<TAB>score` pairs with both words in vocabulary. */
spine_status spine_eval_similarity(const spine_embeddings* emb,
                                   const char* pairs_tsv, double* rho,
                                   double* coverage, size_t* pairs_used,
                                   size_t* pairs_total);

/* Softmax regression over averaged word vectors; files hold
 * `label<TAB>tokens` lines. Regularization picked by dev accuracy.
 * dev_accuracy/chosen_reg/converged may be NULL. */
spine_status spine_eval_classifier(const spine_embeddings* emb,
                                   const char* train_tsv, const char* dev_tsv,
                                   const char* test_tsv, const double* regs,
                                   size_t n_regs, double* test_accuracy,
                                   double* dev_accuracy, double* chosen_reg,
                                   int* converged);

/* Feature-matrix export for external toolkits. */
spine_status spine_export_features(const spine_embeddings* emb,
                                   const char* labeled_tsv,
                                   const char* out_csv);

/* ---------------------------------------------------------------- */
/* Hyperparameter grid search                                        */

typedef struct spine_grid_options {
  const double* rho_star_values;
  size_t n_rho_star;
  const size_t* hidden_values;
  size_t n_hidden;
  const double* sigma_values;
  size_t n_sigma;
  const double* lambda1_values;
  size_t n_lambda1;
  const double* lambda2_values;
  size_t n_lambda2;
  double rl_cap;          /* max permissible dev reconstruction loss */
  double epochs_fraction; /* training budget per cell */
  int coherence_top;      /* words per dimension for the scorer */
  double coherence_smoothing;
  int threads; /* <= 1: sequential */
} spine_grid_options;

void spine_grid_options_init(spine_grid_options* options);

/* Trains one model per cell, drops cells above the reconstruction cap,
 * ranks survivors by coherence, and writes every cell with its admission
 * status to results_csv. n_cells/n_admitted may be NULL. */
spine_status spine_grid_search(const spine_embeddings* emb,
                               const spine_train_options* base,
                               const spine_grid_options* grid,
                               const spine_cooccurrence* counts,
                               const char* results_csv, size_t* n_cells,
                               size_t* n_admitted);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPINE_SPINE_H */
