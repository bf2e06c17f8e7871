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

// Command-line front end. Talks to the core exclusively through the
// shared-library C API in spine/spine.h.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spine/spine.h"

namespace {

struct StringsDeleter {
  void operator()(spine_strings* p) const { spine_strings_free(p); }
};
struct EmbeddingsDeleter {
  void operator()(spine_embeddings* p) const { spine_embeddings_free(p); }
};
struct ModelDeleter {
  void operator()(spine_model* p) const { spine_model_free(p); }
};
struct CountsDeleter {
  void operator()(spine_cooccurrence* p) const { spine_cooccurrence_free(p); }
};

using StringsPtr = std::unique_ptr<spine_strings, StringsDeleter>;
using EmbeddingsPtr = std::unique_ptr<spine_embeddings, EmbeddingsDeleter>;
using ModelPtr = std::unique_ptr<spine_model, ModelDeleter>;
using CountsPtr = std::unique_ptr<spine_cooccurrence, CountsDeleter>;

/// Nonzero statuses abort the subcommand with the library's message; the
/// status value is the process exit code.
class StatusError : public std::runtime_error {
 public:
  explicit StatusError(spine_status status)
      : std::runtime_error(spine_last_error()), status_(status) {}
  int exit_code() const { return static_cast<int>(status_); }

 private:
  spine_status status_;
};

void check(spine_status status) {
  if (status != SPINE_OK) throw StatusError(status);
}

StringsPtr make_strings(const std::vector<std::string>& words) {
  std::vector<const char*> raw;
  raw.reserve(words.size());
  for (const auto& w : words) raw.push_back(w.c_str());
  spine_strings* out = nullptr;
  check(spine_strings_create(raw.data(), raw.size(), &out));
  return StringsPtr(out);
}

StringsPtr vocab_of(const spine_embeddings* emb) {
  std::vector<std::string> words;
  size_t rows = spine_embeddings_rows(emb);
  words.reserve(rows);
  for (size_t i = 0; i < rows; ++i) {
    words.emplace_back(spine_embeddings_word(emb, i));
  }
  return make_strings(words);
}

void write_config_echo(const CLI::App& app, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "warning: cannot write config echo to " << path << "\n";
    return;
  }
  out << app.config_to_str(true, true);
}

std::string default_echo_path(const std::string& primary_output,
                              const std::string& command) {
  if (!primary_output.empty()) return primary_output + ".config";
  return "spine-" + command + ".config";
}

/// Options shared by the subcommands that load an input embedding file.
struct InputOptions {
  std::string input;
  std::size_t max_words = 0;
  std::string vocab_file;
  std::size_t vocab_top_k = 0;
  bool lowercase = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input, "embedding text file")->required();
    cmd->add_option("--max-words", max_words,
                    "keep only the first N words (0 = all)");
    cmd->add_option("--vocab-file", vocab_file,
                    "frequency list used to pick the vocabulary");
    cmd->add_option("--vocab-top-k", vocab_top_k,
                    "keep the top-k most frequent words of --vocab-file");
    cmd->add_flag("--lowercase", lowercase, "case-fold words");
  }

  EmbeddingsPtr load() const {
    StringsPtr filter;
    if (!vocab_file.empty()) {
      if (vocab_top_k == 0) {
        std::cerr << "error: --vocab-file requires --vocab-top-k\n";
        throw StatusError(SPINE_ERR_CONFIG);
      }
      spine_strings* out = nullptr;
      check(spine_select_vocabulary(vocab_file.c_str(), vocab_top_k,
                                    lowercase ? 1 : 0, &out));
      filter.reset(out);
    }
    spine_embeddings* out = nullptr;
    check(spine_embeddings_load(input.c_str(), max_words, filter.get(),
                                lowercase ? 1 : 0, &out));
    return EmbeddingsPtr(out);
  }
};

EmbeddingsPtr load_plain(const std::string& path) {
  spine_embeddings* out = nullptr;
  check(spine_embeddings_load(path.c_str(), 0, nullptr, 0, &out));
  return EmbeddingsPtr(out);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"SPINE: sparse interpretable embeddings toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "flat key=value config file");

  // ---- train ----------------------------------------------------
  auto* train = app.add_subcommand(
      "train", "train the sparse autoencoder and emit sparse embeddings");
  InputOptions train_input;
  train_input.attach(train);
  spine_train_options topts;
  spine_train_options_init(&topts);
  std::string train_output = "spine_embeddings.txt";
  std::string train_checkpoint, train_metrics, train_echo;
  int save_precision = 6;
  bool use_l1 = false, use_sgd = false, noise_fixed = false;
  train->add_option("--output", train_output, "sparse embedding output file");
  train->add_option("--checkpoint", train_checkpoint,
                    "checkpoint path (default <output>.ckpt)");
  train->add_option("--metrics", train_metrics,
                    "metrics CSV path (default <output>.metrics.csv)");
  train->add_option("--hidden", topts.hidden, "hidden layer width");
  train->add_option("--rho", topts.rho_star, "target mean activation");
  train->add_option("--sigma", topts.sigma, "input noise stddev");
  train->add_option("--lambda1", topts.lambda1, "ASL weight");
  train->add_option("--lambda2", topts.lambda2, "PSL weight");
  train->add_flag("--l1-mode", use_l1, "replace ASL+PSL with an l1 penalty");
  train->add_option("--l1-coeff", topts.l1_coeff, "l1 penalty coefficient");
  train->add_option("--epochs", topts.epochs, "training epochs");
  train->add_option("--batch", topts.batch_size, "mini-batch size");
  train->add_option("--lr", topts.learning_rate, "learning rate");
  train->add_flag("--sgd", use_sgd, "use SGD instead of Adam");
  train->add_option("--momentum", topts.sgd_momentum, "SGD momentum");
  train->add_option("--n-train", topts.n_train,
                    "words in the train split (0 = all, empty dev)");
  train->add_option("--seed", topts.seed, "master seed");
  train->add_flag("--noise-fixed", noise_fixed,
                  "corrupt each example once instead of per batch");
  train->add_option("--precision", save_precision,
                    "significant digits in the output file");
  train->add_option("--echo-config", train_echo,
                    "resolved-config echo path (default <output>.config)");

  // ---- transform ------------------------------------------------
  auto* transform = app.add_subcommand(
      "transform", "encode embeddings with a trained checkpoint");
  std::string tr_checkpoint, tr_input, tr_output = "spine_embeddings.txt";
  std::string tr_echo;
  int tr_precision = 6;
  transform->add_option("--checkpoint", tr_checkpoint, "trained checkpoint")
      ->required();
  transform->add_option("--input", tr_input, "embedding text file")
      ->required();
  transform->add_option("--output", tr_output, "sparse embedding output");
  transform->add_option("--precision", tr_precision,
                        "significant digits in the output file");
  transform->add_option("--echo-config", tr_echo, "resolved-config echo path");

  // ---- report-dims ----------------------------------------------
  auto* report = app.add_subcommand(
      "report-dims", "top dimensions per word and top words per dimension");
  std::string rd_sparse, rd_output, rd_echo;
  std::vector<std::string> rd_words;
  std::string rd_words_file;
  std::size_t rd_dims_per_word = 3, rd_words_per_dim = 5;
  report->add_option("--sparse", rd_sparse, "sparse embedding file")
      ->required();
  report->add_option("--words", rd_words, "query words")->delimiter(',');
  report->add_option("--words-file", rd_words_file,
                     "file with one query word per line");
  report->add_option("--dims-per-word", rd_dims_per_word,
                     "dimensions listed per word");
  report->add_option("--words-per-dim", rd_words_per_dim,
                     "words listed per dimension");
  report->add_option("--output", rd_output, "also write the report here");
  report->add_option("--echo-config", rd_echo, "resolved-config echo path");

  // ---- intrusion ------------------------------------------------
  auto* intrusion = app.add_subcommand(
      "intrusion", "word intrusion test generation and scoring");
  intrusion->require_subcommand(1);
  auto* igen = intrusion->add_subcommand("generate",
                                         "build intrusion questions");
  std::string ig_sparse, ig_out = "questions.csv", ig_sheet, ig_echo;
  std::size_t ig_ndims = 300;
  std::uint64_t ig_seed = 42;
  igen->add_option("--sparse", ig_sparse, "sparse embedding file")
      ->required();
  igen->add_option("--n-dims", ig_ndims, "dimensions to sample");
  igen->add_option("--seed", ig_seed, "sampling seed");
  igen->add_option("--out", ig_out, "questions CSV (with answer key)");
  igen->add_option("--sheet", ig_sheet,
                   "annotator-facing CSV without the answer column");
  igen->add_option("--echo-config", ig_echo, "resolved-config echo path");

  auto* iscore = intrusion->add_subcommand("score",
                                           "score annotator responses");
  std::string is_questions, is_annotations, is_report, is_echo;
  std::uint64_t is_seed = 42;
  iscore->add_option("--questions", is_questions, "questions CSV with answers")
      ->required();
  iscore->add_option("--annotations", is_annotations,
                     "question_id,annotator_id,choice_index rows")
      ->required();
  iscore->add_option("--seed", is_seed, "tie-break seed");
  iscore->add_option("--report", is_report, "score report output");
  iscore->add_option("--echo-config", is_echo, "resolved-config echo path");

  // ---- coherence ------------------------------------------------
  auto* coherence = app.add_subcommand(
      "coherence", "NPMI topic coherence of each dimension's top words");
  std::string co_sparse, co_corpus, co_report, co_echo;
  int co_window = 10, co_top = 5;
  double co_smoothing = 1.0;
  coherence->add_option("--sparse", co_sparse, "sparse embedding file")
      ->required();
  coherence->add_option("--corpus", co_corpus,
                        "tokenized corpus, one document per line")
      ->required();
  coherence->add_option("--window", co_window, "co-occurrence window");
  coherence->add_option("--top", co_top, "words per dimension");
  coherence->add_option("--smoothing", co_smoothing,
                        "additive pair-count smoothing");
  coherence->add_option("--report", co_report, "per-dimension CSV output");
  coherence->add_option("--echo-config", co_echo,
                        "resolved-config echo path");

  // ---- eval-sim -------------------------------------------------
  auto* evalsim = app.add_subcommand(
      "eval-sim", "word-similarity benchmark (cosine + Spearman)");
  std::string es_emb, es_pairs, es_echo;
  evalsim->add_option("--emb", es_emb, "embedding file")->required();
  evalsim->add_option("--pairs", es_pairs, "word1<TAB>word2<TAB>score file")
      ->required();
  evalsim->add_option("--echo-config", es_echo, "resolved-config echo path");

  // ---- eval-clf -------------------------------------------------
  auto* evalclf = app.add_subcommand(
      "eval-clf", "text classification over averaged word vectors");
  std::string ec_emb, ec_train, ec_dev, ec_test, ec_export, ec_echo;
  std::vector<double> ec_regs = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  evalclf->add_option("--emb", ec_emb, "embedding file")->required();
  evalclf->add_option("--train", ec_train, "label<TAB>tokens training file")
      ->required();
  evalclf->add_option("--dev", ec_dev, "development file")->required();
  evalclf->add_option("--test", ec_test, "test file")->required();
  evalclf->add_option("--regs", ec_regs, "candidate L2 strengths")
      ->delimiter(',');
  evalclf->add_option("--export-features", ec_export,
                      "also export the train feature matrix as CSV");
  evalclf->add_option("--echo-config", ec_echo, "resolved-config echo path");

  // ---- grid -----------------------------------------------------
  auto* grid = app.add_subcommand(
      "grid", "hyperparameter grid search under a reconstruction-loss cap");
  InputOptions grid_input;
  grid_input.attach(grid);
  std::string gr_corpus, gr_out = "grid_results.csv", gr_echo;
  std::vector<double> gr_rho = {0.15}, gr_sigma = {0.2},
                      gr_lambda1 = {1.0}, gr_lambda2 = {1.0};
  std::vector<std::size_t> gr_hidden = {1000};
  spine_grid_options gopts;
  spine_grid_options_init(&gopts);
  spine_train_options gbase;
  spine_train_options_init(&gbase);
  int gr_window = 10;
  grid->add_option("--corpus", gr_corpus, "coherence reference corpus")
      ->required();
  grid->add_option("--rho", gr_rho, "rho_star candidates")->delimiter(',');
  grid->add_option("--hidden", gr_hidden, "hidden size candidates")
      ->delimiter(',');
  grid->add_option("--sigma", gr_sigma, "noise candidates")->delimiter(',');
  grid->add_option("--lambda1", gr_lambda1, "ASL weight candidates")
      ->delimiter(',');
  grid->add_option("--lambda2", gr_lambda2, "PSL weight candidates")
      ->delimiter(',');
  grid->add_option("--rl-cap", gopts.rl_cap,
                   "max permissible dev reconstruction loss");
  grid->add_option("--epochs-fraction", gopts.epochs_fraction,
                   "per-cell training budget");
  grid->add_option("--window", gr_window, "coherence window");
  grid->add_option("--top", gopts.coherence_top, "coherence words per dim");
  grid->add_option("--smoothing", gopts.coherence_smoothing,
                   "coherence smoothing");
  grid->add_option("--threads", gopts.threads, "parallel grid cells");
  grid->add_option("--epochs", gbase.epochs, "full-budget epochs");
  grid->add_option("--batch", gbase.batch_size, "mini-batch size");
  grid->add_option("--lr", gbase.learning_rate, "learning rate");
  grid->add_option("--n-train", gbase.n_train,
                   "words in the train split (0 = all)");
  grid->add_option("--seed", gbase.seed, "master seed");
  grid->add_option("--out", gr_out, "results CSV");
  grid->add_option("--echo-config", gr_echo, "resolved-config echo path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 5;
  }

  // ---- dispatch -------------------------------------------------
  if (train->parsed()) {
    topts.use_l1 = use_l1 ? 1 : 0;
    topts.optimizer = use_sgd ? 1 : 0;
    topts.noise_fixed_per_example = noise_fixed ? 1 : 0;
    if (train_checkpoint.empty()) train_checkpoint = train_output + ".ckpt";
    if (train_metrics.empty()) train_metrics = train_output + ".metrics.csv";

    EmbeddingsPtr emb = train_input.load();
    std::cerr << "loaded " << spine_embeddings_rows(emb.get()) << " x "
              << spine_embeddings_dim(emb.get()) << " embeddings\n";

    spine_model* model_raw = nullptr;
    check(spine_train(emb.get(), &topts, &model_raw));
    ModelPtr model(model_raw);

    spine_embeddings* sparse_raw = nullptr;
    check(spine_model_transform(model.get(), emb.get(), &sparse_raw));
    EmbeddingsPtr sparse(sparse_raw);

    check(spine_embeddings_save(sparse.get(), train_output.c_str(),
                                save_precision));
    check(spine_model_save(model.get(), train_checkpoint.c_str()));
    check(spine_model_metrics_csv(model.get(), train_metrics.c_str()));

    double rl = 0, asl = 0, psl = 0, total = 0, dev_rl = 0;
    check(spine_model_final_metrics(model.get(), &rl, &asl, &psl, &total,
                                    &dev_rl));
    double fraction = 0, mean_active = 0;
    check(spine_embeddings_sparsity(sparse.get(), 0.0, &fraction,
                                    &mean_active));
    std::printf("final losses: rl=%.6f asl=%.6f psl=%.6f total=%.6f", rl,
                asl, psl, total);
    if (std::isfinite(dev_rl)) std::printf(" dev_rl=%.6f", dev_rl);
    std::printf("\nsparsity: %.2f%% zeros, %.1f active dims per word\n",
                100.0 * fraction, mean_active);
    std::printf("sparse embeddings: %s\ncheckpoint: %s\nmetrics: %s\n",
                train_output.c_str(), train_checkpoint.c_str(),
                train_metrics.c_str());
    write_config_echo(app, train_echo.empty()
                               ? default_echo_path(train_output, "train")
                               : train_echo);
    return 0;
  }

  if (transform->parsed()) {
    spine_model* model_raw = nullptr;
    check(spine_model_load(tr_checkpoint.c_str(), &model_raw));
    ModelPtr model(model_raw);
    EmbeddingsPtr emb = load_plain(tr_input);

    spine_embeddings* sparse_raw = nullptr;
    check(spine_model_transform(model.get(), emb.get(), &sparse_raw));
    EmbeddingsPtr sparse(sparse_raw);
    check(spine_embeddings_save(sparse.get(), tr_output.c_str(),
                                tr_precision));
    double fraction = 0, mean_active = 0;
    check(spine_embeddings_sparsity(sparse.get(), 0.0, &fraction,
                                    &mean_active));
    std::printf("transformed %zu words to %zu dims (%.2f%% zeros)\n",
                spine_embeddings_rows(sparse.get()),
                spine_embeddings_dim(sparse.get()), 100.0 * fraction);
    write_config_echo(app, tr_echo.empty()
                               ? default_echo_path(tr_output, "transform")
                               : tr_echo);
    return 0;
  }

  if (report->parsed()) {
    EmbeddingsPtr sparse = load_plain(rd_sparse);
    std::vector<std::string> words = rd_words;
    if (!rd_words_file.empty()) {
      std::ifstream in(rd_words_file);
      if (!in) {
        std::cerr << "error: cannot open " << rd_words_file << "\n";
        return 2;
      }
      std::string w;
      while (in >> w) words.push_back(w);
    }
    if (words.empty()) {
      std::cerr << "error: no query words (--words or --words-file)\n";
      return 5;
    }
    StringsPtr query = make_strings(words);
    char* text = nullptr;
    check(spine_report_dimensions(sparse.get(), query.get(), rd_dims_per_word,
                                  rd_words_per_dim, &text));
    std::fputs(text, stdout);
    if (!rd_output.empty()) {
      std::ofstream out(rd_output);
      out << text;
    }
    spine_string_free(text);
    write_config_echo(app, rd_echo.empty()
                               ? default_echo_path(rd_output, "report-dims")
                               : rd_echo);
    return 0;
  }

  if (igen->parsed()) {
    EmbeddingsPtr sparse = load_plain(ig_sparse);
    size_t n_questions = 0, n_skipped = 0;
    check(spine_intrusion_generate(
        sparse.get(), ig_ndims, ig_seed, ig_out.c_str(),
        ig_sheet.empty() ? nullptr : ig_sheet.c_str(), &n_questions,
        &n_skipped));
    std::printf("%zu questions -> %s (%zu dimensions skipped)\n", n_questions,
                ig_out.c_str(), n_skipped);
    write_config_echo(app, ig_echo.empty()
                               ? default_echo_path(ig_out, "intrusion")
                               : ig_echo);
    return 0;
  }

  if (iscore->parsed()) {
    double precision = 0, agree2 = 0, agree3 = 0;
    check(spine_intrusion_score(is_questions.c_str(), is_annotations.c_str(),
                                is_seed,
                                is_report.empty() ? nullptr : is_report.c_str(),
                                &precision, &agree2, &agree3));
    std::printf("precision: %.4f\nagree2plus: %.4f\nagree3: %.4f\n",
                precision, agree2, agree3);
    write_config_echo(app, is_echo.empty()
                               ? default_echo_path(is_report, "intrusion-score")
                               : is_echo);
    return 0;
  }

  if (coherence->parsed()) {
    EmbeddingsPtr sparse = load_plain(co_sparse);
    StringsPtr vocab = vocab_of(sparse.get());
    spine_cooccurrence* counts_raw = nullptr;
    check(spine_cooccurrence_build(co_corpus.c_str(), co_window, vocab.get(),
                                   &counts_raw));
    CountsPtr counts(counts_raw);
    double aggregate = 0;
    size_t n_scored = 0, n_skipped = 0;
    check(spine_coherence(sparse.get(), counts.get(), co_top, co_smoothing,
                          co_report.empty() ? nullptr : co_report.c_str(),
                          &aggregate, &n_scored, &n_skipped));
    if (std::isnan(aggregate)) {
      std::printf("coherence: undefined (no scorable dimensions)\n");
    } else {
      std::printf("coherence: %.6f over %zu dimensions (%zu skipped)\n",
                  aggregate, n_scored, n_skipped);
    }
    write_config_echo(app, co_echo.empty()
                               ? default_echo_path(co_report, "coherence")
                               : co_echo);
    return 0;
  }

  if (evalsim->parsed()) {
    EmbeddingsPtr emb = load_plain(es_emb);
    double rho = 0, coverage = 0;
    size_t used = 0, total = 0;
    check(spine_eval_similarity(emb.get(), es_pairs.c_str(), &rho, &coverage,
                                &used, &total));
    std::printf("spearman rho: %.6f\ncoverage: %zu/%zu (%.1f%%)\n", rho, used,
                total, 100.0 * coverage);
    write_config_echo(app, es_echo.empty()
                               ? default_echo_path("", "eval-sim")
                               : es_echo);
    return 0;
  }

  if (evalclf->parsed()) {
    EmbeddingsPtr emb = load_plain(ec_emb);
    if (!ec_export.empty()) {
      check(spine_export_features(emb.get(), ec_train.c_str(),
                                  ec_export.c_str()));
      std::printf("features -> %s\n", ec_export.c_str());
    }
    double test_acc = 0, dev_acc = 0, reg = 0;
    int converged = 0;
    check(spine_eval_classifier(emb.get(), ec_train.c_str(), ec_dev.c_str(),
                                ec_test.c_str(), ec_regs.data(),
                                ec_regs.size(), &test_acc, &dev_acc, &reg,
                                &converged));
    std::printf("test accuracy: %.4f\ndev accuracy: %.4f (reg %.6g)%s\n",
                test_acc, dev_acc, reg,
                converged ? "" : "  [did not converge]");
    write_config_echo(app, ec_echo.empty()
                               ? default_echo_path("", "eval-clf")
                               : ec_echo);
    return 0;
  }

  if (grid->parsed()) {
    EmbeddingsPtr emb = grid_input.load();
    StringsPtr vocab = vocab_of(emb.get());
    spine_cooccurrence* counts_raw = nullptr;
    check(spine_cooccurrence_build(gr_corpus.c_str(), gr_window, vocab.get(),
                                   &counts_raw));
    CountsPtr counts(counts_raw);

    gopts.rho_star_values = gr_rho.data();
    gopts.n_rho_star = gr_rho.size();
    gopts.hidden_values = gr_hidden.data();
    gopts.n_hidden = gr_hidden.size();
    gopts.sigma_values = gr_sigma.data();
    gopts.n_sigma = gr_sigma.size();
    gopts.lambda1_values = gr_lambda1.data();
    gopts.n_lambda1 = gr_lambda1.size();
    gopts.lambda2_values = gr_lambda2.data();
    gopts.n_lambda2 = gr_lambda2.size();

    size_t n_cells = 0, n_admitted = 0;
    check(spine_grid_search(emb.get(), &gbase, &gopts, counts.get(),
                            gr_out.c_str(), &n_cells, &n_admitted));
    std::printf("%zu cells evaluated, %zu under the cap -> %s\n", n_cells,
                n_admitted, gr_out.c_str());
    write_config_echo(app, gr_echo.empty() ? default_echo_path(gr_out, "grid")
                                           : gr_echo);
    return 0;
  }

  std::cerr << "error: no subcommand\n";
  return 5;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const StatusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
