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

#include "core/trainer.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "core/rng.hpp"

namespace spine {

namespace {

Matrix rows_for_words(const EmbeddingMatrix& emb,
                      const std::vector<std::string>& words,
                      const std::unordered_map<std::string, Eigen::Index>& index) {
  Matrix out(static_cast<Eigen::Index>(words.size()), emb.dim());
  for (size_t i = 0; i < words.size(); ++i) {
    auto it = index.find(words[i]);
    if (it == index.end()) {
      fail(ErrorCode::config, "split word not in embeddings: " + words[i]);
    }
    out.row(static_cast<Eigen::Index>(i)) = emb.matrix.row(it->second);
  }
  return out;
}

struct Adam {
  double beta1, beta2, epsilon, lr;

  void update(Matrix& theta, const Matrix& grad, Matrix& m, Matrix& v,
              int64_t t) const {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v.array().matrix() +
        (1.0 - beta2) * grad.array().square().matrix();
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    theta.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
  }

  void update(Vector& theta, const Vector& grad, Vector& m, Vector& v,
              int64_t t) const {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v.array().matrix() +
        (1.0 - beta2) * grad.array().square().matrix();
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    theta.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
  }
};

struct Sgd {
  double momentum, lr;

  void update(Matrix& theta, const Matrix& grad, Matrix& velocity) const {
    velocity = momentum * velocity - lr * grad;
    theta += velocity;
  }
  void update(Vector& theta, const Vector& grad, Vector& velocity) const {
    velocity = momentum * velocity - lr * grad;
    theta += velocity;
  }
};

EpochMetrics measure_epoch(int epoch, const Matrix& x_train,
                           const Matrix& x_dev,
                           const AutoencoderParams& params,
                           const Hyperparams& hyper, Matrix* z_scratch) {
  EpochMetrics m;
  m.epoch = epoch;
  LossBreakdown loss = total_loss(x_train, x_train, params, hyper, z_scratch);
  m.rl = loss.rl;
  m.asl = loss.asl;
  m.psl = loss.psl;
  m.total = loss.total;
  m.sparsity_fraction = sparsity_fraction(*z_scratch);
  m.mean_active_per_word = mean_active_per_word(*z_scratch);
  if (x_dev.rows() > 0) {
    Matrix z_dev = encode(x_dev, params);
    m.dev_rl = reconstruction_loss(x_dev, decode(z_dev, params));
  } else {
    m.dev_rl = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) fail(ErrorCode::config, "epochs must be >= 0");
  if (batch_size < 1) fail(ErrorCode::config, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    fail(ErrorCode::config, "learning_rate must be > 0");
  }
}

AutoencoderParams init_params(Eigen::Index input_dim, Eigen::Index hidden_dim,
                              uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) {
    fail(ErrorCode::config, "init_params: dimensions must be >= 1");
  }
  Rng rng(seed);
  double half_width =
      std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));

  AutoencoderParams params;
  params.w_enc.resize(input_dim, hidden_dim);
  params.w_dec.resize(hidden_dim, input_dim);
  for (Eigen::Index i = 0; i < input_dim; ++i) {
    for (Eigen::Index j = 0; j < hidden_dim; ++j) {
      params.w_enc(i, j) = rng.uniform(-half_width, half_width);
    }
  }
  for (Eigen::Index i = 0; i < hidden_dim; ++i) {
    for (Eigen::Index j = 0; j < input_dim; ++j) {
      params.w_dec(i, j) = rng.uniform(-half_width, half_width);
    }
  }
  params.b_enc = Vector::Zero(hidden_dim);
  params.b_dec = Vector::Zero(input_dim);
  return params;
}

TrainResult train(const EmbeddingMatrix& emb, const VocabSplit& split,
                  const Hyperparams& hyper, const TrainConfig& cfg) {
  hyper.validate();
  cfg.validate();
  if (split.train.empty()) fail(ErrorCode::config, "empty train split");

  auto index = vocab_index(emb.vocab);
  Matrix x_train = rows_for_words(emb, split.train, index);
  Matrix x_dev = rows_for_words(emb, split.dev, index);

  const Eigen::Index n = x_train.rows();
  const Eigen::Index d = x_train.cols();
  const Eigen::Index m = hyper.hidden;

  TrainResult result;
  result.params = init_params(d, m, derive_seed(cfg.seed, "init"));

  OptimizerState& opt = result.opt_state;
  opt.m_w_enc = Matrix::Zero(d, m);
  opt.v_w_enc = Matrix::Zero(d, m);
  opt.m_b_enc = Vector::Zero(m);
  opt.v_b_enc = Vector::Zero(m);
  opt.m_w_dec = Matrix::Zero(m, d);
  opt.v_w_dec = Matrix::Zero(m, d);
  opt.m_b_dec = Vector::Zero(d);
  opt.v_b_dec = Vector::Zero(d);

  Rng noise_rng = Rng::substream(cfg.seed, "noise");
  Rng shuffle_rng = Rng::substream(cfg.seed, "shuffle");

  // fixed_per_example draws one corruption of the whole train set up front
  Matrix x_noisy_fixed;
  if (cfg.noise_mode == NoiseMode::fixed_per_example && hyper.sigma > 0.0) {
    x_noisy_fixed = add_gaussian_noise(x_train, hyper.sigma, noise_rng);
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

  Adam adam{cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon,
            cfg.learning_rate};
  Sgd sgd{cfg.sgd_momentum, cfg.learning_rate};

  ParamGradients grads;
  Matrix z_scratch;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    Eigen::Index batch_start = 0;
    int batch_index = 0;
    while (batch_start < n) {
      Eigen::Index batch_len =
          std::min<Eigen::Index>(cfg.batch_size, n - batch_start);
      Matrix x_batch(batch_len, d);
      for (Eigen::Index r = 0; r < batch_len; ++r) {
        x_batch.row(r) =
            x_train.row(order[static_cast<size_t>(batch_start + r)]);
      }

      Matrix x_batch_noisy;
      if (hyper.sigma == 0.0) {
        x_batch_noisy = x_batch;
      } else if (cfg.noise_mode == NoiseMode::per_batch) {
        x_batch_noisy = add_gaussian_noise(x_batch, hyper.sigma, noise_rng);
      } else {
        x_batch_noisy.resize(batch_len, d);
        for (Eigen::Index r = 0; r < batch_len; ++r) {
          x_batch_noisy.row(r) =
              x_noisy_fixed.row(order[static_cast<size_t>(batch_start + r)]);
        }
      }

      LossBreakdown loss =
          loss_and_gradients(x_batch, x_batch_noisy, result.params, hyper,
                             &grads);
      if (!std::isfinite(loss.total)) {
        fail(ErrorCode::numeric,
             "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                 std::to_string(batch_index));
      }

      opt.step += 1;
      if (cfg.optimizer == OptimizerKind::adam) {
        adam.update(result.params.w_enc, grads.w_enc, opt.m_w_enc,
                    opt.v_w_enc, opt.step);
        adam.update(result.params.b_enc, grads.b_enc, opt.m_b_enc,
                    opt.v_b_enc, opt.step);
        adam.update(result.params.w_dec, grads.w_dec, opt.m_w_dec,
                    opt.v_w_dec, opt.step);
        adam.update(result.params.b_dec, grads.b_dec, opt.m_b_dec,
                    opt.v_b_dec, opt.step);
      } else {
        sgd.update(result.params.w_enc, grads.w_enc, opt.m_w_enc);
        sgd.update(result.params.b_enc, grads.b_enc, opt.m_b_enc);
        sgd.update(result.params.w_dec, grads.w_dec, opt.m_w_dec);
        sgd.update(result.params.b_dec, grads.b_dec, opt.m_b_dec);
      }

      batch_start += batch_len;
      ++batch_index;
    }

    result.metrics.epochs.push_back(
        measure_epoch(epoch, x_train, x_dev, result.params, hyper,
                      &z_scratch));
  }

  result.rng_state = noise_rng.state();
  return result;
}

SparseEmbeddings transform(const EmbeddingMatrix& emb,
                           const AutoencoderParams& params) {
  SparseEmbeddings sparse;
  sparse.vocab = emb.vocab;
  sparse.z = encode(emb.matrix, params);
  return sparse;
}

double sparsity_fraction(const Matrix& z, double epsilon) {
  if (epsilon < 0.0) fail(ErrorCode::config, "epsilon must be >= 0");
  if (z.size() == 0) return 0.0;
  Eigen::Index zeros = (z.array() <= epsilon).count();
  return static_cast<double>(zeros) / static_cast<double>(z.size());
}

double mean_active_per_word(const Matrix& z, double epsilon) {
  if (z.rows() == 0) return 0.0;
  Eigen::Index active = (z.array() > epsilon).count();
  return static_cast<double>(active) / static_cast<double>(z.rows());
}

void write_metrics_csv(const TrainingMetrics& metrics,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write metrics file: " + path);
  out << "epoch,rl,asl,psl,total,dev_rl,sparsity_fraction,"
         "mean_active_per_word\n";
  char buf[256];
  for (const auto& m : metrics.epochs) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.epoch,
                  m.rl, m.asl, m.psl, m.total, m.dev_rl, m.sparsity_fraction,
                  m.mean_active_per_word);
    out << buf;
  }
}

void GridSearchSpec::validate() const {
  if (rho_star_values.empty() || hidden_values.empty() ||
      sigma_values.empty() || lambda1_values.empty() ||
      lambda2_values.empty()) {
    fail(ErrorCode::config, "grid search needs at least one candidate per "
                            "hyperparameter");
  }
  if (!(rl_cap > 0.0)) fail(ErrorCode::config, "rl_cap must be > 0");
  if (!(epochs_fraction > 0.0) || epochs_fraction > 1.0) {
    fail(ErrorCode::config, "epochs_fraction must lie in (0,1]");
  }
}

std::vector<GridCellResult> grid_search(const EmbeddingMatrix& emb,
                                        const VocabSplit& split,
                                        const GridSearchSpec& spec,
                                        const TrainConfig& cfg,
                                        const CoherenceScorer& scorer,
                                        int threads) {
  spec.validate();
  cfg.validate();
  if (split.dev.empty()) {
    fail(ErrorCode::config,
         "grid search needs a dev split to audit the reconstruction cap");
  }

  std::vector<Hyperparams> cells;
  for (double rho : spec.rho_star_values) {
    for (int hidden : spec.hidden_values) {
      for (double sigma : spec.sigma_values) {
        for (double l1 : spec.lambda1_values) {
          for (double l2 : spec.lambda2_values) {
            Hyperparams h;
            h.rho_star = rho;
            h.hidden = hidden;
            h.sigma = sigma;
            h.lambda1 = l1;
            h.lambda2 = l2;
            h.validate();
            cells.push_back(h);
          }
        }
      }
    }
  }

  TrainConfig cell_cfg = cfg;
  cell_cfg.epochs = std::max(
      1, static_cast<int>(std::llround(cfg.epochs * spec.epochs_fraction)));

  EmbeddingMatrix train_emb;
  {
    auto index = vocab_index(emb.vocab);
    train_emb.vocab = split.train;
    train_emb.matrix.resize(static_cast<Eigen::Index>(split.train.size()),
                            emb.dim());
    for (size_t r = 0; r < split.train.size(); ++r) {
      auto it = index.find(split.train[r]);
      if (it == index.end()) {
        fail(ErrorCode::config, "split word not in embeddings: " +
                                    split.train[r]);
      }
      train_emb.matrix.row(static_cast<Eigen::Index>(r)) =
          emb.matrix.row(it->second);
    }
  }

  std::vector<GridCellResult> results(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      GridCellResult& cell = results[i];
      cell.hyper = cells[i];
      TrainResult trained = train(emb, split, cells[i], cell_cfg);
      cell.dev_rl = trained.metrics.epochs.back().dev_rl;
      cell.admitted = std::isfinite(cell.dev_rl) && cell.dev_rl <= spec.rl_cap;
      if (cell.admitted && scorer) {
        cell.coherence = scorer(transform(train_emb, trained.params));
      } else {
        cell.coherence = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  int n_workers = std::max(1, std::min<int>(threads,
                                            static_cast<int>(cells.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // admitted first, best coherence first; rejected cells keep grid order
  std::stable_sort(results.begin(), results.end(),
                   [](const GridCellResult& a, const GridCellResult& b) {
                     if (a.admitted != b.admitted) return a.admitted;
                     if (!a.admitted) return false;
                     return a.coherence > b.coherence;
                   });
  return results;
}

}  // namespace spine
