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

#ifndef SPINE_CORE_TRAINER_HPP
#define SPINE_CORE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/autoencoder.hpp"
#include "core/embedding_io.hpp"
#include "core/types.hpp"

namespace spine {

/// The sparse, non-negative output representation: one [0,1]-valued row of
/// m activations per vocabulary word.
struct SparseEmbeddings {
  std::vector<std::string> vocab;
  Matrix z;  // |vocab| x m, entries in [0,1]
};

enum class OptimizerKind { adam, sgd };

enum class NoiseMode {
  per_batch,          // fresh corruption every time a batch is visited
  fixed_per_example,  // one corruption drawn up front and reused
};

struct TrainConfig {
  int epochs = 4000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double sgd_momentum = 0.0;
  bool deterministic = true;  // fixed reduction order, bit-reproducible
  NoiseMode noise_mode = NoiseMode::per_batch;

  void validate() const;
};

/// One epoch-end measurement row. Losses come from a clean (sigma = 0)
/// forward pass over the full train split; ASL here is the full-dataset
/// value even though optimization estimates it per mini-batch.
struct EpochMetrics {
  int epoch = 0;
  double rl = 0.0;
  double asl = 0.0;
  double psl = 0.0;
  double total = 0.0;
  double dev_rl = 0.0;  // NaN when the dev split is empty
  double sparsity_fraction = 0.0;
  double mean_active_per_word = 0.0;
};

struct TrainingMetrics {
  std::vector<EpochMetrics> epochs;
};

/// Adam first/second moments (or SGD velocity) for every parameter tensor.
struct OptimizerState {
  Matrix m_w_enc, v_w_enc;
  Vector m_b_enc, v_b_enc;
  Matrix m_w_dec, v_w_dec;
  Vector m_b_dec, v_b_dec;
  int64_t step = 0;
};

struct TrainResult {
  AutoencoderParams params;
  TrainingMetrics metrics;
  OptimizerState opt_state;
  std::string rng_state;  // noise stream state at the end of training
};

/// Glorot-uniform weights (half-width sqrt(6/(fan_in+fan_out))), zero
/// biases. Deterministic under the seed.
AutoencoderParams init_params(Eigen::Index input_dim, Eigen::Index hidden_dim,
                              uint64_t seed);

/// Mini-batch training of the denoising autoencoder on the split's train
/// rows. Aborts with epoch/batch coordinates if the loss goes non-finite.
TrainResult train(const EmbeddingMatrix& emb, const VocabSplit& split,
                  const Hyperparams& hyper, const TrainConfig& cfg);

/// Clean (noise-free) encoding of every row; the artifact's main output.
SparseEmbeddings transform(const EmbeddingMatrix& emb,
                           const AutoencoderParams& params);

/// Fraction of activations with value <= epsilon. epsilon 0 counts the
/// exact zeros the cap-ReLU produces.
double sparsity_fraction(const Matrix& z, double epsilon = 0.0);

/// Average number of entries per row above epsilon.
double mean_active_per_word(const Matrix& z, double epsilon = 0.0);

/// Writes `epoch,rl,asl,psl,total,dev_rl,sparsity_fraction,
/// mean_active_per_word` rows.
void write_metrics_csv(const TrainingMetrics& metrics,
                       const std::string& path);

struct GridSearchSpec {
  std::vector<double> rho_star_values;
  std::vector<int> hidden_values;
  std::vector<double> sigma_values;
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values;
  double rl_cap = 1.0;           // max permissible dev reconstruction loss
  double epochs_fraction = 0.25; // budget per cell relative to cfg.epochs

  void validate() const;
};

struct GridCellResult {
  Hyperparams hyper;
  double dev_rl = 0.0;
  double coherence = 0.0;  // NaN when the cell was not scored
  bool admitted = false;   // dev_rl within the cap
};

using CoherenceScorer = std::function<double(const SparseEmbeddings&)>;

/// Trains one model per grid cell, drops cells whose dev reconstruction
/// loss exceeds the cap, and ranks the survivors by the supplied coherence
/// score (descending). Returns every cell with its admission status;
/// admitted cells come first, in rank order. Cells are independent and may
/// be evaluated on several threads; results do not depend on the schedule.
std::vector<GridCellResult> grid_search(const EmbeddingMatrix& emb,
                                        const VocabSplit& split,
                                        const GridSearchSpec& spec,
                                        const TrainConfig& cfg,
                                        const CoherenceScorer& scorer,
                                        int threads = 1);

}  // namespace spine

#endif  // SPINE_CORE_TRAINER_HPP
