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

#ifndef SPINE_CORE_AUTOENCODER_HPP
#define SPINE_CORE_AUTOENCODER_HPP

#include "core/rng.hpp"
#include "core/types.hpp"

namespace spine {

/// Encoder/decoder weights and biases of the one-hidden-layer autoencoder.
/// Shapes: w_enc d x m, b_enc m, w_dec m x d, b_dec d.
struct AutoencoderParams {
  Matrix w_enc;
  Vector b_enc;
  Matrix w_dec;
  Vector b_dec;

  Eigen::Index input_dim() const { return w_enc.rows(); }
  Eigen::Index hidden_dim() const { return w_enc.cols(); }
};

/// Gradients share the parameter shapes.
using ParamGradients = AutoencoderParams;

enum class SparsityMode {
  asl_psl,  // average + partial sparsity penalties
  l1,       // plain l1 penalty on activations (ablation alternative)
};

struct Hyperparams {
  double rho_star = 0.15;  // target mean activation per hidden unit
  int hidden = 1000;       // m
  double sigma = 0.4;      // stddev of the input corruption noise
  double lambda1 = 1.0;    // ASL weight
  double lambda2 = 1.0;    // PSL weight
  SparsityMode mode = SparsityMode::asl_psl;
  double l1_coeff = 1.0;  // only read in l1 mode

  void validate() const;
};

/// The three loss terms of one evaluation. In l1 mode the penalty value is
/// reported in the `asl` slot, `psl` is zero, and the total applies the l1
/// coefficient instead of lambda1/lambda2.
struct LossBreakdown {
  double rl = 0.0;
  double asl = 0.0;
  double psl = 0.0;
  double total = 0.0;
};

/// Linear rectifier clamped above at one: 0 for t <= 0, t on (0,1), 1 for
/// t >= 1. Keeps every activation inside [0,1] so activation magnitudes are
/// directly comparable and the partial sparsity penalty is well defined.
inline double cap_relu(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t;
}

Matrix cap_relu(const Matrix& t);

/// Z = cap_relu(X * w_enc + b_enc). Output entries lie in [0,1].
Matrix encode(const Matrix& x, const AutoencoderParams& params);

/// X~ = Z * w_dec + b_dec. Linear output layer, unbounded.
Matrix decode(const Matrix& z, const AutoencoderParams& params);

/// Adds an independent N(0, sigma^2) draw to every entry. sigma = 0 returns
/// the input unchanged.
Matrix add_gaussian_noise(const Matrix& x, double sigma, Rng& rng);

/// Mean over rows of the squared Euclidean reconstruction error. No
/// per-dimension normalization.
double reconstruction_loss(const Matrix& x, const Matrix& x_tilde);

/// Sum over hidden units of max(0, rho_h - rho_star)^2 where rho_h is the
/// unit's mean activation over the batch. One-sided: units quieter than the
/// target are not penalized.
double average_sparsity_loss(const Matrix& z, double rho_star);

/// Mean over rows of sum_h z*(1-z). Zero exactly when every activation sits
/// at an endpoint; maximal for mid-range activations, which an average-only
/// penalty cannot see (a unit constant at 0.5 has ASL 0 at rho_star 0.5 but
/// PSL 0.25).
double partial_sparsity_loss(const Matrix& z);

/// Mean over rows of sum_h |z|. Ablation alternative to ASL+PSL.
double l1_sparsity_loss(const Matrix& z);

/// Full forward pass: encodes the noisy input, decodes, and scores the
/// reconstruction against the clean input. Returns the loss pieces and the
/// total under the mode's weighting.
LossBreakdown total_loss(const Matrix& x_clean, const Matrix& x_noisy,
                         const AutoencoderParams& params,
                         const Hyperparams& hyper);

/// As total_loss, but also exposes the activations (handy for metrics).
LossBreakdown total_loss(const Matrix& x_clean, const Matrix& x_noisy,
                         const AutoencoderParams& params,
                         const Hyperparams& hyper, Matrix* z_out);

/// Exact analytic gradient of the total loss with respect to all four
/// parameter tensors. The cap-ReLU subgradient is 1 on the open interval
/// (0,1) of the pre-activation and 0 elsewhere, including at both kinks.
/// The ASL column-mean coupling contributes 2*max(0, rho_h - rho_star)/n
/// to every example's pre-activation gradient in that column.
ParamGradients loss_gradients(const Matrix& x_clean, const Matrix& x_noisy,
                              const AutoencoderParams& params,
                              const Hyperparams& hyper);

/// One fused pass computing both; the trainer's inner loop.
LossBreakdown loss_and_gradients(const Matrix& x_clean, const Matrix& x_noisy,
                                 const AutoencoderParams& params,
                                 const Hyperparams& hyper,
                                 ParamGradients* grads);

}  // namespace spine

#endif  // SPINE_CORE_AUTOENCODER_HPP
