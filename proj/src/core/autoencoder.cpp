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

#include "core/autoencoder.hpp"

#include <cmath>
#include <string>

namespace spine {

namespace {

void check_shapes(const Matrix& x, const AutoencoderParams& params) {
  if (x.cols() != params.w_enc.rows()) {
    fail(ErrorCode::shape, "input has " + std::to_string(x.cols()) +
                               " columns, encoder expects " +
                               std::to_string(params.w_enc.rows()));
  }
  if (params.w_enc.cols() != params.b_enc.size() ||
      params.w_enc.cols() != params.w_dec.rows() ||
      params.w_enc.rows() != params.w_dec.cols() ||
      params.w_dec.cols() != params.b_dec.size()) {
    fail(ErrorCode::shape, "inconsistent autoencoder parameter shapes");
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::shape, std::string(what) + ": shape mismatch (" +
                               std::to_string(a.rows()) + "x" +
                               std::to_string(a.cols()) + " vs " +
                               std::to_string(b.rows()) + "x" +
                               std::to_string(b.cols()) + ")");
  }
}

void check_nonempty(const Matrix& z) {
  if (z.rows() == 0) fail(ErrorCode::shape, "empty batch");
}

}  // namespace

void Hyperparams::validate() const {
  if (rho_star < 0.0 || rho_star > 1.0) {
    fail(ErrorCode::config, "rho_star must lie in [0,1]");
  }
  if (hidden < 1) fail(ErrorCode::config, "hidden size must be >= 1");
  if (sigma < 0.0) fail(ErrorCode::config, "sigma must be >= 0");
  if (lambda1 < 0.0 || lambda2 < 0.0 || l1_coeff < 0.0) {
    fail(ErrorCode::config, "loss coefficients must be >= 0");
  }
}

Matrix cap_relu(const Matrix& t) {
  return t.array().max(0.0).min(1.0).matrix();
}

Matrix encode(const Matrix& x, const AutoencoderParams& params) {
  check_shapes(x, params);
  Matrix pre = (x * params.w_enc).rowwise() + params.b_enc.transpose();
  return cap_relu(pre);
}

Matrix decode(const Matrix& z, const AutoencoderParams& params) {
  if (z.cols() != params.w_dec.rows()) {
    fail(ErrorCode::shape, "activations have " + std::to_string(z.cols()) +
                               " columns, decoder expects " +
                               std::to_string(params.w_dec.rows()));
  }
  return (z * params.w_dec).rowwise() + params.b_dec.transpose();
}

Matrix add_gaussian_noise(const Matrix& x, double sigma, Rng& rng) {
  if (sigma < 0.0) fail(ErrorCode::config, "noise sigma must be >= 0");
  if (sigma == 0.0) return x;
  Matrix noisy = x;
  for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
    for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
      noisy(i, j) += sigma * rng.normal();
    }
  }
  return noisy;
}

double reconstruction_loss(const Matrix& x, const Matrix& x_tilde) {
  check_same_shape(x, x_tilde, "reconstruction_loss");
  check_nonempty(x);
  return (x - x_tilde).array().square().sum() /
         static_cast<double>(x.rows());
}

double average_sparsity_loss(const Matrix& z, double rho_star) {
  check_nonempty(z);
  double loss = 0.0;
  for (Eigen::Index h = 0; h < z.cols(); ++h) {
    double over = std::max(0.0, z.col(h).mean() - rho_star);
    loss += over * over;
  }
  return loss;
}

double partial_sparsity_loss(const Matrix& z) {
  check_nonempty(z);
  if ((z.array() < 0.0).any() || (z.array() > 1.0).any()) {
    fail(ErrorCode::numeric, "activations outside [0,1]");
  }
  return (z.array() * (1.0 - z.array())).sum() /
         static_cast<double>(z.rows());
}

double l1_sparsity_loss(const Matrix& z) {
  check_nonempty(z);
  return z.array().abs().sum() / static_cast<double>(z.rows());
}

LossBreakdown total_loss(const Matrix& x_clean, const Matrix& x_noisy,
                         const AutoencoderParams& params,
                         const Hyperparams& hyper) {
  return total_loss(x_clean, x_noisy, params, hyper, nullptr);
}

LossBreakdown total_loss(const Matrix& x_clean, const Matrix& x_noisy,
                         const AutoencoderParams& params,
                         const Hyperparams& hyper, Matrix* z_out) {
  check_same_shape(x_clean, x_noisy, "total_loss");
  Matrix z = encode(x_noisy, params);
  Matrix x_tilde = decode(z, params);

  LossBreakdown loss;
  loss.rl = reconstruction_loss(x_clean, x_tilde);
  if (hyper.mode == SparsityMode::l1) {
    loss.asl = l1_sparsity_loss(z);
    loss.psl = 0.0;
    loss.total = loss.rl + hyper.l1_coeff * loss.asl;
  } else {
    loss.asl = average_sparsity_loss(z, hyper.rho_star);
    loss.psl = partial_sparsity_loss(z);
    loss.total = loss.rl + hyper.lambda1 * loss.asl + hyper.lambda2 * loss.psl;
  }
  if (z_out != nullptr) *z_out = std::move(z);
  return loss;
}

ParamGradients loss_gradients(const Matrix& x_clean, const Matrix& x_noisy,
                              const AutoencoderParams& params,
                              const Hyperparams& hyper) {
  ParamGradients grads;
  loss_and_gradients(x_clean, x_noisy, params, hyper, &grads);
  return grads;
}

LossBreakdown loss_and_gradients(const Matrix& x_clean, const Matrix& x_noisy,
                                 const AutoencoderParams& params,
                                 const Hyperparams& hyper,
                                 ParamGradients* grads) {
  check_same_shape(x_clean, x_noisy, "loss_and_gradients");
  check_shapes(x_noisy, params);
  check_nonempty(x_clean);

  const double n = static_cast<double>(x_clean.rows());

  Matrix pre = (x_noisy * params.w_enc).rowwise() + params.b_enc.transpose();
  Matrix z = cap_relu(pre);
  Matrix x_tilde = (z * params.w_dec).rowwise() + params.b_dec.transpose();

  LossBreakdown loss;
  loss.rl = (x_clean - x_tilde).array().square().sum() / n;

  // d RL / d x_tilde
  Matrix d_out = (2.0 / n) * (x_tilde - x_clean);

  grads->w_dec = z.transpose() * d_out;
  grads->b_dec = d_out.colwise().sum().transpose();

  // d loss / d z, starting with the reconstruction path
  Matrix d_z = d_out * params.w_dec.transpose();

  if (hyper.mode == SparsityMode::l1) {
    loss.asl = z.array().abs().sum() / n;
    loss.psl = 0.0;
    loss.total = loss.rl + hyper.l1_coeff * loss.asl;
    // activations are non-negative, so d|z|/dz is 1 wherever the
    // cap-ReLU mask is live
    d_z.array() += hyper.l1_coeff / n;
  } else {
    loss.asl = 0.0;
    for (Eigen::Index h = 0; h < z.cols(); ++h) {
      double over = std::max(0.0, z.col(h).mean() - hyper.rho_star);
      loss.asl += over * over;
      // the column mean couples the batch: every example in column h
      // receives the same 2*over/n term
      d_z.col(h).array() += hyper.lambda1 * 2.0 * over / n;
    }
    loss.psl = (z.array() * (1.0 - z.array())).sum() / n;
    d_z.array() += hyper.lambda2 * (1.0 - 2.0 * z.array()) / n;
    loss.total = loss.rl + hyper.lambda1 * loss.asl + hyper.lambda2 * loss.psl;
  }

  // cap-ReLU subgradient: pass-through strictly inside (0,1), zero
  // elsewhere and at both kinks
  Matrix mask =
      ((pre.array() > 0.0) && (pre.array() < 1.0)).cast<double>().matrix();
  Matrix d_pre = d_z.cwiseProduct(mask);

  grads->w_enc = x_noisy.transpose() * d_pre;
  grads->b_enc = d_pre.colwise().sum().transpose();

  return loss;
}

}  // namespace spine
