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

#include "core/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include <json.hpp>

namespace spine {

namespace {

constexpr uint32_t kMagic = 0x53504e45;  // "SPNE"
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i64(std::ostream& out, int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

int64_t read_i64(std::istream& in) {
  int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  write_i64(out, m.rows());
  write_i64(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double)) * m.size());
}

Matrix read_matrix(std::istream& in) {
  int64_t rows = read_i64(in);
  int64_t cols = read_i64(in);
  if (rows < 0 || cols < 0) fail(ErrorCode::shape, "corrupt checkpoint");
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double)) * m.size());
  return m;
}

void write_vector(std::ostream& out, const Vector& v) {
  write_i64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double)) * v.size());
}

Vector read_vector(std::istream& in) {
  int64_t size = read_i64(in);
  if (size < 0) fail(ErrorCode::shape, "corrupt checkpoint");
  Vector v(size);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double)) * v.size());
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_i64(out, static_cast<int64_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  int64_t size = read_i64(in);
  if (size < 0) fail(ErrorCode::shape, "corrupt checkpoint");
  std::string s(static_cast<size_t>(size), '\0');
  in.read(s.data(), size);
  return s;
}

nlohmann::json hyper_to_json(const Hyperparams& h) {
  return {
      {"rho_star", h.rho_star},
      {"hidden", h.hidden},
      {"sigma", h.sigma},
      {"lambda1", h.lambda1},
      {"lambda2", h.lambda2},
      {"sparsity_mode", h.mode == SparsityMode::l1 ? "l1" : "asl_psl"},
      {"l1_coeff", h.l1_coeff},
  };
}

Hyperparams hyper_from_json(const nlohmann::json& j) {
  Hyperparams h;
  h.rho_star = j.at("rho_star").get<double>();
  h.hidden = j.at("hidden").get<int>();
  h.sigma = j.at("sigma").get<double>();
  h.lambda1 = j.at("lambda1").get<double>();
  h.lambda2 = j.at("lambda2").get<double>();
  h.mode = j.at("sparsity_mode").get<std::string>() == "l1"
               ? SparsityMode::l1
               : SparsityMode::asl_psl;
  h.l1_coeff = j.at("l1_coeff").get<double>();
  return h;
}

nlohmann::json cfg_to_json(const TrainConfig& c) {
  return {
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"seed", c.seed},
      {"optimizer", c.optimizer == OptimizerKind::sgd ? "sgd" : "adam"},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_epsilon", c.adam_epsilon},
      {"sgd_momentum", c.sgd_momentum},
      {"deterministic", c.deterministic},
      {"noise_mode", c.noise_mode == NoiseMode::fixed_per_example
                         ? "fixed_per_example"
                         : "per_batch"},
  };
}

TrainConfig cfg_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  c.optimizer = j.at("optimizer").get<std::string>() == "sgd"
                    ? OptimizerKind::sgd
                    : OptimizerKind::adam;
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.sgd_momentum = j.at("sgd_momentum").get<double>();
  c.deterministic = j.at("deterministic").get<bool>();
  c.noise_mode = j.at("noise_mode").get<std::string>() == "fixed_per_example"
                     ? NoiseMode::fixed_per_example
                     : NoiseMode::per_batch;
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write checkpoint: " + path);

  write_u32(out, kMagic);
  write_u32(out, kVersion);
  write_matrix(out, ckpt.params.w_enc);
  write_vector(out, ckpt.params.b_enc);
  write_matrix(out, ckpt.params.w_dec);
  write_vector(out, ckpt.params.b_dec);

  write_matrix(out, ckpt.opt_state.m_w_enc);
  write_matrix(out, ckpt.opt_state.v_w_enc);
  write_vector(out, ckpt.opt_state.m_b_enc);
  write_vector(out, ckpt.opt_state.v_b_enc);
  write_matrix(out, ckpt.opt_state.m_w_dec);
  write_matrix(out, ckpt.opt_state.v_w_dec);
  write_vector(out, ckpt.opt_state.m_b_dec);
  write_vector(out, ckpt.opt_state.v_b_dec);
  write_i64(out, ckpt.opt_state.step);

  write_string(out, ckpt.rng_state);
  write_string(out, hyper_to_json(ckpt.hyper).dump());
  write_string(out, cfg_to_json(ckpt.train_cfg).dump());
  if (!out) fail(ErrorCode::io, "write failed: " + path);
  out.close();

  nlohmann::json sidecar = {
      {"format", "spine-checkpoint"},
      {"version", kVersion},
      {"input_dim", ckpt.params.input_dim()},
      {"hidden_dim", ckpt.params.hidden_dim()},
      {"hyperparams", hyper_to_json(ckpt.hyper)},
      {"train_config", cfg_to_json(ckpt.train_cfg)},
  };
  std::ofstream side(path + ".json");
  if (!side) fail(ErrorCode::io, "cannot write checkpoint sidecar");
  side << sidecar.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open checkpoint: " + path);

  if (read_u32(in) != kMagic) {
    fail(ErrorCode::shape, "not a checkpoint file: " + path);
  }
  uint32_t version = read_u32(in);
  if (version != kVersion) {
    fail(ErrorCode::shape,
         "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.params.w_enc = read_matrix(in);
  ckpt.params.b_enc = read_vector(in);
  ckpt.params.w_dec = read_matrix(in);
  ckpt.params.b_dec = read_vector(in);

  ckpt.opt_state.m_w_enc = read_matrix(in);
  ckpt.opt_state.v_w_enc = read_matrix(in);
  ckpt.opt_state.m_b_enc = read_vector(in);
  ckpt.opt_state.v_b_enc = read_vector(in);
  ckpt.opt_state.m_w_dec = read_matrix(in);
  ckpt.opt_state.v_w_dec = read_matrix(in);
  ckpt.opt_state.m_b_dec = read_vector(in);
  ckpt.opt_state.v_b_dec = read_vector(in);
  ckpt.opt_state.step = read_i64(in);

  ckpt.rng_state = read_string(in);
  try {
    ckpt.hyper = hyper_from_json(nlohmann::json::parse(read_string(in)));
    ckpt.train_cfg = cfg_from_json(nlohmann::json::parse(read_string(in)));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::shape, std::string("corrupt checkpoint metadata: ") +
                               e.what());
  }
  if (!in) fail(ErrorCode::shape, "truncated checkpoint: " + path);
  return ckpt;
}

}  // namespace spine
