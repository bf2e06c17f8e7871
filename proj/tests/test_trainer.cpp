#include <doctest.h>

#include <cmath>

#include "core/checkpoint.hpp"
#include "core/embedding_io.hpp"
#include "core/rng.hpp"
#include "core/trainer.hpp"
#include "synthetic.hpp"
#include "testutil.hpp"

using namespace spine;

namespace {

VocabSplit full_train_split(const EmbeddingMatrix& emb) {
  return VocabSplit{emb.vocab, {}};
}

bool params_equal(const AutoencoderParams& a, const AutoencoderParams& b) {
  return a.w_enc == b.w_enc && a.b_enc == b.b_enc && a.w_dec == b.w_dec &&
         a.b_dec == b.b_dec;
}

}  // namespace

TEST_CASE("init_params") {
  SUBCASE("same seed gives bitwise-identical parameters") {
    AutoencoderParams a = init_params(10, 20, 5);
    AutoencoderParams b = init_params(10, 20, 5);
    CHECK(params_equal(a, b));
    AutoencoderParams c = init_params(10, 20, 6);
    CHECK_FALSE(a.w_enc == c.w_enc);
  }

  SUBCASE("biases start at zero") {
    AutoencoderParams p = init_params(7, 11, 1);
    CHECK((p.b_enc.array() == 0.0).all());
    CHECK((p.b_dec.array() == 0.0).all());
  }

  SUBCASE("weights are centered and bounded by the fan half-width") {
    AutoencoderParams p = init_params(100, 100, 2);
    double bound = std::sqrt(6.0 / 200.0);
    CHECK(p.w_enc.array().abs().maxCoeff() <= bound);
    CHECK(p.w_dec.array().abs().maxCoeff() <= bound);
    CHECK(std::fabs(p.w_enc.mean()) < 0.01);  // 1e4 samples
  }
}

TEST_CASE("train: a vanishing learning rate leaves parameters in place") {
  EmbeddingMatrix emb = synthetic::prototype_data(30, 8, 3, 11);
  Hyperparams hyper;
  hyper.hidden = 6;
  hyper.sigma = 0.0;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 10;
  cfg.learning_rate = 1e-300;
  cfg.seed = 3;

  TrainResult result = train(emb, full_train_split(emb), hyper, cfg);
  AutoencoderParams fresh = init_params(8, 6, derive_seed(cfg.seed, "init"));
  CHECK((result.params.w_enc - fresh.w_enc).array().abs().maxCoeff() < 1e-250);
  REQUIRE(result.metrics.epochs.size() == 1);
  CHECK(result.metrics.epochs[0].total > 0.0);
  CHECK(std::isnan(result.metrics.epochs[0].dev_rl));
}

TEST_CASE("train: loss on the synthetic prototype set halves") {
  EmbeddingMatrix emb = synthetic::prototype_data(200, 20, 5, 21);
  Hyperparams hyper;
  hyper.hidden = 50;
  hyper.rho_star = 0.15;
  hyper.sigma = 0.1;
  hyper.lambda1 = 1.0;
  hyper.lambda2 = 1.0;
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-3;
  cfg.seed = 9;

  TrainResult result = train(emb, full_train_split(emb), hyper, cfg);
  const auto& first = result.metrics.epochs.front();
  const auto& last = result.metrics.epochs.back();
  CHECK(last.total <= 0.5 * first.total);
  CHECK(last.rl < first.rl);
}

TEST_CASE("train: reported epoch metrics are recomputable") {
  EmbeddingMatrix emb = synthetic::prototype_data(40, 10, 4, 31);
  Hyperparams hyper;
  hyper.hidden = 12;
  hyper.sigma = 0.2;
  VocabSplit split = split_train_dev(emb.vocab, 30, 77);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 15;

  TrainResult result = train(emb, split, hyper, cfg);
  const EpochMetrics& last = result.metrics.epochs.back();

  auto index = vocab_index(emb.vocab);
  Matrix x_train(30, 10), x_dev(10, 10);
  for (size_t i = 0; i < split.train.size(); ++i) {
    x_train.row(static_cast<Eigen::Index>(i)) =
        emb.matrix.row(index.at(split.train[i]));
  }
  for (size_t i = 0; i < split.dev.size(); ++i) {
    x_dev.row(static_cast<Eigen::Index>(i)) =
        emb.matrix.row(index.at(split.dev[i]));
  }

  // clean forward pass with the stored parameters
  Matrix z = encode(x_train, result.params);
  CHECK(last.rl == reconstruction_loss(x_train, decode(z, result.params)));
  CHECK(last.asl == average_sparsity_loss(z, hyper.rho_star));
  CHECK(last.psl == partial_sparsity_loss(z));
  CHECK(last.sparsity_fraction == sparsity_fraction(z));
  Matrix z_dev = encode(x_dev, result.params);
  CHECK(last.dev_rl ==
        reconstruction_loss(x_dev, decode(z_dev, result.params)));
}

TEST_CASE("train: identical config reproduces bitwise-identical results") {
  EmbeddingMatrix emb = synthetic::prototype_data(40, 10, 4, 41);
  Hyperparams hyper;
  hyper.hidden = 8;
  hyper.sigma = 0.3;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  cfg.seed = 123;

  VocabSplit split = split_train_dev(emb.vocab, 35, 5);
  TrainResult a = train(emb, split, hyper, cfg);
  TrainResult b = train(emb, split, hyper, cfg);
  CHECK(params_equal(a.params, b.params));
  REQUIRE(a.metrics.epochs.size() == b.metrics.epochs.size());
  for (size_t i = 0; i < a.metrics.epochs.size(); ++i) {
    CHECK(a.metrics.epochs[i].total == b.metrics.epochs[i].total);
    CHECK(a.metrics.epochs[i].dev_rl == b.metrics.epochs[i].dev_rl);
  }
  CHECK(a.rng_state == b.rng_state);
}

TEST_CASE("train: non-finite loss aborts with coordinates") {
  EmbeddingMatrix emb;
  emb.vocab = {"huge", "huger"};
  emb.matrix.resize(2, 2);
  emb.matrix << 1e308, 1e308, -1e308, 1e308;
  Hyperparams hyper;
  hyper.hidden = 2;
  hyper.sigma = 0.0;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;

  try {
    train(emb, full_train_split(emb), hyper, cfg);
    FAIL("expected numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numeric);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}

TEST_CASE("transform") {
  SUBCASE("zero parameters give all-zero activations") {
    EmbeddingMatrix emb = synthetic::prototype_data(10, 4, 2, 51);
    AutoencoderParams p;
    p.w_enc = Matrix::Zero(4, 6);
    p.b_enc = Vector::Zero(6);
    p.w_dec = Matrix::Zero(6, 4);
    p.b_dec = Vector::Zero(4);
    SparseEmbeddings sparse = transform(emb, p);
    CHECK(sparse.vocab == emb.vocab);
    CHECK((sparse.z.array() == 0.0).all());
  }

  SUBCASE("output width is the hidden size") {
    EmbeddingMatrix emb = synthetic::prototype_data(150, 30, 5, 52);
    AutoencoderParams p = init_params(30, 100, 1);
    SparseEmbeddings sparse = transform(emb, p);
    CHECK(sparse.z.rows() == 150);
    CHECK(sparse.z.cols() == 100);
    CHECK((sparse.z.array() >= 0.0).all());
    CHECK((sparse.z.array() <= 1.0).all());
  }

  SUBCASE("transform + decode reproduces the recorded train loss") {
    EmbeddingMatrix emb = synthetic::prototype_data(30, 8, 3, 53);
    Hyperparams hyper;
    hyper.hidden = 10;
    hyper.sigma = 0.1;
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.seed = 2;
    TrainResult result = train(emb, full_train_split(emb), hyper, cfg);

    SparseEmbeddings sparse = transform(emb, result.params);
    double rl =
        reconstruction_loss(emb.matrix, decode(sparse.z, result.params));
    CHECK(rl == result.metrics.epochs.back().rl);
  }

  SUBCASE("dimension mismatch is rejected") {
    EmbeddingMatrix emb = synthetic::prototype_data(10, 4, 2, 54);
    AutoencoderParams p = init_params(5, 3, 1);
    CHECK_THROWS_AS(transform(emb, p), Error);
  }
}

TEST_CASE("sparsity statistics") {
  SUBCASE("all zeros") {
    CHECK(sparsity_fraction(Matrix::Zero(3, 4)) == 1.0);
    CHECK(mean_active_per_word(Matrix::Zero(3, 4)) == 0.0);
  }

  SUBCASE("counting") {
    Matrix z(2, 2);
    z << 0.0, 0.5, 0.25, 0.75;
    CHECK(sparsity_fraction(z) == 0.25);
    CHECK(mean_active_per_word(z) == 1.5);
    CHECK(sparsity_fraction(z, 0.3) == 0.5);
  }

  SUBCASE("matches a counting oracle on random data") {
    Rng rng(55);
    Matrix z(20, 30);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        z(i, j) = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
      }
    }
    int zeros = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        if (z(i, j) <= 0.0) ++zeros;
      }
    }
    CHECK(sparsity_fraction(z) ==
          static_cast<double>(zeros) / static_cast<double>(z.size()));
    CHECK(mean_active_per_word(z) ==
          static_cast<double>(z.size() - zeros) /
              static_cast<double>(z.rows()));
  }
}

TEST_CASE("metrics CSV has the documented columns") {
  testutil::TempDir dir;
  TrainingMetrics metrics;
  metrics.epochs.push_back({1, 0.5, 0.1, 0.2, 0.8, 0.6, 0.25, 3.5});
  auto path = dir.file("metrics.csv");
  write_metrics_csv(metrics, path);
  std::string content = testutil::read_file(path);
  CHECK(content.find("epoch,rl,asl,psl,total,dev_rl,sparsity_fraction,"
                     "mean_active_per_word") == 0);
  CHECK(content.find("\n1,0.5,0.1,0.2,0.8,0.6,0.25,3.5") !=
        std::string::npos);
}

TEST_CASE("checkpoint round-trip preserves everything") {
  testutil::TempDir dir;
  EmbeddingMatrix emb = synthetic::prototype_data(20, 6, 2, 61);
  Hyperparams hyper;
  hyper.hidden = 5;
  hyper.sigma = 0.25;
  hyper.lambda1 = 0.5;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.seed = 8;
  TrainResult result = train(emb, full_train_split(emb), hyper, cfg);

  Checkpoint ckpt;
  ckpt.params = result.params;
  ckpt.opt_state = result.opt_state;
  ckpt.rng_state = result.rng_state;
  ckpt.hyper = hyper;
  ckpt.train_cfg = cfg;

  auto path = dir.file("model.ckpt");
  save_checkpoint(ckpt, path);
  Checkpoint back = load_checkpoint(path);

  CHECK(params_equal(back.params, ckpt.params));
  CHECK(back.opt_state.m_w_enc == ckpt.opt_state.m_w_enc);
  CHECK(back.opt_state.v_b_dec == ckpt.opt_state.v_b_dec);
  CHECK(back.opt_state.step == ckpt.opt_state.step);
  CHECK(back.rng_state == ckpt.rng_state);
  CHECK(back.hyper.sigma == hyper.sigma);
  CHECK(back.hyper.lambda1 == hyper.lambda1);
  CHECK(back.train_cfg.batch_size == cfg.batch_size);
  CHECK(back.train_cfg.seed == cfg.seed);

  SUBCASE("sidecar exists and is JSON") {
    std::string sidecar = testutil::read_file(path + ".json");
    CHECK(sidecar.find("\"hidden\": 5") != std::string::npos);
  }

  SUBCASE("garbage files are rejected") {
    auto bad = dir.file("bad.ckpt");
    testutil::write_file(bad, "not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(bad), Error);
  }
}

TEST_CASE("grid search") {
  EmbeddingMatrix emb = synthetic::prototype_data(60, 8, 3, 71);
  VocabSplit split = split_train_dev(emb.vocab, 48, 5);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 16;
  cfg.seed = 4;

  // scorer that prefers smaller hidden layers, fully deterministic
  CoherenceScorer scorer = [](const SparseEmbeddings& sparse) {
    return -static_cast<double>(sparse.z.cols());
  };

  GridSearchSpec spec;
  spec.rho_star_values = {0.15};
  spec.hidden_values = {4, 6};
  spec.sigma_values = {0.0, 0.2};
  spec.lambda1_values = {1.0};
  spec.lambda2_values = {1.0};
  spec.rl_cap = 100.0;
  spec.epochs_fraction = 0.5;

  SUBCASE("a grid of one ranks that candidate first when under the cap") {
    GridSearchSpec single = spec;
    single.hidden_values = {4};
    single.sigma_values = {0.0};
    auto results = grid_search(emb, split, single, cfg, scorer);
    REQUIRE(results.size() == 1);
    CHECK(results[0].admitted);
    CHECK(results[0].hyper.hidden == 4);
  }

  SUBCASE("an unattainable cap yields no admissions but full diagnostics") {
    GridSearchSpec strict = spec;
    strict.rl_cap = 1e-12;
    auto results = grid_search(emb, split, strict, cfg, scorer);
    REQUIRE(results.size() == 4);
    for (const auto& cell : results) {
      CHECK_FALSE(cell.admitted);
      CHECK(std::isfinite(cell.dev_rl));
    }
  }

  SUBCASE("ranking matches a brute-force re-evaluation") {
    auto results = grid_search(emb, split, spec, cfg, scorer);
    REQUIRE(results.size() == 4);

    // recompute each admitted cell's criteria independently
    TrainConfig cell_cfg = cfg;
    cell_cfg.epochs = 20;  // epochs * fraction
    for (const auto& cell : results) {
      TrainResult redo = train(emb, split, cell.hyper, cell_cfg);
      CHECK(cell.dev_rl == redo.metrics.epochs.back().dev_rl);
      CHECK(cell.admitted == (cell.dev_rl <= spec.rl_cap));
    }
    for (size_t i = 0; i + 1 < results.size(); ++i) {
      if (results[i].admitted && results[i + 1].admitted) {
        CHECK(results[i].coherence >= results[i + 1].coherence);
      }
      // admitted cells sort before rejected ones
      CHECK(results[i].admitted >= results[i + 1].admitted);
    }
  }

  SUBCASE("threaded evaluation returns the same cells") {
    auto seq = grid_search(emb, split, spec, cfg, scorer, 1);
    auto par = grid_search(emb, split, spec, cfg, scorer, 4);
    REQUIRE(seq.size() == par.size());
    for (size_t i = 0; i < seq.size(); ++i) {
      CHECK(seq[i].dev_rl == par[i].dev_rl);
      CHECK(seq[i].hyper.hidden == par[i].hyper.hidden);
      CHECK(seq[i].hyper.sigma == par[i].hyper.sigma);
    }
  }

  SUBCASE("empty candidate lists are rejected") {
    GridSearchSpec bad = spec;
    bad.sigma_values.clear();
    CHECK_THROWS_AS(grid_search(emb, split, bad, cfg, scorer), Error);
  }
}
