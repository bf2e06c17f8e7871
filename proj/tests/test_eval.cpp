#include <doctest.h>

#include <cmath>

#include "core/eval.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace spine;

namespace {

/// Word-per-class blob fixture: each "sentence" is a single word whose
/// vector is a noisy sample of its class center.
struct BlobFixture {
  EmbeddingMatrix emb;
  LabeledTextSet train, dev, test;
};

BlobFixture make_blobs(int n_classes, int per_class, double separation,
                       double noise, uint64_t seed) {
  Rng rng(seed);
  BlobFixture fx;
  int d = 4;
  Matrix centers(n_classes, d);
  for (int c = 0; c < n_classes; ++c) {
    for (int j = 0; j < d; ++j) centers(c, j) = 0.0;
    centers(c, c % d) = separation;
  }

  int counter = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      std::string word = "blob" + std::to_string(counter++);
      fx.emb.vocab.push_back(word);
      Vector v(d);
      for (int j = 0; j < d; ++j) {
        v(j) = centers(c, j) + noise * rng.normal();
      }
      fx.emb.matrix.conservativeResize(fx.emb.vocab.size(), d);
      fx.emb.matrix.row(static_cast<Eigen::Index>(fx.emb.vocab.size() - 1)) =
          v.transpose();

      std::string label = "class" + std::to_string(c);
      int bucket = i % 5;
      LabeledTextSet& target =
          bucket < 3 ? fx.train : (bucket == 3 ? fx.dev : fx.test);
      target.tokens.push_back({word});
      target.labels.push_back(label);
    }
  }
  return fx;
}

}  // namespace

TEST_CASE("cosine similarity") {
  Vector u(3), v(3);

  SUBCASE("self-similarity is 1") {
    u << 1, 2, 3;
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("orthogonal unit vectors score 0") {
    u << 1, 0, 0;
    v << 0, 1, 0;
    CHECK(cosine_similarity(u, v) == 0.0);
  }

  SUBCASE("zero vectors yield 0 with the flag set") {
    u << 0, 0, 0;
    v << 1, 2, 3;
    bool flag = false;
    CHECK(cosine_similarity(u, v, &flag) == 0.0);
    CHECK(flag);
  }

  SUBCASE("matches a loop oracle and is scale invariant") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      Vector a(10), b(10);
      for (int i = 0; i < 10; ++i) {
        a(i) = rng.uniform(-2, 2);
        b(i) = rng.uniform(-2, 2);
      }
      double dot = 0, na = 0, nb = 0;
      for (int i = 0; i < 10; ++i) {
        dot += a(i) * b(i);
        na += a(i) * a(i);
        nb += b(i) * b(i);
      }
      double expected = dot / (std::sqrt(na) * std::sqrt(nb));
      CHECK(cosine_similarity(a, b) ==
            doctest::Approx(expected).epsilon(1e-13));

      double alpha = rng.uniform(0.1, 5.0);
      double beta = rng.uniform(0.1, 5.0);
      CHECK(std::fabs(cosine_similarity(alpha * a, beta * b) -
                      cosine_similarity(a, b)) < 1e-12);
    }
  }

  SUBCASE("length mismatch is rejected") {
    Vector a(2), b(3);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS(cosine_similarity(a, b), Error);
  }
}

TEST_CASE("spearman rho") {
  SUBCASE("identity gives exactly 1, reversal exactly -1") {
    std::vector<double> x = {3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3};
    std::vector<double> same = x;
    CHECK(spearman_rho(x, same) == 1.0);

    // anti-monotone pairing: negation reverses every rank
    std::vector<double> negated(x.size());
    for (size_t i = 0; i < x.size(); ++i) negated[i] = -x[i];
    CHECK(spearman_rho(x, negated) == -1.0);

    // and the literal reversed list of a sorted sequence
    std::vector<double> ascending = {1.0, 2.0, 3.5, 7.0, 9.0, 12.5};
    std::vector<double> descending(ascending.rbegin(), ascending.rend());
    CHECK(spearman_rho(ascending, descending) == -1.0);
  }

  SUBCASE("matches the rank-then-Pearson oracle, ties included") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      size_t n = 50;
      std::vector<double> x(n), y(n);
      for (size_t i = 0; i < n; ++i) {
        // quantized draws inject plenty of ties
        x[i] = std::floor(rng.uniform(0, 10));
        y[i] = std::floor(rng.uniform(0, 10));
      }
      double naive = oracles::spearman_naive(x, y);
      if (!std::isfinite(naive)) continue;  // degenerate constant vector
      CHECK(spearman_rho(x, y) == doctest::Approx(naive).epsilon(1e-12));
    }
  }

  SUBCASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(spearman_rho({1.0}, {2.0}), Error);
    CHECK_THROWS_AS(spearman_rho({1, 2, 3}, {1, 2}), Error);
    CHECK_THROWS_AS(spearman_rho({1, 1, 1}, {1, 2, 3}), Error);
  }
}

TEST_CASE("word similarity eval") {
  testutil::TempDir dir;

  SUBCASE("a rank-aligned fixture reaches rho = 1") {
    // cosine to the first axis grows with the human score
    EmbeddingMatrix emb;
    emb.vocab = {"anchor", "p1", "p2", "p3", "p4"};
    emb.matrix.resize(5, 2);
    emb.matrix << 1.0, 0.0,
        1.0, 0.1,
        1.0, 0.4,
        1.0, 1.0,
        1.0, 2.5;

    std::vector<WordPair> pairs = {{"anchor", "p1", 4.0},
                                   {"anchor", "p2", 3.0},
                                   {"anchor", "p3", 2.0},
                                   {"anchor", "p4", 1.0}};
    SimilarityResult result = word_similarity_eval(emb, pairs);
    CHECK(result.rho == 1.0);
    CHECK(result.pairs_used == 4);
    CHECK(result.coverage == 1.0);
  }

  SUBCASE("out-of-vocabulary pairs are dropped and counted") {
    EmbeddingMatrix emb;
    emb.vocab = {"a", "b", "c"};
    emb.matrix = Matrix::Identity(3, 3);
    std::vector<WordPair> pairs = {{"a", "b", 1.0},
                                   {"a", "c", 2.0},
                                   {"a", "zzz", 3.0},
                                   {"b", "c", 4.0}};
    SimilarityResult result = word_similarity_eval(emb, pairs);
    CHECK(result.pairs_used == 3);
    CHECK(result.pairs_total == 4);
    CHECK(result.coverage == doctest::Approx(0.75));
  }

  SUBCASE("all pairs out of vocabulary is an error") {
    EmbeddingMatrix emb;
    emb.vocab = {"a"};
    emb.matrix = Matrix::Identity(1, 1);
    std::vector<WordPair> pairs = {{"x", "y", 1.0}};
    CHECK_THROWS_AS(word_similarity_eval(emb, pairs), Error);
  }

  SUBCASE("pair files parse tab- or space-separated") {
    auto path = dir.file("pairs.tsv");
    testutil::write_file(path, "cat\tdog\t7.5\nsun moon 4.25\n");
    auto pairs = load_word_pairs(path);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].word1 == "cat");
    CHECK(pairs[0].human_score == 7.5);
    CHECK(pairs[1].word2 == "moon");
  }
}

TEST_CASE("sentence features") {
  EmbeddingMatrix emb;
  emb.vocab = {"up", "down", "flat"};
  emb.matrix.resize(3, 2);
  emb.matrix << 1.0, 2.0, -1.0, -2.0, 0.5, 0.5;

  SUBCASE("a single in-vocab word is its own vector") {
    Vector f = sentence_features({"up"}, emb);
    CHECK(f(0) == 1.0);
    CHECK(f(1) == 2.0);
  }

  SUBCASE("opposite vectors cancel") {
    Vector f = sentence_features({"up", "down"}, emb);
    CHECK(f.norm() == 0.0);
  }

  SUBCASE("OOV tokens contribute zeros but count in the denominator") {
    Vector f = sentence_features({"up", "missing", "missing", "missing"}, emb);
    CHECK(f(0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(f(1) == doctest::Approx(0.5).epsilon(1e-15));

    bool all_oov = false;
    Vector g = sentence_features({"missing"}, emb, &all_oov);
    CHECK(g.norm() == 0.0);
    CHECK(all_oov);
  }

  SUBCASE("matches a loop-mean oracle on random sentences") {
    Rng rng(41);
    std::vector<std::string> sentence;
    for (int i = 0; i < 5; ++i) {
      sentence.push_back(emb.vocab[rng.integer(3)]);
    }
    Vector expected = Vector::Zero(2);
    auto index = vocab_index(emb.vocab);
    for (const auto& tok : sentence) {
      expected += emb.matrix.row(index.at(tok)).transpose();
    }
    expected /= 5.0;
    CHECK((sentence_features(sentence, emb) - expected).norm() < 1e-15);
  }

  SUBCASE("concatenation equals the length-weighted mean of the parts") {
    std::vector<std::string> first = {"up", "flat"};
    std::vector<std::string> second = {"down", "flat", "up"};
    std::vector<std::string> both = {"up", "flat", "down", "flat", "up"};
    Vector f1 = sentence_features(first, emb);
    Vector f2 = sentence_features(second, emb);
    Vector combined = sentence_features(both, emb);
    Vector weighted = (2.0 * f1 + 3.0 * f2) / 5.0;
    CHECK((combined - weighted).norm() < 1e-15);
  }
}

TEST_CASE("linear classifier") {
  SUBCASE("a separable 2-class set is fit perfectly at weak regularization") {
    BlobFixture fx = make_blobs(2, 40, 5.0, 0.1, 51);
    LinearClassifier model =
        train_linear_classifier(fx.train, fx.emb, {1e-6}, fx.dev);
    CHECK(model.train_accuracy == 1.0);
    CHECK(evaluate_classifier(model, fx.train, fx.emb) ==
          model.train_accuracy);
  }

  SUBCASE("3-class blobs with wide separation reach 90% test accuracy") {
    BlobFixture fx = make_blobs(3, 50, 3.0, 1.0, 52);
    LinearClassifier model = train_linear_classifier(
        fx.train, fx.emb, {1e-4, 1e-2, 1.0}, fx.dev);
    double acc = evaluate_classifier(model, fx.test, fx.emb);
    CHECK(acc >= 0.9);
  }

  SUBCASE("shuffled labels hover near chance on dev") {
    Rng rng(53);
    BlobFixture fx = make_blobs(2, 150, 3.0, 1.0, 54);
    // destroy the signal
    for (auto& label : fx.train.labels) {
      label = "class" + std::to_string(rng.integer(2));
    }
    for (auto& label : fx.dev.labels) {
      label = "class" + std::to_string(rng.integer(2));
    }
    LinearClassifier model =
        train_linear_classifier(fx.train, fx.emb, {1e-2}, fx.dev);
    CHECK(model.dev_accuracy > 0.4);
    CHECK(model.dev_accuracy < 0.6);
  }

  SUBCASE("training is deterministic") {
    BlobFixture fx = make_blobs(3, 30, 3.0, 1.0, 55);
    LinearClassifier a =
        train_linear_classifier(fx.train, fx.emb, {1e-3, 1e-1}, fx.dev);
    LinearClassifier b =
        train_linear_classifier(fx.train, fx.emb, {1e-3, 1e-1}, fx.dev);
    CHECK(a.weights == b.weights);
    CHECK(a.chosen_reg == b.chosen_reg);
    CHECK(evaluate_classifier(a, fx.test, fx.emb) ==
          evaluate_classifier(b, fx.test, fx.emb));
  }

  SUBCASE("single-class training data is rejected") {
    BlobFixture fx = make_blobs(2, 10, 3.0, 0.5, 56);
    for (auto& label : fx.train.labels) label = "only";
    CHECK_THROWS_AS(
        train_linear_classifier(fx.train, fx.emb, {1e-2}, fx.dev), Error);
  }

  SUBCASE("unseen test labels are rejected") {
    BlobFixture fx = make_blobs(2, 20, 3.0, 0.5, 57);
    LinearClassifier model =
        train_linear_classifier(fx.train, fx.emb, {1e-2}, fx.dev);
    fx.test.labels[0] = "martian";
    CHECK_THROWS_AS(evaluate_classifier(model, fx.test, fx.emb), Error);
  }
}

TEST_CASE("labeled text loading and feature export") {
  testutil::TempDir dir;
  auto path = dir.file("data.tsv");
  testutil::write_file(path, "pos\tgood great fine\nneg\tbad awful\n");

  LabeledTextSet set = load_labeled_text(path);
  REQUIRE(set.labels == std::vector<std::string>{"pos", "neg"});
  CHECK(set.tokens[0].size() == 3);
  CHECK(set.tokens[1][1] == "awful");

  SUBCASE("rows without a tab are rejected") {
    auto bad = dir.file("bad.tsv");
    testutil::write_file(bad, "no-tab-here\n");
    CHECK_THROWS_AS(load_labeled_text(bad), Error);
  }

  SUBCASE("export writes a header and one row per example") {
    EmbeddingMatrix emb;
    emb.vocab = {"good", "bad"};
    emb.matrix.resize(2, 2);
    emb.matrix << 1.0, 0.0, 0.0, 1.0;
    auto out = dir.file("features.csv");
    export_features_csv(set, emb, out);
    std::string content = testutil::read_file(out);
    CHECK(content.find("label,f0,f1\n") == 0);
    size_t rows = std::count(content.begin(), content.end(), '\n');
    CHECK(rows == 3);  // header + 2 examples
    // first example: only "good" is in vocab, mean over 3 tokens
    CHECK(content.find("pos,0.33333333333333331,0") != std::string::npos);
  }
}
