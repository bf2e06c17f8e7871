#include <doctest.h>

#include <algorithm>
#include <set>

#include "core/embedding_io.hpp"
#include "core/rng.hpp"
#include "testutil.hpp"

using namespace spine;

TEST_CASE("load parses words and rows in file order") {
  testutil::TempDir dir;
  auto path = dir.file("emb.txt");
  testutil::write_file(path, "a 1 0\nb 0 1\n");

  EmbeddingMatrix emb = load_embeddings(path);
  REQUIRE(emb.vocab == std::vector<std::string>{"a", "b"});
  REQUIRE(emb.dim() == 2);
  CHECK(emb.matrix(0, 0) == 1.0);
  CHECK(emb.matrix(0, 1) == 0.0);
  CHECK(emb.matrix(1, 0) == 0.0);
  CHECK(emb.matrix(1, 1) == 1.0);
}

TEST_CASE("load honors the vocab filter, preserving file order") {
  testutil::TempDir dir;
  auto path = dir.file("emb.txt");
  testutil::write_file(path, "a 1 0\nb 0 1\n");

  std::unordered_set<std::string> filter{"b"};
  LoadOptions options;
  options.vocab_filter = &filter;
  EmbeddingMatrix emb = load_embeddings(path, options);
  REQUIRE(emb.vocab == std::vector<std::string>{"b"});
  CHECK(emb.matrix(0, 1) == 1.0);
}

TEST_CASE("load auto-detects and skips a V d header") {
  testutil::TempDir dir;
  auto path = dir.file("emb.txt");
  testutil::write_file(path, "2 3\nfoo 1 2 3\nbar 4 5 6\n");

  EmbeddingMatrix emb = load_embeddings(path);
  REQUIRE(emb.rows() == 2);
  REQUIRE(emb.dim() == 3);
  CHECK(emb.vocab[0] == "foo");
}

TEST_CASE("load truncates at max_words") {
  testutil::TempDir dir;
  auto path = dir.file("emb.txt");
  testutil::write_file(path, "a 1\nb 2\nc 3\n");

  LoadOptions options;
  options.max_words = 2;
  EmbeddingMatrix emb = load_embeddings(path, options);
  CHECK(emb.vocab == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load rejects malformed files with the line number") {
  testutil::TempDir dir;

  SUBCASE("inconsistent dimension") {
    auto path = dir.file("ragged.txt");
    testutil::write_file(path, "a 1 2\nb 1\n");
    try {
      load_embeddings(path);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::shape);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }

  SUBCASE("non-numeric token") {
    auto path = dir.file("bad.txt");
    testutil::write_file(path, "a 1 2\nb x 3\n");
    CHECK_THROWS_AS(load_embeddings(path), Error);
  }

  SUBCASE("duplicate word") {
    auto path = dir.file("dup.txt");
    testutil::write_file(path, "a 1 2\na 3 4\n");
    try {
      load_embeddings(path);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }

  SUBCASE("empty result") {
    auto path = dir.file("empty.txt");
    testutil::write_file(path, "\n\n");
    CHECK_THROWS_AS(load_embeddings(path), Error);
  }

  SUBCASE("missing file") {
    try {
      load_embeddings(dir.file("nope.txt"));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }
}

TEST_CASE("lowercase folds for filtering and keeps first fold-duplicate") {
  testutil::TempDir dir;
  auto path = dir.file("emb.txt");
  testutil::write_file(path, "Cat 1 0\ncat 2 0\nDog 3 0\n");

  LoadOptions options;
  options.lowercase = true;
  EmbeddingMatrix emb = load_embeddings(path, options);
  REQUIRE(emb.vocab == std::vector<std::string>{"cat", "dog"});
  CHECK(emb.matrix(0, 0) == 1.0);  // first occurrence wins

  std::unordered_set<std::string> filter{"dog"};
  options.vocab_filter = &filter;
  EmbeddingMatrix filtered = load_embeddings(path, options);
  CHECK(filtered.vocab == std::vector<std::string>{"dog"});
}

TEST_CASE("save/load round-trip is exact at precision 17") {
  testutil::TempDir dir;
  EmbeddingMatrix emb;
  emb.vocab = {"one", "two"};
  emb.matrix.resize(2, 2);
  emb.matrix << 1.0, 0.0, 0.0, 1.0 / 3.0;

  auto path = dir.file("roundtrip.txt");
  save_embeddings(emb, path, 17);
  EmbeddingMatrix back = load_embeddings(path);
  REQUIRE(back.vocab == emb.vocab);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(back.matrix(i, j) == emb.matrix(i, j));
    }
  }
}

TEST_CASE("save rejects an empty matrix") {
  testutil::TempDir dir;
  EmbeddingMatrix emb;
  CHECK_THROWS_AS(save_embeddings(emb, dir.file("x.txt"), 6), Error);
}

TEST_CASE("random matrices reload within the printed precision") {
  testutil::TempDir dir;
  Rng rng(99);
  EmbeddingMatrix emb;
  emb.matrix.resize(10, 5);
  for (Eigen::Index i = 0; i < 10; ++i) {
    emb.vocab.push_back("w" + std::to_string(i));
    for (Eigen::Index j = 0; j < 5; ++j) {
      emb.matrix(i, j) = rng.uniform(-1.0, 1.0);
    }
  }

  auto path = dir.file("p6.txt");
  save_embeddings(emb, path, 6);
  EmbeddingMatrix back = load_embeddings(path);
  REQUIRE(back.vocab == emb.vocab);
  for (Eigen::Index i = 0; i < 10; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(std::fabs(back.matrix(i, j) - emb.matrix(i, j)) < 1e-6);
    }
  }

  // and full fidelity at precision 17
  save_embeddings(emb, path, 17);
  back = load_embeddings(path);
  CHECK(back.matrix == emb.matrix);
}

TEST_CASE("select_vocabulary sorts by count, ties by file order") {
  testutil::TempDir dir;
  auto path = dir.file("freq.txt");
  testutil::write_file(path, "a 5\nb 3\nc 1\n");

  CHECK(select_vocabulary(path, 2) == std::vector<std::string>{"a", "b"});
  CHECK(select_vocabulary(path, 0).empty());
  CHECK_THROWS_AS(select_vocabulary(path, 4), Error);

  SUBCASE("count-free lists keep file order") {
    auto plain = dir.file("plain.txt");
    testutil::write_file(plain, "x\ny\nz\n");
    CHECK(select_vocabulary(plain, 2) == std::vector<std::string>{"x", "y"});
  }
}

TEST_CASE("select_vocabulary matches a brute-force sort on shuffled input") {
  testutil::TempDir dir;
  Rng rng(7);

  std::vector<std::pair<std::string, int>> entries;
  for (int i = 0; i < 100; ++i) {
    entries.push_back({"word" + std::to_string(i),
                       static_cast<int>(rng.integer(50))});
  }
  rng.shuffle(entries);

  std::string text;
  for (const auto& [word, count] : entries) {
    text += word + " " + std::to_string(count) + "\n";
  }
  auto path = dir.file("freq.txt");
  testutil::write_file(path, text);

  // independent oracle: stable sort by count descending
  auto expected = entries;
  std::stable_sort(expected.begin(), expected.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  std::vector<std::string> expected_words;
  for (int i = 0; i < 10; ++i) expected_words.push_back(expected[i].first);

  CHECK(select_vocabulary(path, 10) == expected_words);
}

TEST_CASE("split_train_dev is a pure function of vocab, n_train, seed") {
  std::vector<std::string> vocab;
  for (int i = 0; i < 170; ++i) vocab.push_back("w" + std::to_string(i));

  VocabSplit a = split_train_dev(vocab, 150, 42);
  VocabSplit b = split_train_dev(vocab, 150, 42);
  CHECK(a.train == b.train);
  CHECK(a.dev == b.dev);
  REQUIRE(a.train.size() == 150);
  REQUIRE(a.dev.size() == 20);

  // disjoint and covering
  std::set<std::string> all(a.train.begin(), a.train.end());
  for (const auto& w : a.dev) {
    CHECK(all.insert(w).second);
  }
  CHECK(all.size() == vocab.size());

  VocabSplit c = split_train_dev(vocab, 150, 43);
  CHECK(a.train != c.train);

  SUBCASE("n_train = |vocab| leaves an empty dev set") {
    VocabSplit full = split_train_dev(vocab, vocab.size(), 1);
    CHECK(full.dev.empty());
    CHECK(full.train.size() == vocab.size());
  }

  SUBCASE("n_train beyond the vocabulary is an error") {
    CHECK_THROWS_AS(split_train_dev(vocab, vocab.size() + 1, 1), Error);
  }
}
