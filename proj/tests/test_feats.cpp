#include "doctest.h"
#include "mcembed/error.hpp"
#include "mcembed/feats.hpp"
#include "mcembed/rng.hpp"

using namespace mcembed;

namespace {

EmbeddingStore store_with(std::vector<std::string> tokens, std::size_t dim) {
  std::vector<Vocabulary::Entry> entries;
  for (std::size_t i = 0; i < tokens.size(); ++i) entries.push_back({tokens[i], tokens.size() - i});
  EmbeddingStore s(Vocabulary(std::move(entries)), dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) s.input(i)[d] = static_cast<double>(10 * i + d);
  }
  return s;
}

MarkableExample ex(const char* l, const char* r) {
  return MarkableExample{AnimacyLabel::Animate, l, r, "x"};
}

}  // namespace

TEST_CASE("feature vector validation") {
  CHECK_THROWS_AS(FeatureVector::sparse(3, {{1, 1.0}, {1, 2.0}}), Error);
  CHECK_THROWS_AS(FeatureVector::sparse(3, {{2, 1.0}, {1, 2.0}}), Error);
  CHECK_THROWS_AS(FeatureVector::sparse(3, {{3, 1.0}}), Error);
  CHECK_THROWS_AS(FeatureVector::dense({1.0, NAN}), Error);
  CHECK_NOTHROW(FeatureVector::sparse(3, {}));
}

TEST_CASE("property: sparse and dense operations agree") {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t dim = 1 + rng.below(20);
    const auto random_sparse = [&] {
      std::vector<FeatureVector::Entry> e;
      for (std::uint32_t i = 0; i < dim; ++i) {
        if (rng.bernoulli(0.3)) e.push_back({i, rng.uniform(-2, 2)});
      }
      return FeatureVector::sparse(dim, e);
    };
    const auto a = random_sparse();
    const auto b = random_sparse();
    const auto ad = FeatureVector::dense(a.to_dense());
    const auto bd = FeatureVector::dense(b.to_dense());
    CHECK(a.dot(b) == doctest::Approx(ad.dot(bd)));
    CHECK(a.dot(bd) == doctest::Approx(ad.dot(b)));
    CHECK(a.squared_norm() == doctest::Approx(ad.squared_norm()));
    CHECK(a.nonzeros() <= dim);
    std::vector<double> w1(dim, 0.5), w2(dim, 0.5);
    a.add_to(w1, -1.5);
    ad.add_to(w2, -1.5);
    CHECK(w1 == w2);
  }
  CHECK_THROWS_AS(FeatureVector::dense({1, 2}).dot(std::vector<double>{1}), Error);
}

TEST_CASE("mc_feature looks up the encoded MC") {
  const auto s = store_with({"helped*to", "a*b"}, 3);
  CHECK(mc_feature(ex("a", "b"), s).to_dense() == std::vector<double>{10, 11, 12});
  CHECK_THROWS_WITH_AS(mc_feature(ex("x", "y"), s), "MC not in embedding vocabulary: x*y", Error);
}

TEST_CASE("concat_feature stacks left then right") {
  const auto s = store_with({"helped", "to"}, 2);
  CHECK(concat_feature(ex("helped", "to"), s).to_dense() == std::vector<double>{0, 1, 10, 11});
  CHECK(concat_feature(ex("to", "zzz"), s).to_dense() == std::vector<double>{10, 11, 0, 0});
  CHECK_THROWS_AS(concat_feature(ex("to", "zzz"), s, OovPolicy::Strict), Error);
}

TEST_CASE("bow_feature has two one-hot blocks") {
  const std::vector<MarkableExample> train = {ex("b", "a"), ex("a", "c"), ex("a", "a")};
  const auto vocab = enclosing_word_vocab(train);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.token(0) == "a");
  const auto f = bow_feature(ex("b", "a"), vocab);
  CHECK(f.dim() == 6);
  CHECK(f.is_sparse());
  CHECK(f.to_dense() == std::vector<double>{0, 1, 0, 1, 0, 0});
  const auto same = bow_feature(ex("a", "a"), vocab);
  CHECK(same.nonzeros() == 2);
  CHECK(bow_feature(ex("q", "r"), vocab).nonzeros() == 0);
}

TEST_CASE("representation names") {
  CHECK(parse_representation("mc") == Representation::Mc);
  CHECK(parse_representation("concat") == Representation::Concat);
  CHECK(parse_representation("bow") == Representation::Bow);
  CHECK_FALSE(parse_representation("MC").has_value());
  CHECK(to_string(Representation::Concat) == "concat");
}

TEST_CASE("featurizer dispatch") {
  const auto mcs = store_with({"a*b"}, 2);
  const auto words = store_with({"a", "b"}, 2);
  const auto vocab = enclosing_word_vocab(std::vector<MarkableExample>{ex("a", "b")});
  CHECK(Featurizer::mc(mcs)(ex("a", "b")).dim() == 2);
  CHECK(Featurizer::concat(words)(ex("a", "b")).dim() == 4);
  CHECK(Featurizer::bow(vocab)(ex("a", "b")).dim() == 4);
  CHECK(Featurizer::bow(vocab).representation() == Representation::Bow);
}
