#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "mcembed/coref.hpp"
#include "mcembed/embed.hpp"

namespace mcembed {

// Dense, or sparse with strictly increasing indices below dim.
class FeatureVector {
 public:
  struct Entry {
    std::uint32_t index;
    double value;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  static FeatureVector dense(std::vector<double> values);
  static FeatureVector sparse(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const { return dim_; }
  bool is_sparse() const { return std::holds_alternative<std::vector<Entry>>(data_); }
  std::span<const double> dense_values() const { return std::get<std::vector<double>>(data_); }
  std::span<const Entry> sparse_entries() const { return std::get<std::vector<Entry>>(data_); }
  std::size_t nonzeros() const;

  double dot(std::span<const double> w) const;
  double dot(const FeatureVector& other) const;
  // w += scale * x
  void add_to(std::span<double> w, double scale) const;
  double squared_norm() const;
  std::vector<double> to_dense() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::variant<std::vector<double>, std::vector<Entry>> data_;
};

// MC embedding lookup. Throws if the encoded MC is not in the store.
FeatureVector mc_feature(const MarkableExample& ex, const EmbeddingStore& mc_store);

enum class OovPolicy { Zero, Strict };

// [vec(left); vec(right)], dimension 2 * store.dim().
FeatureVector concat_feature(const MarkableExample& ex, const EmbeddingStore& word_store,
                             OovPolicy oov = OovPolicy::Zero);

// Two one-hot blocks of width |vocab|: left word, then right word.
FeatureVector bow_feature(const MarkableExample& ex, const Vocabulary& word_vocab);

// Vocabulary of the enclosing words of a training set, every word kept.
Vocabulary enclosing_word_vocab(std::span<const MarkableExample> examples);

enum class Representation { Mc, Concat, Bow };

std::optional<Representation> parse_representation(std::string_view name);
std::string_view to_string(Representation repr);

// A representation bound to its resource: the MC store, the word store, or
// the BOW vocabulary. The referenced resource must outlive the featurizer.
class Featurizer {
 public:
  static Featurizer mc(const EmbeddingStore& mc_store);
  static Featurizer concat(const EmbeddingStore& word_store, OovPolicy oov = OovPolicy::Zero);
  static Featurizer bow(const Vocabulary& word_vocab);

  Representation representation() const { return repr_; }
  FeatureVector operator()(const MarkableExample& ex) const;

 private:
  Representation repr_ = Representation::Mc;
  const EmbeddingStore* store_ = nullptr;
  const Vocabulary* vocab_ = nullptr;
  OovPolicy oov_ = OovPolicy::Zero;
};

}  // namespace mcembed
