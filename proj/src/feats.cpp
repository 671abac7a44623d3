#include "mcembed/feats.hpp"

#include <algorithm>
#include <cmath>

#include "mcembed/error.hpp"

namespace mcembed {

FeatureVector FeatureVector::dense(std::vector<double> values) {
  for (const double v : values) {
    if (!std::isfinite(v)) throw Error("feature value is not finite");
  }
  FeatureVector fv;
  fv.dim_ = values.size();
  fv.data_ = std::move(values);
  return fv;
}

FeatureVector FeatureVector::sparse(std::size_t dim, std::vector<Entry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index >= dim) throw Error("sparse feature index out of range");
    if (i > 0 && entries[i].index <= entries[i - 1].index) {
      throw Error("sparse feature indices must be strictly increasing");
    }
    if (!std::isfinite(entries[i].value)) throw Error("feature value is not finite");
  }
  FeatureVector fv;
  fv.dim_ = dim;
  fv.data_ = std::move(entries);
  return fv;
}

std::size_t FeatureVector::nonzeros() const {
  if (is_sparse()) return sparse_entries().size();
  const auto v = dense_values();
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

double FeatureVector::dot(std::span<const double> w) const {
  if (w.size() != dim_) throw Error("feature dimension mismatch");
  double s = 0.0;
  if (is_sparse()) {
    for (const auto& e : sparse_entries()) s += e.value * w[e.index];
  } else {
    const auto v = dense_values();
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * w[i];
  }
  return s;
}

double FeatureVector::dot(const FeatureVector& other) const {
  if (other.dim_ != dim_) throw Error("feature dimension mismatch");
  if (!other.is_sparse()) return dot(other.dense_values());
  if (!is_sparse()) return other.dot(dense_values());
  const auto a = sparse_entries();
  const auto b = other.sparse_entries();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index < b[j].index) {
      ++i;
    } else if (b[j].index < a[i].index) {
      ++j;
    } else {
      s += a[i++].value * b[j++].value;
    }
  }
  return s;
}

void FeatureVector::add_to(std::span<double> w, double scale) const {
  if (w.size() != dim_) throw Error("feature dimension mismatch");
  if (is_sparse()) {
    for (const auto& e : sparse_entries()) w[e.index] += scale * e.value;
  } else {
    const auto v = dense_values();
    for (std::size_t i = 0; i < v.size(); ++i) w[i] += scale * v[i];
  }
}

double FeatureVector::squared_norm() const {
  double s = 0.0;
  if (is_sparse()) {
    for (const auto& e : sparse_entries()) s += e.value * e.value;
  } else {
    for (const double x : dense_values()) s += x * x;
  }
  return s;
}

std::vector<double> FeatureVector::to_dense() const {
  if (!is_sparse()) return {dense_values().begin(), dense_values().end()};
  std::vector<double> out(dim_, 0.0);
  for (const auto& e : sparse_entries()) out[e.index] = e.value;
  return out;
}

FeatureVector mc_feature(const MarkableExample& ex, const EmbeddingStore& mc_store) {
  const auto id = mc_store.vocab().id_of(encode_mc(ex.mc()));
  if (id == Vocabulary::kNotFound) {
    throw Error("MC not in embedding vocabulary: " + encode_mc(ex.mc()));
  }
  const auto row = mc_store.input(static_cast<std::size_t>(id));
  return FeatureVector::dense({row.begin(), row.end()});
}

FeatureVector concat_feature(const MarkableExample& ex, const EmbeddingStore& word_store,
                             OovPolicy oov) {
  const std::size_t d = word_store.dim();
  std::vector<double> values(2 * d, 0.0);
  const auto place = [&](const Token& word, std::size_t offset) {
    const auto id = word_store.vocab().id_of(word);
    if (id == Vocabulary::kNotFound) {
      if (oov == OovPolicy::Strict) throw Error("word not in embedding vocabulary: " + word);
      return;
    }
    const auto row = word_store.input(static_cast<std::size_t>(id));
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(offset));
  };
  place(ex.left, 0);
  place(ex.right, d);
  return FeatureVector::dense(std::move(values));
}

FeatureVector bow_feature(const MarkableExample& ex, const Vocabulary& word_vocab) {
  const std::size_t v = word_vocab.size();
  std::vector<FeatureVector::Entry> entries;
  const auto left = word_vocab.id_of(ex.left);
  const auto right = word_vocab.id_of(ex.right);
  if (left != Vocabulary::kNotFound) entries.push_back({static_cast<std::uint32_t>(left), 1.0});
  if (right != Vocabulary::kNotFound) {
    entries.push_back({static_cast<std::uint32_t>(v + static_cast<std::size_t>(right)), 1.0});
  }
  return FeatureVector::sparse(2 * v, std::move(entries));
}

Vocabulary enclosing_word_vocab(std::span<const MarkableExample> examples) {
  TokenCounter counter;
  for (const auto& ex : examples) {
    counter.add(ex.left);
    counter.add(ex.right);
  }
  return build_vocab(counter, 1);
}

std::optional<Representation> parse_representation(std::string_view name) {
  if (name == "mc") return Representation::Mc;
  if (name == "concat") return Representation::Concat;
  if (name == "bow") return Representation::Bow;
  return std::nullopt;
}

std::string_view to_string(Representation repr) {
  switch (repr) {
    case Representation::Mc: return "mc";
    case Representation::Concat: return "concat";
    case Representation::Bow: return "bow";
  }
  return "mc";
}

Featurizer Featurizer::mc(const EmbeddingStore& mc_store) {
  Featurizer f;
  f.repr_ = Representation::Mc;
  f.store_ = &mc_store;
  return f;
}

Featurizer Featurizer::concat(const EmbeddingStore& word_store, OovPolicy oov) {
  Featurizer f;
  f.repr_ = Representation::Concat;
  f.store_ = &word_store;
  f.oov_ = oov;
  return f;
}

Featurizer Featurizer::bow(const Vocabulary& word_vocab) {
  Featurizer f;
  f.repr_ = Representation::Bow;
  f.vocab_ = &word_vocab;
  return f;
}

FeatureVector Featurizer::operator()(const MarkableExample& ex) const {
  switch (repr_) {
    case Representation::Mc: return mc_feature(ex, *store_);
    case Representation::Concat: return concat_feature(ex, *store_, oov_);
    case Representation::Bow: return bow_feature(ex, *vocab_);
  }
  throw Error("unknown representation");
}

}  // namespace mcembed
