#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcembed/corpus.hpp"
#include "mcembed/rng.hpp"

namespace mcembed {

// Input (center) and output (context) matrices over a vocabulary, row-major.
// The published embedding of a token is its input row.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  // Both matrices zero-filled.
  EmbeddingStore(Vocabulary vocab, std::size_t dim);

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<double> input(std::size_t id) { return {input_.data() + id * dim_, dim_}; }
  std::span<const double> input(std::size_t id) const { return {input_.data() + id * dim_, dim_}; }
  std::span<double> output(std::size_t id) { return {output_.data() + id * dim_, dim_}; }
  std::span<const double> output(std::size_t id) const { return {output_.data() + id * dim_, dim_}; }

  std::span<double> input_matrix() { return input_; }
  std::span<const double> input_matrix() const { return input_; }
  std::span<double> output_matrix() { return output_; }
  std::span<const double> output_matrix() const { return output_; }

  bool all_finite() const;

  // Bitwise equality of vocabulary and both matrices.
  bool identical_to(const EmbeddingStore& other) const;

 private:
  Vocabulary vocab_;
  std::size_t dim_ = 0;
  std::vector<double> input_;
  std::vector<double> output_;
};

// Input rows uniform in [-0.5/dim, 0.5/dim], output rows zero.
EmbeddingStore init_store(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

// Unigram^power sampling table. Slot ranges are laid out in vocabulary order:
// slot s belongs to the first id whose cumulative share exceeds (s + 0.5) / size,
// so each id's slot count is within one slot of its exact share. When the table
// has at least one slot per id, ids left empty take a slot from the largest range.
class NegativeTable {
 public:
  NegativeTable(const Vocabulary& vocab, double power, std::size_t table_size);

  std::size_t size() const { return slots_.size(); }
  std::span<const std::int32_t> slots() const { return slots_; }
  // Number of slots held by each id.
  std::vector<std::size_t> slot_counts(std::size_t vocab_size) const;

  std::int32_t sample(Rng& rng) const {
    return slots_[static_cast<std::size_t>(rng.below(slots_.size()))];
  }

 private:
  std::vector<std::int32_t> slots_;
};

double sigmoid(double x);

// One SGD step on -log s(u_ctx . v_c) - sum_n log s(-u_n . v_c). All dot
// products and the center gradient use pre-update vectors; output rows are
// updated first, then the center row. Returns the sample loss before the step.
double sgns_update(EmbeddingStore& store, std::int32_t center, std::int32_t context,
                   std::span<const std::int32_t> negatives, double lr);

struct TrainConfig {
  std::size_t dim = 200;
  int epochs = 5;
  int negatives = 5;
  double initial_lr = 0.025;
  double min_lr = 0.025 * 1e-4;
  std::uint64_t seed = 1;
  double unigram_power = 0.75;
  std::size_t table_size = 10'000'000;
  int window = 1;
  int workers = 1;
  std::uint64_t min_count = 5;
  // word2vec-style frequent-token downsampling threshold; 0 disables it.
  double subsample = 0.0;

  void validate() const;
};

// Sentences as vocabulary ids, flattened. Out-of-vocabulary tokens are dropped
// when a sentence is encoded, as word2vec does.
struct IdCorpus {
  std::vector<std::int32_t> ids;
  std::vector<std::size_t> offsets{0};

  std::size_t sentences() const { return offsets.size() - 1; }
  std::span<const std::int32_t> sentence(std::size_t i) const {
    return std::span<const std::int32_t>(ids).subspan(offsets[i], offsets[i + 1] - offsets[i]);
  }
  void add(std::span<const Token> sentence, const Vocabulary& vocab);
};

struct TrainStats {
  // Mean per-update loss of each epoch.
  std::vector<double> epoch_mean_loss;
  std::vector<std::uint64_t> epoch_updates;
  std::uint64_t updates = 0;
};

struct TrainResult {
  EmbeddingStore store;
  TrainStats stats;
};

// Skip-gram with negative sampling. Every ordered (center, context) pair within
// `window` positions of each other in a sentence is one update; a two-token
// sentence therefore trains both directions. With workers == 1 the result is
// a pure function of (corpus, vocab, config).
TrainResult train(const IdCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config);

// Builds the vocabulary with config.min_count, encodes, and trains.
TrainResult train(std::span<const std::vector<Token>> sentences, const TrainConfig& config);

// Reads a one-sentence-per-line corpus (two passes: count, then encode).
TrainResult train_file(const std::filesystem::path& corpus, const TrainConfig& config);

// Reads a pair corpus; each line is a two-token sentence of its decoded form
// re-escaped, so MC and word tokens keep the spellings of the file.
TrainResult train_pair_file(const std::filesystem::path& pairs, const TrainConfig& config);

enum class SaveFilter { All, MinimalContextsOnly };

// "N D" header, then one "token v1 ... vD" row per kept token, values with 17
// significant digits. Only input vectors are written.
void save_embeddings(std::ostream& out, const EmbeddingStore& store,
                     SaveFilter filter = SaveFilter::All);
void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store,
                     SaveFilter filter = SaveFilter::All);

// The loaded store has a zero output matrix and zero vocabulary counts.
EmbeddingStore load_embeddings(std::istream& in);
EmbeddingStore load_embeddings(const std::filesystem::path& path);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace mcembed
