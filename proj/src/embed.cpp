#include "mcembed/embed.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <thread>

#include "mcembed/error.hpp"

namespace mcembed {

EmbeddingStore::EmbeddingStore(Vocabulary vocab, std::size_t dim)
    : vocab_(std::move(vocab)),
      dim_(dim),
      input_(vocab_.size() * dim, 0.0),
      output_(vocab_.size() * dim, 0.0) {
  if (dim == 0) throw Error("embedding dimension must be >= 1");
}

bool EmbeddingStore::all_finite() const {
  const auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(input_.begin(), input_.end(), finite) &&
         std::all_of(output_.begin(), output_.end(), finite);
}

bool EmbeddingStore::identical_to(const EmbeddingStore& other) const {
  const auto same_bits = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  };
  return dim_ == other.dim_ && vocab_ == other.vocab_ && same_bits(input_, other.input_) &&
         same_bits(output_, other.output_);
}

EmbeddingStore init_store(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  if (vocab.empty()) throw Error("empty vocabulary");
  EmbeddingStore store(vocab, dim);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (double& x : store.input_matrix()) x = rng.uniform(-half, half);
  return store;
}

NegativeTable::NegativeTable(const Vocabulary& vocab, double power, std::size_t table_size) {
  if (vocab.empty()) throw Error("empty vocabulary");
  if (!(power > 0.0)) throw Error("unigram power must be > 0");
  if (table_size < vocab.size()) {
    throw Error("negative table size " + std::to_string(table_size) +
                " is smaller than the vocabulary (" + std::to_string(vocab.size()) + ")");
  }
  const std::size_t n = vocab.size();
  std::vector<double> weight(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = std::pow(static_cast<double>(vocab.count(i)), power);
    total += weight[i];
  }

  // Range ends: end_i = #{s : s + 0.5 < cumulative_i * table_size}.
  std::vector<std::size_t> counts(n, 0);
  if (total <= 0.0) {
    // All counts zero (e.g. a loaded store): fall back to uniform shares.
    std::fill(weight.begin(), weight.end(), 1.0);
    total = static_cast<double>(n);
  }
  const double size = static_cast<double>(table_size);
  double cumulative = 0.0;
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += weight[i] / total;
    std::size_t end = table_size;
    if (i + 1 < n) {
      const double e = std::ceil(cumulative * size - 0.5);
      end = static_cast<std::size_t>(std::clamp(e, static_cast<double>(prev_end), size));
    }
    counts[i] = end - prev_end;
    prev_end = end;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) continue;
    const auto donor = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    --counts[donor];
    counts[i] = 1;
  }

  slots_.resize(table_size);
  auto it = slots_.begin();
  for (std::size_t i = 0; i < n; ++i) {
    it = std::fill_n(it, counts[i], static_cast<std::int32_t>(i));
  }
}

std::vector<std::size_t> NegativeTable::slot_counts(std::size_t vocab_size) const {
  std::vector<std::size_t> counts(vocab_size, 0);
  for (const auto id : slots_) ++counts[static_cast<std::size_t>(id)];
  return counts;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// -log(sigmoid(x))
double neg_log_sigmoid(double x) {
  return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

template <bool Shared>
inline double load(double* p) {
  if constexpr (Shared) {
    return std::atomic_ref<double>(*p).load(std::memory_order_relaxed);
  } else {
    return *p;
  }
}

template <bool Shared>
inline void store_add(double* p, double delta) {
  if constexpr (Shared) {
    std::atomic_ref<double> ref(*p);
    ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  } else {
    *p += delta;
  }
}

struct Scratch {
  std::vector<double> center;
  std::vector<double> grad;
  std::vector<double> coeff;
};

// Shared == true is the multi-worker path: rows may be written concurrently
// by other workers; every access is a relaxed atomic so races lose updates
// rather than tear values.
template <bool Shared>
double sgns_kernel(double* input, double* output, std::size_t dim, std::int32_t center,
                   std::int32_t context, std::span<const std::int32_t> negatives, double lr,
                   Scratch& scratch) {
  double* v = input + static_cast<std::size_t>(center) * dim;
  scratch.center.resize(dim);
  scratch.grad.assign(dim, 0.0);
  scratch.coeff.resize(negatives.size() + 1);
  for (std::size_t d = 0; d < dim; ++d) scratch.center[d] = load<Shared>(v + d);

  double loss = 0.0;
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const std::int32_t target = t == 0 ? context : negatives[t - 1];
    double* u = output + static_cast<std::size_t>(target) * dim;
    double dot = 0.0;
    for (std::size_t d = 0; d < dim; ++d) dot += load<Shared>(u + d) * scratch.center[d];
    double g;
    if (t == 0) {
      g = 1.0 - sigmoid(dot);
      loss += neg_log_sigmoid(dot);
    } else {
      g = -sigmoid(dot);
      loss += neg_log_sigmoid(-dot);
    }
    scratch.coeff[t] = g;
    for (std::size_t d = 0; d < dim; ++d) scratch.grad[d] += g * load<Shared>(u + d);
  }

  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const std::int32_t target = t == 0 ? context : negatives[t - 1];
    double* u = output + static_cast<std::size_t>(target) * dim;
    const double step = lr * scratch.coeff[t];
    for (std::size_t d = 0; d < dim; ++d) store_add<Shared>(u + d, step * scratch.center[d]);
  }
  for (std::size_t d = 0; d < dim; ++d) store_add<Shared>(v + d, lr * scratch.grad[d]);
  return loss;
}

void check_id(std::int32_t id, std::size_t n, const char* role) {
  if (id < 0 || static_cast<std::size_t>(id) >= n) {
    throw Error(std::string(role) + " id " + std::to_string(id) + " out of range [0, " +
                std::to_string(n) + ")");
  }
}

}  // namespace

double sgns_update(EmbeddingStore& store, std::int32_t center, std::int32_t context,
                   std::span<const std::int32_t> negatives, double lr) {
  const std::size_t n = store.size();
  check_id(center, n, "center");
  check_id(context, n, "context");
  for (const auto neg : negatives) check_id(neg, n, "negative");
  if (!(lr > 0.0)) throw Error("learning rate must be > 0");
  Scratch scratch;
  return sgns_kernel<false>(store.input_matrix().data(), store.output_matrix().data(),
                            store.dim(), center, context, negatives, lr, scratch);
}

void TrainConfig::validate() const {
  if (dim < 1) throw Error("dim must be >= 1");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (negatives < 1) throw Error("negatives must be >= 1");
  if (!(initial_lr > 0.0)) throw Error("initial learning rate must be > 0");
  if (!(min_lr > 0.0) || !(min_lr < initial_lr)) {
    throw Error("min learning rate must satisfy 0 < min_lr < initial_lr");
  }
  if (!(unigram_power > 0.0)) throw Error("unigram power must be > 0");
  if (window < 1) throw Error("window must be >= 1");
  if (workers < 1) throw Error("workers must be >= 1");
  if (min_count < 1) throw Error("min_count must be >= 1");
  if (subsample < 0.0) throw Error("subsample threshold must be >= 0");
}

void IdCorpus::add(std::span<const Token> sentence, const Vocabulary& vocab) {
  for (const auto& token : sentence) {
    const auto id = vocab.id_of(token);
    if (id != Vocabulary::kNotFound) ids.push_back(id);
  }
  offsets.push_back(ids.size());
}

namespace {

struct WorkerTotals {
  double loss = 0.0;
  std::uint64_t updates = 0;
};

class Trainer {
 public:
  Trainer(const IdCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config)
      : corpus_(corpus),
        config_(config),
        store_(init_store(vocab, config.dim, config.seed)),
        table_(vocab, config.unigram_power, std::max(config.table_size, vocab.size())) {
    const double total_tokens = static_cast<double>(corpus.ids.size());
    keep_prob_.assign(vocab.size(), 1.0);
    if (config.subsample > 0.0) {
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        const double f = static_cast<double>(vocab.count(i));
        const double t = config.subsample * total_tokens;
        if (f > 0.0) keep_prob_[i] = std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
      }
    }
    total_positions_ =
        static_cast<double>(corpus.ids.size()) * static_cast<double>(config.epochs);
  }

  TrainResult run() {
    const auto workers = static_cast<std::size_t>(config_.workers);
    std::vector<Rng> rngs;
    for (std::size_t w = 0; w < workers; ++w) {
      rngs.emplace_back(config_.seed + 0x9e3779b97f4a7c15ULL * (w + 1));
    }
    TrainStats stats;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      std::vector<WorkerTotals> totals(workers);
      if (workers == 1) {
        run_range<false>(0, corpus_.sentences(), rngs[0], totals[0]);
      } else {
        std::vector<std::jthread> threads;
        const std::size_t n = corpus_.sentences();
        for (std::size_t w = 0; w < workers; ++w) {
          const std::size_t begin = n * w / workers;
          const std::size_t end = n * (w + 1) / workers;
          threads.emplace_back([this, begin, end, &rng = rngs[w], &t = totals[w]] {
            run_range<true>(begin, end, rng, t);
          });
        }
      }
      WorkerTotals sum;
      for (const auto& t : totals) {
        sum.loss += t.loss;
        sum.updates += t.updates;
      }
      stats.epoch_mean_loss.push_back(sum.updates ? sum.loss / static_cast<double>(sum.updates)
                                                  : 0.0);
      stats.epoch_updates.push_back(sum.updates);
      stats.updates += sum.updates;
    }
    return TrainResult{std::move(store_), std::move(stats)};
  }

 private:
  double learning_rate(std::uint64_t processed) const {
    const double progress =
        std::min(1.0, static_cast<double>(processed) / std::max(1.0, total_positions_));
    return config_.initial_lr + (config_.min_lr - config_.initial_lr) * progress;
  }

  template <bool Shared>
  void run_range(std::size_t begin, std::size_t end, Rng& rng, WorkerTotals& totals) {
    Scratch scratch;
    std::vector<std::int32_t> negatives(static_cast<std::size_t>(config_.negatives));
    std::vector<std::int32_t> kept;
    const bool can_sample = store_.size() > 1;
    const auto window = static_cast<std::size_t>(config_.window);
    double* input = store_.input_matrix().data();
    double* output = store_.output_matrix().data();

    for (std::size_t s = begin; s < end; ++s) {
      const auto sentence = corpus_.sentence(s);
      const double lr =
          learning_rate(processed_.fetch_add(sentence.size(), std::memory_order_relaxed));
      std::span<const std::int32_t> tokens = sentence;
      if (config_.subsample > 0.0) {
        kept.clear();
        for (const auto id : sentence) {
          if (rng.uniform01() < keep_prob_[static_cast<std::size_t>(id)]) kept.push_back(id);
        }
        tokens = kept;
      }
      for (std::size_t p = 0; p < tokens.size(); ++p) {
        const std::size_t lo = p >= window ? p - window : 0;
        const std::size_t hi = std::min(tokens.size() - 1, p + window);
        for (std::size_t q = lo; q <= hi; ++q) {
          if (q == p) continue;
          const std::int32_t context = tokens[q];
          std::span<const std::int32_t> negs;
          if (can_sample) {
            for (auto& neg : negatives) {
              do {
                neg = table_.sample(rng);
              } while (neg == context);
            }
            negs = negatives;
          }
          totals.loss += sgns_kernel<Shared>(input, output, store_.dim(), tokens[p], context,
                                             negs, lr, scratch);
          ++totals.updates;
        }
      }
    }
  }

  const IdCorpus& corpus_;
  const TrainConfig& config_;
  EmbeddingStore store_;
  NegativeTable table_;
  std::vector<double> keep_prob_;
  double total_positions_ = 0.0;
  std::atomic<std::uint64_t> processed_{0};
};

}  // namespace

TrainResult train(const IdCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config) {
  config.validate();
  std::uint64_t usable = 0;
  for (std::size_t s = 0; s < corpus.sentences(); ++s) {
    if (corpus.sentence(s).size() >= 2) ++usable;
  }
  if (vocab.empty() || usable == 0) throw Error("empty training set after vocabulary filtering");
  Trainer trainer(corpus, vocab, config);
  return trainer.run();
}

TrainResult train(std::span<const std::vector<Token>> sentences, const TrainConfig& config) {
  config.validate();
  TokenCounter counter;
  for (const auto& s : sentences) counter.add_all(s);
  const Vocabulary vocab = build_vocab(counter, config.min_count);
  IdCorpus corpus;
  for (const auto& s : sentences) corpus.add(s, vocab);
  return train(corpus, vocab, config);
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

// Two passes over a one-sentence-per-line file; `check` may validate a line.
template <class Check>
TrainResult train_lines(const std::filesystem::path& path, const TrainConfig& config,
                        Check check) {
  config.validate();
  TokenCounter counter;
  {
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      check(line, ++line_no);
      counter.add_all(tokenize_line(line));
    }
  }
  const Vocabulary vocab = build_vocab(counter, config.min_count);
  IdCorpus corpus;
  {
    auto in = open_input(path);
    std::string line;
    while (std::getline(in, line)) corpus.add(tokenize_line(line), vocab);
  }
  return train(corpus, vocab, config);
}

}  // namespace

TrainResult train_file(const std::filesystem::path& corpus, const TrainConfig& config) {
  return train_lines(corpus, config, [](const std::string&, std::size_t) {});
}

TrainResult train_pair_file(const std::filesystem::path& pairs, const TrainConfig& config) {
  return train_lines(pairs, config, [](const std::string& line, std::size_t line_no) {
    parse_pair_line(line, line_no);
  });
}

void save_embeddings(std::ostream& out, const EmbeddingStore& store, SaveFilter filter) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (filter == SaveFilter::All || is_encoded_mc(store.vocab().token(i))) rows.push_back(i);
  }
  out << rows.size() << ' ' << store.dim() << '\n';
  char buf[64];
  std::string line;
  for (const auto i : rows) {
    line = store.vocab().token(i);
    for (const double x : store.input(i)) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
      line.push_back(' ');
      line.append(buf, end);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error("write failed while saving embeddings");
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store,
                     SaveFilter filter) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  save_embeddings(out, store, filter);
}

namespace {

std::uint64_t parse_header_field(const std::string& field, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line_no, "malformed header: expected 'N D'");
  }
  return v;
}

}  // namespace

EmbeddingStore load_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "malformed header: expected 'N D'");
  const auto header = tokenize_line(line);
  if (header.size() != 2) throw ParseError(1, "malformed header: expected 'N D'");
  const std::uint64_t rows = parse_header_field(header[0], 1);
  const std::uint64_t dim = parse_header_field(header[1], 1);
  if (dim == 0) throw ParseError(1, "malformed header: dimension must be >= 1");

  std::vector<Vocabulary::Entry> entries;
  std::vector<double> values;
  entries.reserve(rows);
  values.reserve(rows * dim);
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = tokenize_line(line);
    if (fields.empty()) continue;
    if (entries.size() == rows) {
      throw ParseError(line_no, "expected " + std::to_string(rows) + " rows, found more");
    }
    if (fields.size() != dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                    std::to_string(fields.size() - 1));
    }
    for (std::size_t d = 1; d <= dim; ++d) {
      const auto& f = fields[d];
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw ParseError(line_no, "non-numeric value '" + f + "'");
      }
      if (!std::isfinite(x)) throw ParseError(line_no, "non-finite value '" + f + "'");
      values.push_back(x);
    }
    if (!seen.emplace(fields[0], line_no).second) {
      throw ParseError(line_no, "duplicate token '" + fields[0] + "'");
    }
    entries.push_back({std::move(fields[0]), 0});
  }
  if (entries.size() != rows) {
    throw ParseError(line_no, "expected " + std::to_string(rows) + " rows, found " +
                                  std::to_string(entries.size()));
  }
  EmbeddingStore store(Vocabulary(std::move(entries)), dim);
  std::copy(values.begin(), values.end(), store.input_matrix().begin());
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_embeddings(in);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace mcembed
