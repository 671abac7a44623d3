#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mcembed {

// A nonempty whitespace-free UTF-8 string. Kept as a plain std::string; the
// tokenizer is the only producer and upholds the invariant.
using Token = std::string;

std::vector<Token> tokenize_line(std::string_view text);

// Two enclosing words of a gap, e.g. helped*to.
struct MinimalContext {
  Token left;
  Token right;

  friend bool operator==(const MinimalContext&, const MinimalContext&) = default;
};

// Escapes '\' as "\\" and '*' as "\*".
std::string escape_token(std::string_view token);
std::optional<std::string> unescape_token(std::string_view escaped);

// "L*R" with both sides escaped; the first unescaped '*' is the separator.
Token encode_mc(const MinimalContext& mc);
// Inverse of encode_mc. Returns nullopt for anything encode_mc cannot
// produce: no separator, a second unescaped '*', a dangling or unknown
// escape, or an empty side.
std::optional<MinimalContext> decode_mc(std::string_view encoded);
bool is_encoded_mc(std::string_view token);

struct GapConfig {
  int k_min = 2;
  int k_max = 2;

  // Throws Error unless 2 <= k_min <= k_max.
  void validate() const;
};

struct GapPair {
  MinimalContext mc;
  Token inner;

  friend bool operator==(const GapPair&, const GapPair&) = default;
};

// Calls fn(i, j, m) for every enclosing pair (i, j = i + k) and inner
// position m, ordered by i, then k, then m.
void for_each_gap(std::size_t length, const GapConfig& gap,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

std::vector<GapPair> emit_gap_pairs(std::span<const Token> sentence, const GapConfig& gap);

// Closed form of |emit_gap_pairs| for a sentence of the given length.
std::size_t gap_pair_count(std::size_t length, const GapConfig& gap);

// Pair corpus line: "ENCODED_MC INNER\n". The inner word is escaped as well,
// so a word token never looks like an encoded MC in the shared vocabulary.
std::string format_pair_line(const GapPair& pair);
GapPair parse_pair_line(std::string_view line, std::size_t line_no);

// Streams a one-sentence-per-line corpus into a pair corpus. Returns the
// number of pairs written.
std::size_t reformat_corpus(std::istream& in, std::ostream& out, const GapConfig& gap);

// Token frequency counter. Shards may count disjoint parts of a stream and be
// merged; the resulting vocabulary does not depend on how the stream was split.
class TokenCounter {
 public:
  void add(std::string_view token);
  void add_all(std::span<const Token> tokens);
  void merge(const TokenCounter& other);

  const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

class Vocabulary {
 public:
  struct Entry {
    Token token;
    std::uint64_t count = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  static constexpr std::int32_t kNotFound = -1;

  Vocabulary() = default;
  // Entries are taken in the given order; ids are their positions. Throws on
  // duplicate tokens.
  explicit Vocabulary(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<Entry>& entries() const { return entries_; }
  const Token& token(std::size_t id) const { return entries_.at(id).token; }
  std::uint64_t count(std::size_t id) const { return entries_.at(id).count; }

  std::int32_t id_of(std::string_view token) const;
  bool contains(std::string_view token) const { return id_of(token) != kNotFound; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// Drops tokens seen fewer than min_count times; orders the rest by count
// descending, ties by byte-wise token order.
Vocabulary build_vocab(const TokenCounter& counter, std::uint64_t min_count);
Vocabulary build_vocab(std::span<const Token> tokens, std::uint64_t min_count);

// "token count" per line; the order of the file is the id order.
void write_vocab(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocab(std::istream& in);

}  // namespace mcembed
