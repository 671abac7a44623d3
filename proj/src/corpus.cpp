#include "mcembed/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "mcembed/error.hpp"

namespace mcembed {

namespace {

// Length in bytes of the Unicode whitespace character starting at s[i], or 0.
std::size_t whitespace_length(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0d)) return 1;
  const auto at = [&](std::size_t k) {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0u;
  };
  if (b0 == 0xc2) {
    // U+0085 NEL, U+00A0 NBSP
    return (at(1) == 0x85 || at(1) == 0xa0) ? 2 : 0;
  }
  if (b0 == 0xe1) {
    // U+1680
    return (at(1) == 0x9a && at(2) == 0x80) ? 3 : 0;
  }
  if (b0 == 0xe2) {
    if (at(1) == 0x80) {
      // U+2000..U+200A, U+2028, U+2029, U+202F
      const unsigned b2 = at(2);
      if ((b2 >= 0x80 && b2 <= 0x8a) || b2 == 0xa8 || b2 == 0xa9 || b2 == 0xaf) return 3;
      return 0;
    }
    // U+205F
    return (at(1) == 0x81 && at(2) == 0x9f) ? 3 : 0;
  }
  if (b0 == 0xe3) {
    // U+3000
    return (at(1) == 0x80 && at(2) == 0x80) ? 3 : 0;
  }
  return 0;
}

}  // namespace

std::vector<Token> tokenize_line(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t start = std::string_view::npos;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t ws = whitespace_length(text, i);
    if (ws > 0) {
      if (start != std::string_view::npos) {
        tokens.emplace_back(text.substr(start, i - start));
        start = std::string_view::npos;
      }
      i += ws;
    } else {
      if (start == std::string_view::npos) start = i;
      ++i;
    }
  }
  if (start != std::string_view::npos) tokens.emplace_back(text.substr(start));
  return tokens;
}

std::string escape_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '\\' || c == '*') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::optional<std::string> unescape_token(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    const char c = escaped[i];
    if (c == '*') return std::nullopt;
    if (c == '\\') {
      if (i + 1 == escaped.size()) return std::nullopt;
      const char next = escaped[++i];
      if (next != '\\' && next != '*') return std::nullopt;
      out.push_back(next);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

Token encode_mc(const MinimalContext& mc) {
  return escape_token(mc.left) + '*' + escape_token(mc.right);
}

std::optional<MinimalContext> decode_mc(std::string_view encoded) {
  std::size_t sep = std::string_view::npos;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '\\') {
      ++i;
    } else if (encoded[i] == '*') {
      sep = i;
      break;
    }
  }
  if (sep == std::string_view::npos) return std::nullopt;
  auto left = unescape_token(encoded.substr(0, sep));
  auto right = unescape_token(encoded.substr(sep + 1));
  if (!left || !right || left->empty() || right->empty()) return std::nullopt;
  return MinimalContext{std::move(*left), std::move(*right)};
}

bool is_encoded_mc(std::string_view token) { return decode_mc(token).has_value(); }

void GapConfig::validate() const {
  if (k_min < 2) throw Error("gap k_min must be >= 2, got " + std::to_string(k_min));
  if (k_max < k_min) {
    throw Error("gap k_max (" + std::to_string(k_max) + ") must be >= k_min (" +
                std::to_string(k_min) + ")");
  }
}

void for_each_gap(std::size_t length, const GapConfig& gap,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  gap.validate();
  for (std::size_t i = 0; i < length; ++i) {
    for (int k = gap.k_min; k <= gap.k_max; ++k) {
      const std::size_t j = i + static_cast<std::size_t>(k);
      if (j >= length) break;
      for (std::size_t m = i + 1; m < j; ++m) fn(i, j, m);
    }
  }
}

std::vector<GapPair> emit_gap_pairs(std::span<const Token> sentence, const GapConfig& gap) {
  std::vector<GapPair> pairs;
  pairs.reserve(gap_pair_count(sentence.size(), gap));
  for_each_gap(sentence.size(), gap, [&](std::size_t i, std::size_t j, std::size_t m) {
    pairs.push_back(GapPair{MinimalContext{sentence[i], sentence[j]}, sentence[m]});
  });
  return pairs;
}

std::size_t gap_pair_count(std::size_t length, const GapConfig& gap) {
  gap.validate();
  std::size_t total = 0;
  for (int k = gap.k_min; k <= gap.k_max; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (length > uk) total += (length - uk) * (uk - 1);
  }
  return total;
}

std::string format_pair_line(const GapPair& pair) {
  std::string line = encode_mc(pair.mc);
  line.push_back(' ');
  line += escape_token(pair.inner);
  line.push_back('\n');
  return line;
}

GapPair parse_pair_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const std::size_t space = line.find(' ');
  if (space == std::string_view::npos || line.find(' ', space + 1) != std::string_view::npos) {
    throw ParseError(line_no, "pair corpus line must hold exactly two space-separated tokens");
  }
  auto mc = decode_mc(line.substr(0, space));
  if (!mc) throw ParseError(line_no, "first token is not an encoded minimal context");
  auto inner = unescape_token(line.substr(space + 1));
  if (!inner || inner->empty()) throw ParseError(line_no, "second token is not a valid word");
  return GapPair{std::move(*mc), std::move(*inner)};
}

std::size_t reformat_corpus(std::istream& in, std::ostream& out, const GapConfig& gap) {
  gap.validate();
  std::size_t written = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto sentence = tokenize_line(line);
    for_each_gap(sentence.size(), gap, [&](std::size_t i, std::size_t j, std::size_t m) {
      out << format_pair_line(GapPair{MinimalContext{sentence[i], sentence[j]}, sentence[m]});
      ++written;
    });
  }
  return written;
}

void TokenCounter::add(std::string_view token) { ++counts_[std::string(token)]; }

void TokenCounter::add_all(std::span<const Token> tokens) {
  for (const auto& t : tokens) ++counts_[t];
}

void TokenCounter::merge(const TokenCounter& other) {
  for (const auto& [token, n] : other.counts_) counts_[token] += n;
}

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  ids_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!ids_.emplace(entries_[i].token, static_cast<std::int32_t>(i)).second) {
      throw Error("duplicate vocabulary token '" + entries_[i].token + "'");
    }
  }
}

std::int32_t Vocabulary::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kNotFound : it->second;
}

Vocabulary build_vocab(const TokenCounter& counter, std::uint64_t min_count) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  std::vector<Vocabulary::Entry> entries;
  for (const auto& [token, n] : counter.counts()) {
    if (n >= min_count) entries.push_back({token, n});
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.token < b.token;
  });
  return Vocabulary(std::move(entries));
}

Vocabulary build_vocab(std::span<const Token> tokens, std::uint64_t min_count) {
  TokenCounter counter;
  counter.add_all(tokens);
  return build_vocab(counter, min_count);
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& e : vocab.entries()) out << e.token << ' ' << e.count << '\n';
}

Vocabulary read_vocab(std::istream& in) {
  std::vector<Vocabulary::Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = tokenize_line(line);
    if (fields.size() != 2) throw ParseError(line_no, "expected 'token count'");
    std::uint64_t n = 0;
    const auto& c = fields[1];
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), n);
    if (ec != std::errc{} || ptr != c.data() + c.size()) {
      throw ParseError(line_no, "non-numeric count '" + c + "'");
    }
    entries.push_back({fields[0], n});
  }
  try {
    return Vocabulary(std::move(entries));
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace mcembed
