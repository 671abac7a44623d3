#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcembed/corpus.hpp"

namespace mcembed {

struct Mention {
  std::string doc_id;
  std::size_t sentence_index = 0;
  // Token positions within the sentence, both inclusive.
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<Token> surface;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Chain {
  std::string chain_id;  // "<doc_id>:<coref id>"
  std::vector<Mention> mentions;

  friend bool operator==(const Chain&, const Chain&) = default;
};

struct CorefDocument {
  std::string doc_id;
  std::vector<std::vector<Token>> sentences;
  // In order of first opening bracket; mentions in closing order.
  std::vector<Chain> chains;
};

struct ConllColumns {
  std::size_t word = 3;
  // Negative values count from the last column (-1 is the last).
  int coref = -1;
};

// CoNLL-2012-style coreference columns. Mentions are matched with a stack of
// open brackets per chain id, so spans of different chains may cross and
// spans of one chain may nest. A mention must close within its sentence.
std::vector<CorefDocument> parse_coref_documents(std::istream& in, const ConllColumns& columns = {},
                                                 std::string_view default_doc_id = "-");

// Renders one sentence's coref column from mention spans; the inverse of the
// parser for well-nested chains.
std::vector<std::string> coref_tags(std::size_t sentence_length,
                                    const std::vector<std::pair<std::string, Mention>>& mentions);

enum class AnimacyLabel { Animate, Inanimate };
enum class ChainLabel { Animate, Inanimate, Unlabeled, Conflicted };

std::string_view to_string(AnimacyLabel label);
std::optional<AnimacyLabel> parse_animacy(std::string_view text);
std::string_view to_string(ChainLabel label);

// Pronoun triggers, matched against the whole lowercased mention surface.
ChainLabel label_chain(const Chain& chain);

struct MarkableExample {
  AnimacyLabel label = AnimacyLabel::Animate;
  Token left;
  Token right;
  std::string surface;  // mention tokens joined by '_'

  MinimalContext mc() const { return MinimalContext{left, right}; }

  friend bool operator==(const MarkableExample&, const MarkableExample&) = default;
};

// One example per mention of a labeled chain that has a token on both sides
// within its sentence. Documents, chains and mentions are visited in order.
std::vector<MarkableExample> extract_examples(const std::vector<CorefDocument>& documents);

struct ExtractStats {
  std::size_t chains = 0;
  std::size_t animate_chains = 0;
  std::size_t inanimate_chains = 0;
  std::size_t conflicted_chains = 0;
  std::size_t examples = 0;
};

ExtractStats summarize(const std::vector<CorefDocument>& documents,
                       const std::vector<MarkableExample>& examples);

struct SplitConfig {
  std::size_t test_per_class = 2018;
  std::uint64_t seed = 1;
};

struct Dataset {
  std::vector<MarkableExample> train;
  std::vector<MarkableExample> test;
};

// Keeps examples whose encoded MC is in mc_vocab, shuffles by seed, and
// reserves the first test_per_class examples of each class as the test set.
Dataset build_dataset(const std::vector<MarkableExample>& examples, const Vocabulary& mc_vocab,
                      const SplitConfig& split);

// Markables TSV: label, left, right, encoded MC, surface. No header.
void write_markables(std::ostream& out, const std::vector<MarkableExample>& examples);
std::vector<MarkableExample> read_markables(std::istream& in);
void write_markables(const std::filesystem::path& path,
                     const std::vector<MarkableExample>& examples);
std::vector<MarkableExample> read_markables(const std::filesystem::path& path);

}  // namespace mcembed
