#include "mcembed/coref.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "mcembed/error.hpp"
#include "mcembed/rng.hpp"

namespace mcembed {

namespace {

struct OpenBracket {
  std::size_t start;
  std::size_t line;
};

class DocumentBuilder {
 public:
  explicit DocumentBuilder(std::string doc_id) { doc_.doc_id = std::move(doc_id); }

  void add_token(Token word, std::string_view tag, std::size_t line_no) {
    const std::size_t pos = sentence_.size();
    sentence_.push_back(std::move(word));
    if (tag == "-") return;

    std::vector<std::string_view> pieces;
    std::size_t begin = 0;
    while (true) {
      const std::size_t bar = tag.find('|', begin);
      pieces.push_back(tag.substr(begin, bar == std::string_view::npos ? bar : bar - begin));
      if (bar == std::string_view::npos) break;
      begin = bar + 1;
    }
    for (const auto piece : pieces) {
      if (classify(piece, line_no) == TagKind::Open) {
        const std::string id(piece.substr(1));
        chain_index(id);
        open_[id].push_back({pos, line_no});
      }
    }
    for (const auto piece : pieces) {
      switch (classify(piece, line_no)) {
        case TagKind::Open: break;
        case TagKind::Single: add_mention(std::string(piece.substr(1, piece.size() - 2)), pos, pos); break;
        case TagKind::Close: {
          const std::string id(piece.substr(0, piece.size() - 1));
          auto& stack = open_[id];
          if (stack.empty()) {
            throw ParseError(line_no, "closing tag '" + std::string(piece) + "' has no open mention");
          }
          const std::size_t start = stack.back().start;
          stack.pop_back();
          add_mention(id, start, pos);
          break;
        }
      }
    }
  }

  void end_sentence() {
    for (const auto& [id, stack] : open_) {
      if (!stack.empty()) {
        throw ParseError(stack.back().line, "unmatched opening tag '(" + id + "'");
      }
    }
    if (sentence_.empty()) return;
    for (auto& [chain, mention] : pending_) {
      doc_.chains[chain].mentions.push_back(std::move(mention));
    }
    pending_.clear();
    doc_.sentences.push_back(std::move(sentence_));
    sentence_.clear();
  }

  CorefDocument finish() {
    end_sentence();
    return std::move(doc_);
  }

 private:
  enum class TagKind { Open, Single, Close };

  static TagKind classify(std::string_view piece, std::size_t line_no) {
    const bool opens = !piece.empty() && piece.front() == '(';
    const bool closes = !piece.empty() && piece.back() == ')';
    const std::size_t id_len = piece.size() - (opens ? 1 : 0) - (closes ? 1 : 0);
    const std::string_view id = piece.substr(opens ? 1 : 0, id_len);
    if ((!opens && !closes) || piece.size() < 2 || id.empty() ||
        id.find_first_of("()") != std::string_view::npos) {
      throw ParseError(line_no, "malformed coreference tag '" + std::string(piece) + "'");
    }
    if (opens && closes) return TagKind::Single;
    return opens ? TagKind::Open : TagKind::Close;
  }

  std::size_t chain_index(const std::string& id) {
    const auto [it, inserted] = chain_ids_.emplace(id, doc_.chains.size());
    if (inserted) doc_.chains.push_back(Chain{doc_.doc_id + ":" + id, {}});
    return it->second;
  }

  void add_mention(const std::string& id, std::size_t start, std::size_t end) {
    Mention m;
    m.doc_id = doc_.doc_id;
    m.sentence_index = doc_.sentences.size();
    m.start = start;
    m.end = end;
    m.surface.assign(sentence_.begin() + static_cast<std::ptrdiff_t>(start),
                     sentence_.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    pending_.emplace_back(chain_index(id), std::move(m));
  }

  CorefDocument doc_;
  std::vector<Token> sentence_;
  std::unordered_map<std::string, std::size_t> chain_ids_;
  std::map<std::string, std::vector<OpenBracket>> open_;
  std::vector<std::pair<std::size_t, Mention>> pending_;
};

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<CorefDocument> parse_coref_documents(std::istream& in, const ConllColumns& columns,
                                                 std::string_view default_doc_id) {
  std::vector<CorefDocument> documents;
  std::optional<DocumentBuilder> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (starts_with(view, "#begin document")) {
      if (current) documents.push_back(current->finish());
      current.emplace(std::string(trim(view.substr(15))));
      continue;
    }
    if (starts_with(view, "#end document")) {
      if (!current) throw ParseError(line_no, "'#end document' without '#begin document'");
      documents.push_back(current->finish());
      current.reset();
      continue;
    }
    if (starts_with(view, "#")) continue;
    if (view.empty()) {
      if (current) current->end_sentence();
      continue;
    }
    const auto fields = tokenize_line(view);
    const auto n = static_cast<long>(fields.size());
    const long coref = columns.coref < 0 ? n + columns.coref : columns.coref;
    if (static_cast<long>(columns.word) >= n || coref < 0 || coref >= n) {
      throw ParseError(line_no, "row has " + std::to_string(n) +
                                    " columns; word or coreference column missing");
    }
    if (!current) current.emplace(std::string(default_doc_id));
    current->add_token(fields[columns.word], fields[static_cast<std::size_t>(coref)], line_no);
  }
  if (current) documents.push_back(current->finish());
  return documents;
}

std::vector<std::string> coref_tags(std::size_t sentence_length,
                                    const std::vector<std::pair<std::string, Mention>>& mentions) {
  std::vector<std::vector<std::string>> pieces(sentence_length);
  for (const auto& [id, m] : mentions) {
    if (m.end < m.start || m.end >= sentence_length) throw Error("mention span out of range");
    if (m.start == m.end) {
      pieces[m.start].push_back("(" + id + ")");
    } else {
      pieces[m.start].push_back("(" + id);
      pieces[m.end].push_back(id + ")");
    }
  }
  std::vector<std::string> tags;
  tags.reserve(sentence_length);
  for (const auto& p : pieces) {
    if (p.empty()) {
      tags.emplace_back("-");
      continue;
    }
    std::string tag;
    for (const auto& piece : p) {
      if (!tag.empty()) tag.push_back('|');
      tag += piece;
    }
    tags.push_back(std::move(tag));
  }
  return tags;
}

std::string_view to_string(AnimacyLabel label) {
  return label == AnimacyLabel::Animate ? "animate" : "inanimate";
}

std::optional<AnimacyLabel> parse_animacy(std::string_view text) {
  if (text == "animate") return AnimacyLabel::Animate;
  if (text == "inanimate") return AnimacyLabel::Inanimate;
  return std::nullopt;
}

std::string_view to_string(ChainLabel label) {
  switch (label) {
    case ChainLabel::Animate: return "animate";
    case ChainLabel::Inanimate: return "inanimate";
    case ChainLabel::Unlabeled: return "unlabeled";
    case ChainLabel::Conflicted: return "conflicted";
  }
  return "unlabeled";
}

ChainLabel label_chain(const Chain& chain) {
  static const std::vector<std::string_view> animate = {"she", "her", "he", "him", "his"};
  static const std::vector<std::string_view> inanimate = {"it", "its"};
  bool is_animate = false;
  bool is_inanimate = false;
  for (const auto& m : chain.mentions) {
    std::string surface;
    for (const auto& t : m.surface) {
      if (!surface.empty()) surface.push_back(' ');
      surface += t;
    }
    std::transform(surface.begin(), surface.end(), surface.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (std::find(animate.begin(), animate.end(), surface) != animate.end()) is_animate = true;
    if (std::find(inanimate.begin(), inanimate.end(), surface) != inanimate.end()) {
      is_inanimate = true;
    }
  }
  if (is_animate && is_inanimate) return ChainLabel::Conflicted;
  if (is_animate) return ChainLabel::Animate;
  if (is_inanimate) return ChainLabel::Inanimate;
  return ChainLabel::Unlabeled;
}

std::vector<MarkableExample> extract_examples(const std::vector<CorefDocument>& documents) {
  std::vector<MarkableExample> examples;
  for (const auto& doc : documents) {
    for (const auto& chain : doc.chains) {
      const ChainLabel label = label_chain(chain);
      if (label != ChainLabel::Animate && label != ChainLabel::Inanimate) continue;
      for (const auto& m : chain.mentions) {
        const auto& sentence = doc.sentences.at(m.sentence_index);
        if (m.start == 0 || m.end + 1 >= sentence.size()) continue;
        MarkableExample ex;
        ex.label = label == ChainLabel::Animate ? AnimacyLabel::Animate : AnimacyLabel::Inanimate;
        ex.left = sentence[m.start - 1];
        ex.right = sentence[m.end + 1];
        for (const auto& t : m.surface) {
          if (!ex.surface.empty()) ex.surface.push_back('_');
          ex.surface += t;
        }
        examples.push_back(std::move(ex));
      }
    }
  }
  return examples;
}

ExtractStats summarize(const std::vector<CorefDocument>& documents,
                       const std::vector<MarkableExample>& examples) {
  ExtractStats stats;
  for (const auto& doc : documents) {
    for (const auto& chain : doc.chains) {
      ++stats.chains;
      switch (label_chain(chain)) {
        case ChainLabel::Animate: ++stats.animate_chains; break;
        case ChainLabel::Inanimate: ++stats.inanimate_chains; break;
        case ChainLabel::Conflicted: ++stats.conflicted_chains; break;
        case ChainLabel::Unlabeled: break;
      }
    }
  }
  stats.examples = examples.size();
  return stats;
}

Dataset build_dataset(const std::vector<MarkableExample>& examples, const Vocabulary& mc_vocab,
                      const SplitConfig& split) {
  std::vector<MarkableExample> kept;
  for (const auto& ex : examples) {
    if (mc_vocab.contains(encode_mc(ex.mc()))) kept.push_back(ex);
  }
  const auto count = [&](AnimacyLabel l) {
    return static_cast<std::size_t>(
        std::count_if(kept.begin(), kept.end(), [l](const auto& e) { return e.label == l; }));
  };
  const std::size_t animate = count(AnimacyLabel::Animate);
  const std::size_t inanimate = count(AnimacyLabel::Inanimate);
  if (animate < split.test_per_class || inanimate < split.test_per_class) {
    throw Error("not enough examples for a balanced test set of " +
                std::to_string(split.test_per_class) + " per class: have " +
                std::to_string(animate) + " animate and " + std::to_string(inanimate) +
                " inanimate");
  }
  Rng rng(split.seed);
  rng.shuffle(std::span<MarkableExample>(kept));
  Dataset ds;
  std::size_t taken_animate = 0;
  std::size_t taken_inanimate = 0;
  for (auto& ex : kept) {
    auto& taken = ex.label == AnimacyLabel::Animate ? taken_animate : taken_inanimate;
    if (taken < split.test_per_class) {
      ++taken;
      ds.test.push_back(std::move(ex));
    } else {
      ds.train.push_back(std::move(ex));
    }
  }
  return ds;
}

void write_markables(std::ostream& out, const std::vector<MarkableExample>& examples) {
  for (const auto& ex : examples) {
    out << to_string(ex.label) << '\t' << ex.left << '\t' << ex.right << '\t'
        << encode_mc(ex.mc()) << '\t' << ex.surface << '\n';
  }
}

std::vector<MarkableExample> read_markables(std::istream& in) {
  std::vector<MarkableExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
      const std::size_t tab = line.find('\t', begin);
      fields.push_back(line.substr(begin, tab == std::string::npos ? tab : tab - begin));
      if (tab == std::string::npos) break;
      begin = tab + 1;
    }
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 tab-separated fields, found " +
                                    std::to_string(fields.size()));
    }
    const auto label = parse_animacy(fields[0]);
    if (!label) throw ParseError(line_no, "unknown label '" + fields[0] + "'");
    MarkableExample ex{*label, fields[1], fields[2], fields[4]};
    if (ex.left.empty() || ex.right.empty()) throw ParseError(line_no, "empty enclosing word");
    if (encode_mc(ex.mc()) != fields[3]) {
      throw ParseError(line_no, "encoded MC '" + fields[3] + "' does not match its words");
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

void write_markables(const std::filesystem::path& path,
                     const std::vector<MarkableExample>& examples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_markables(out, examples);
}

std::vector<MarkableExample> read_markables(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return read_markables(in);
}

}  // namespace mcembed
