// mcembed: minimal-context embedding pipeline.
//
//   mcembed reformat    corpus -> pair corpus
//   mcembed train-mc    pair corpus -> MC embeddings
//   mcembed train-words corpus -> word embeddings
//   mcembed extract     CoNLL coreference files -> markables TSV
//   mcembed dataset     markables -> train/test split
//   mcembed fit         train split -> linear model
//   mcembed eval        models on the test split -> accuracy table
//   mcembed synth       synthetic benchmark files
//
// Every option can also be given as "name = value" in a --config file; the
// command line wins.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcembed/clf.hpp"
#include "mcembed/coref.hpp"
#include "mcembed/corpus.hpp"
#include "mcembed/embed.hpp"
#include "mcembed/error.hpp"
#include "mcembed/eval.hpp"
#include "mcembed/feats.hpp"
#include "mcembed/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mcembed;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

// Rethrows with the file name in front.
template <class F>
auto with_path(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (what.find(path.string()) != std::string::npos) throw;
    throw Error(path.string() + ": " + what);
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

fs::path bow_vocab_path(const fs::path& model) {
  return fs::path(model.string() + ".bowvocab");
}

// --- options --------------------------------------------------------------

void add_train_options(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--dim", c.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "passes over the corpus")->capture_default_str();
  cmd->add_option("--negatives", c.negatives, "negative samples per pair")->capture_default_str();
  cmd->add_option("--lr", c.initial_lr, "initial learning rate")->capture_default_str();
  cmd->add_option("--min-lr", c.min_lr, "final learning rate")->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--power", c.unigram_power, "unigram table exponent")->capture_default_str();
  cmd->add_option("--table-size", c.table_size, "negative table slots")->capture_default_str();
  cmd->add_option("--window", c.window, "context window")->capture_default_str();
  cmd->add_option("--workers", c.workers, "training threads; 1 is deterministic")
      ->capture_default_str();
  cmd->add_option("--min-count", c.min_count, "minimum token count")->capture_default_str();
  cmd->add_option("--subsample", c.subsample, "frequent-token threshold, 0 = off")
      ->capture_default_str();
}

void report_training(const TrainResult& r, const fs::path& out, std::size_t saved) {
  for (std::size_t e = 0; e < r.stats.epoch_mean_loss.size(); ++e) {
    std::cout << "epoch " << e + 1 << " loss " << format_double(r.stats.epoch_mean_loss[e])
              << " updates " << r.stats.epoch_updates[e] << '\n';
  }
  std::cout << "vocabulary " << r.store.size() << ", saved " << saved << " vectors to "
            << out.string() << '\n';
}

std::size_t count_saved(const EmbeddingStore& store, SaveFilter filter) {
  if (filter == SaveFilter::All) return store.size();
  std::size_t n = 0;
  for (std::size_t i = 0; i < store.size(); ++i) n += is_encoded_mc(store.vocab().token(i));
  return n;
}

// CoNLL inputs: files as given, directories searched for *conll files.
std::vector<fs::path> conll_files(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (!fs::exists(in)) throw Error("'" + in.string() + "' does not exist");
    if (!fs::is_directory(in)) {
      files.push_back(in);
      continue;
    }
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(in)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() >= 5 && name.ends_with("conll")) {
        found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    if (found.empty()) throw Error("no *conll files under '" + in.string() + "'");
    files.insert(files.end(), found.begin(), found.end());
  }
  return files;
}

// "name,repr,model[,embeddings]"
struct SystemSpec {
  std::string name;
  Representation repr = Representation::Mc;
  fs::path model;
  fs::path embeddings;
};

SystemSpec parse_system(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char ch : text) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4) {
    throw CLI::ValidationError("--system", "expected NAME,REPR,MODEL[,EMBEDDINGS], got '" + text + "'");
  }
  SystemSpec s;
  s.name = parts[0];
  const auto repr = parse_representation(parts[1]);
  if (!repr) throw CLI::ValidationError("--system", "unknown representation '" + parts[1] + "'");
  s.repr = *repr;
  s.model = parts[2];
  if (parts.size() == 4) s.embeddings = parts[3];
  if (s.repr != Representation::Bow && s.embeddings.empty()) {
    throw CLI::ValidationError("--system", "'" + s.name + "' needs an embeddings file");
  }
  return s;
}

// Holds whatever a featurizer points into.
struct LoadedFeatures {
  EmbeddingStore store;
  Vocabulary vocab;

  Featurizer featurizer(Representation repr, const fs::path& embeddings, const fs::path& model) {
    switch (repr) {
      case Representation::Mc:
        store = with_path(embeddings, [&] { return load_embeddings(embeddings); });
        return Featurizer::mc(store);
      case Representation::Concat:
        store = with_path(embeddings, [&] { return load_embeddings(embeddings); });
        return Featurizer::concat(store);
      case Representation::Bow: {
        const auto path = bow_vocab_path(model);
        auto in = open_in(path);
        vocab = with_path(path, [&] { return read_vocab(in); });
        return Featurizer::bow(vocab);
      }
    }
    throw Error("unknown representation");
  }
};

// --- config file ------------------------------------------------------------

std::map<std::string, std::string> read_config(const fs::path& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, path.string() + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ParseError(line_no, path.string() + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

// Config entries become leading "--key=value" arguments of the chosen
// subcommand. Keys no subcommand knows are errors; keys of other subcommands
// are ignored so one file can serve the whole pipeline.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  fs::path config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty() || args.empty()) return args;
  CLI::App* cmd = app.get_subcommand_no_throw(args.front());
  if (!cmd) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(config)) {
    if (key == "config") throw Error("config files cannot include other config files");
    if (cmd->get_option_no_throw("--" + key)) {
      injected.push_back("--" + key + "=" + value);
      continue;
    }
    bool known = false;
    for (const auto* sub : app.get_subcommands([](CLI::App*) { return true; })) known = known || sub->get_option_no_throw("--" + key);
    if (!known) throw Error(config.string() + ": unknown key '" + key + "'");
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-context embeddings and animacy classification"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key=value file with option defaults");

  // reformat
  fs::path reformat_in, reformat_out;
  GapConfig gap;
  auto* reformat = app.add_subcommand("reformat", "Rewrite a corpus as MC/inner-word pairs");
  reformat->add_option("--input", reformat_in, "tokenized corpus, one sentence per line")->required();
  reformat->add_option("--output", reformat_out, "pair corpus")->required();
  reformat->add_option("--k-min", gap.k_min, "smallest distance between MC words")->capture_default_str();
  reformat->add_option("--k-max", gap.k_max, "largest distance between MC words")->capture_default_str();

  // train-mc / train-words
  fs::path mc_in, mc_out, words_in, words_out;
  TrainConfig mc_train, words_train;
  auto* train_mc = app.add_subcommand("train-mc", "Train MC embeddings on a pair corpus");
  train_mc->add_option("--input", mc_in, "pair corpus")->required();
  train_mc->add_option("--output", mc_out, "embedding file (MC rows only)")->required();
  add_train_options(train_mc, mc_train);
  auto* train_words = app.add_subcommand("train-words", "Train word embeddings on a corpus");
  train_words->add_option("--input", words_in, "tokenized corpus")->required();
  train_words->add_option("--output", words_out, "embedding file")->required();
  add_train_options(train_words, words_train);

  // extract
  std::vector<fs::path> extract_in;
  fs::path extract_out;
  ConllColumns columns;
  auto* extract = app.add_subcommand("extract", "Label coreference chains and extract markables");
  extract->add_option("--input", extract_in, "CoNLL file or directory (repeatable)")->required();
  extract->add_option("--output", extract_out, "markables TSV")->required();
  extract->add_option("--word-column", columns.word, "0-based word column")->capture_default_str();
  extract->add_option("--coref-column", columns.coref, "coreference column, negative from the end")
      ->capture_default_str();

  // dataset
  fs::path ds_markables, ds_mcs, ds_train, ds_test;
  SplitConfig split;
  auto* dataset = app.add_subcommand("dataset", "Split markables into train and balanced test sets");
  dataset->add_option("--markables", ds_markables, "markables TSV")->required();
  dataset->add_option("--mc-embeddings", ds_mcs, "MC embeddings; markables without one are dropped")
      ->required();
  dataset->add_option("--train-out", ds_train, "training markables")->required();
  dataset->add_option("--test-out", ds_test, "test markables")->required();
  dataset->add_option("--test-per-class", split.test_per_class, "test examples per class")
      ->capture_default_str();
  dataset->add_option("--seed", split.seed, "shuffle seed")->capture_default_str();

  // fit
  fs::path fit_train, fit_embeddings, fit_model;
  std::string fit_repr;
  FitConfig fit_cfg;
  auto* fitcmd = app.add_subcommand("fit", "Train a linear animacy classifier");
  fitcmd->add_option("--train", fit_train, "training markables")->required();
  fitcmd->add_option("--repr", fit_repr, "mc, concat or bow")
      ->required()
      ->check(CLI::IsMember({"mc", "concat", "bow"}));
  fitcmd->add_option("--embeddings", fit_embeddings, "MC embeddings (mc) or word embeddings (concat)");
  fitcmd->add_option("--model", fit_model, "output model; bow also writes MODEL.bowvocab")->required();
  fitcmd->add_option("--c", fit_cfg.c, "misclassification cost")->capture_default_str();
  fitcmd->add_option("--c-inanimate", fit_cfg.class_weights.c_inanimate, "inanimate cost factor")
      ->capture_default_str();
  fitcmd->add_option("--c-animate", fit_cfg.class_weights.c_animate, "animate cost factor")
      ->capture_default_str();
  fitcmd->add_option("--tolerance", fit_cfg.tolerance, "stopping tolerance")->capture_default_str();
  fitcmd->add_option("--max-epochs", fit_cfg.max_epochs, "epoch cap")->capture_default_str();
  fitcmd->add_option("--seed", fit_cfg.seed, "visiting-order seed")->capture_default_str();

  // eval
  fs::path eval_test, eval_tsv;
  std::vector<std::string> eval_systems, eval_compare;
  auto* evalcmd = app.add_subcommand("eval", "Score models on test markables");
  evalcmd->add_option("--test", eval_test, "test markables")->required();
  evalcmd->add_option("--system", eval_systems, "NAME,REPR,MODEL[,EMBEDDINGS] (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  evalcmd->add_option("--compare", eval_compare, "reference system NAME[=MARK] (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  evalcmd->add_option("--tsv", eval_tsv, "also write a TSV report");

  // synth
  fs::path synth_out;
  SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Write the synthetic animacy benchmark");
  synth->add_option("--out-dir", synth_out, "writes corpus.txt, train.tsv, test.tsv")->required();
  synth->add_option("--animate-mcs", synth_cfg.n_animate_mcs)->capture_default_str();
  synth->add_option("--inanimate-mcs", synth_cfg.n_inanimate_mcs)->capture_default_str();
  synth->add_option("--neutral-mcs", synth_cfg.n_neutral_mcs)->capture_default_str();
  synth->add_option("--nouns-per-class", synth_cfg.nouns_per_class)->capture_default_str();
  synth->add_option("--sentences", synth_cfg.sentences)->capture_default_str();
  synth->add_option("--noise", synth_cfg.noise, "chance a selective MC takes the other class")
      ->capture_default_str();
  synth->add_option("--test-mcs-per-class", synth_cfg.test_mcs_per_class,
                    "MC types per class held out for testing")
      ->capture_default_str();
  synth->add_option("--markables", synth_cfg.markables, "gold markables drawn")->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "mcembed: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mcembed: error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*reformat) {
      gap.validate();
      auto in = open_in(reformat_in);
      auto out = open_out(reformat_out);
      const auto n = with_path(reformat_in, [&] { return reformat_corpus(in, out, gap); });
      if (!out.flush()) throw Error("write failed: '" + reformat_out.string() + "'");
      std::cout << "pairs " << n << '\n';
    } else if (*train_mc) {
      if (!fs::exists(mc_in)) throw Error("'" + mc_in.string() + "' does not exist");
      const auto r = with_path(mc_in, [&] { return train_pair_file(mc_in, mc_train); });
      save_embeddings(mc_out, r.store, SaveFilter::MinimalContextsOnly);
      report_training(r, mc_out, count_saved(r.store, SaveFilter::MinimalContextsOnly));
    } else if (*train_words) {
      if (!fs::exists(words_in)) throw Error("'" + words_in.string() + "' does not exist");
      const auto r = with_path(words_in, [&] { return train_file(words_in, words_train); });
      save_embeddings(words_out, r.store, SaveFilter::All);
      report_training(r, words_out, r.store.size());
    } else if (*extract) {
      std::vector<CorefDocument> docs;
      for (const auto& file : conll_files(extract_in)) {
        auto in = open_in(file);
        auto parsed = with_path(file, [&] {
          return parse_coref_documents(in, columns, file.filename().string());
        });
        std::move(parsed.begin(), parsed.end(), std::back_inserter(docs));
      }
      const auto examples = extract_examples(docs);
      write_markables(extract_out, examples);
      const auto s = summarize(docs, examples);
      std::cout << "documents " << docs.size() << "\nchains " << s.chains << "\nanimate chains "
                << s.animate_chains << "\ninanimate chains " << s.inanimate_chains
                << "\nconflicted chains " << s.conflicted_chains << "\nmarkables " << s.examples
                << '\n';
    } else if (*dataset) {
      const auto examples = with_path(ds_markables, [&] { return read_markables(ds_markables); });
      const auto mcs = with_path(ds_mcs, [&] { return load_embeddings(ds_mcs); });
      const auto ds = build_dataset(examples, mcs.vocab(), split);
      write_markables(ds_train, ds.train);
      write_markables(ds_test, ds.test);
      std::cout << "train " << ds.train.size() << "\ntest " << ds.test.size() << '\n';
    } else if (*fitcmd) {
      const auto repr = *parse_representation(fit_repr);
      if (repr != Representation::Bow && fit_embeddings.empty()) {
        throw CLI::RequiredError("--embeddings (needed for --repr " + fit_repr + ")");
      }
      const auto train = with_path(fit_train, [&] { return read_markables(fit_train); });
      LoadedFeatures loaded;
      if (repr == Representation::Bow) {
        loaded.vocab = enclosing_word_vocab(train);
        auto out = open_out(bow_vocab_path(fit_model));
        write_vocab(out, loaded.vocab);
      }
      const Featurizer featurizer =
          repr == Representation::Bow ? Featurizer::bow(loaded.vocab)
                                      : loaded.featurizer(repr, fit_embeddings, fit_model);
      const auto data = featurize(train, featurizer);
      FitReport report;
      const auto model = fit(data, fit_cfg, &report);
      save_model(fit_model, model);
      std::cout << "examples " << data.size() << "\ndim " << model.dim() << "\nepochs "
                << report.epochs << (report.converged ? " (converged)" : " (epoch cap)")
                << "\nobjective " << format_double(primal_objective(model, data, fit_cfg))
                << '\n';
    } else if (*evalcmd) {
      const auto test = with_path(eval_test, [&] { return read_markables(eval_test); });
      const auto golds = gold_labels(test);
      std::vector<SystemPredictions> systems;
      for (const auto& text : eval_systems) {
        const auto spec = parse_system(text);
        const auto model = with_path(spec.model, [&] { return load_model(spec.model); });
        LoadedFeatures loaded;
        const auto featurizer = loaded.featurizer(spec.repr, spec.embeddings, spec.model);
        systems.push_back({spec.name, predict_all(model, test, featurizer)});
      }
      static const char* default_marks[] = {"*", "+", "#", "^"};
      std::vector<Reference> refs;
      for (const auto& text : eval_compare) {
        const auto eq = text.find('=');
        Reference r;
        r.name = text.substr(0, eq);
        r.mark = eq == std::string::npos ? default_marks[refs.size() % 4] : text.substr(eq + 1);
        refs.push_back(r);
      }
      const auto rows = compare_systems(systems, golds, refs);
      write_report_table(std::cout, rows, refs);
      if (!eval_tsv.empty()) {
        auto out = open_out(eval_tsv);
        write_report_tsv(out, rows, refs);
      }
    } else if (*synth) {
      const auto data = gen_synthetic(synth_cfg);
      {
        auto out = open_out(synth_out / "corpus.txt");
        for (const auto& s : data.corpus) out << s << '\n';
      }
      write_markables(synth_out / "train.tsv", data.train);
      write_markables(synth_out / "test.tsv", data.test);
      std::cout << "sentences " << data.corpus.size() << "\ntrain " << data.train.size()
                << "\ntest " << data.test.size() << '\n';
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "mcembed: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    std::cerr << "mcembed: error: " << what << '\n';
    return 1;
  }
  return 0;
}
