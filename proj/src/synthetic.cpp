#include "mcembed/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "mcembed/error.hpp"
#include "mcembed/rng.hpp"

namespace mcembed {

void SynthConfig::validate() const {
  if (!(noise >= 0.0) || !(noise < 0.5)) throw Error("noise must lie in [0, 0.5)");
  if (nouns_per_class < 1) throw Error("nouns_per_class must be >= 1");
  if (sentences < 1) throw Error("sentences must be >= 1");
  if (test_mcs_per_class < 1) throw Error("test_mcs_per_class must be >= 1");
  if (test_mcs_per_class >= n_animate_mcs || test_mcs_per_class >= n_inanimate_mcs) {
    throw Error("infeasible split: " + std::to_string(test_mcs_per_class) +
                " test MC types per class leaves no training types (animate types: " +
                std::to_string(n_animate_mcs) + ", inanimate types: " +
                std::to_string(n_inanimate_mcs) + ")");
  }
  if (markables < 4) throw Error("markables must be >= 4");
}

namespace {

enum class TypeClass { Animate, Inanimate, Neutral };

struct Generator {
  explicit Generator(const SynthConfig& c) : config(c), rng(c.seed) {
    const std::size_t types = c.n_animate_mcs + c.n_inanimate_mcs + c.n_neutral_mcs;
    for (std::size_t t = 0; t < types; ++t) {
      if (t < c.n_animate_mcs) {
        classes.push_back(TypeClass::Animate);
      } else if (t < c.n_animate_mcs + c.n_inanimate_mcs) {
        classes.push_back(TypeClass::Inanimate);
      } else {
        classes.push_back(TypeClass::Neutral);
      }
    }
  }

  std::string left(std::size_t t) const { return "L" + std::to_string(t); }
  std::string right(std::size_t t) const { return "R" + std::to_string(t); }

  std::string noun(TypeClass pool) {
    const auto k = rng.below(config.nouns_per_class);
    return (pool == TypeClass::Animate ? "noun_a" : "noun_i") + std::to_string(k);
  }

  std::string draw_noun(TypeClass type_class) {
    if (type_class == TypeClass::Neutral) {
      return noun(rng.bernoulli(0.5) ? TypeClass::Animate : TypeClass::Inanimate);
    }
    const TypeClass other =
        type_class == TypeClass::Animate ? TypeClass::Inanimate : TypeClass::Animate;
    return noun(rng.bernoulli(config.noise) ? other : type_class);
  }

  const SynthConfig& config;
  Rng rng;
  std::vector<TypeClass> classes;
};

}  // namespace

SynthData gen_synthetic(const SynthConfig& config) {
  config.validate();
  Generator gen(config);
  const std::size_t types = gen.classes.size();
  const std::size_t selective = config.n_animate_mcs + config.n_inanimate_mcs;

  // Held-out types: a seeded sample of each class.
  std::vector<bool> is_test(types, false);
  const auto hold_out = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> ids(count);
    std::iota(ids.begin(), ids.end(), begin);
    gen.rng.shuffle(std::span<std::size_t>(ids));
    for (std::size_t i = 0; i < config.test_mcs_per_class; ++i) is_test[ids[i]] = true;
  };
  hold_out(0, config.n_animate_mcs);
  hold_out(config.n_animate_mcs, config.n_inanimate_mcs);

  SynthData data;
  data.corpus.reserve(config.sentences);
  for (std::size_t s = 0; s < config.sentences; ++s) {
    const auto t = static_cast<std::size_t>(gen.rng.below(types));
    data.corpus.push_back(gen.left(t) + ' ' + gen.draw_noun(gen.classes[t]) + ' ' + gen.right(t));
  }

  std::vector<MarkableExample> test;
  for (std::size_t m = 0; m < config.markables; ++m) {
    const auto t = static_cast<std::size_t>(gen.rng.below(selective));
    MarkableExample ex;
    ex.label = gen.classes[t] == TypeClass::Animate ? AnimacyLabel::Animate
                                                     : AnimacyLabel::Inanimate;
    ex.left = gen.left(t);
    ex.right = gen.right(t);
    ex.surface = gen.draw_noun(gen.classes[t]);
    (is_test[t] ? test : data.train).push_back(std::move(ex));
  }

  const auto count = [&](AnimacyLabel l) {
    return static_cast<std::size_t>(
        std::count_if(test.begin(), test.end(), [l](const auto& e) { return e.label == l; }));
  };
  const std::size_t per_class = std::min(count(AnimacyLabel::Animate), count(AnimacyLabel::Inanimate));
  std::size_t animate = 0;
  std::size_t inanimate = 0;
  for (auto& ex : test) {
    auto& taken = ex.label == AnimacyLabel::Animate ? animate : inanimate;
    if (taken < per_class) {
      ++taken;
      data.test.push_back(std::move(ex));
    }
  }

  const auto has_both = [](const std::vector<MarkableExample>& v) {
    const auto animate_n = std::count_if(v.begin(), v.end(),
                                         [](const auto& e) { return e.label == AnimacyLabel::Animate; });
    return animate_n > 0 && static_cast<std::size_t>(animate_n) < v.size();
  };
  if (!has_both(data.train) || !has_both(data.test)) {
    throw Error("infeasible config: " + std::to_string(config.markables) +
                " markables do not cover both classes in both splits");
  }

  for (std::size_t t = 0; t < selective; ++t) {
    const std::string mc = encode_mc({gen.left(t), gen.right(t)});
    (is_test[t] ? data.test_mcs : data.train_mcs).push_back(mc);
  }
  std::sort(data.train_mcs.begin(), data.train_mcs.end());
  std::sort(data.test_mcs.begin(), data.test_mcs.end());
  return data;
}

}  // namespace mcembed
