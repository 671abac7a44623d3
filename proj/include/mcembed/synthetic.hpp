#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcembed/coref.hpp"

namespace mcembed {

// Desk-scale animacy benchmark. Every MC type "L<t> * R<t>" selects nouns of
// one class (or neither, for neutral types); sentences are "L<t> noun R<t>".
// Classifier test types are disjoint from classifier training types, while
// the embedding corpus covers all types.
struct SynthConfig {
  std::size_t n_animate_mcs = 40;
  std::size_t n_inanimate_mcs = 40;
  std::size_t n_neutral_mcs = 20;
  std::size_t nouns_per_class = 30;
  std::size_t sentences = 200'000;
  // Probability that a selective type draws its noun from the other pool.
  double noise = 0.1;
  // Selective MC types per class held out for the classifier test set.
  std::size_t test_mcs_per_class = 10;
  // Gold markables drawn before the test set is balanced.
  std::size_t markables = 8'000;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthData {
  std::vector<std::string> corpus;
  std::vector<MarkableExample> train;
  std::vector<MarkableExample> test;  // balanced
  std::vector<std::string> train_mcs;  // encoded MC types, sorted
  std::vector<std::string> test_mcs;
};

// Gold markables come from selective types only and carry their type's class.
SynthData gen_synthetic(const SynthConfig& config);

}  // namespace mcembed
