#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcembed/coref.hpp"

namespace mcembed {

struct EvalReport {
  double accuracy = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t animate_total = 0;
  std::size_t animate_correct = 0;
  std::size_t inanimate_total = 0;
  std::size_t inanimate_correct = 0;
};

EvalReport accuracy(std::span<const AnimacyLabel> preds, std::span<const AnimacyLabel> golds);

// Exact two-sided McNemar test from the discordant counts:
// p = min(1, 2 * P[Binom(n01 + n10, 1/2) <= min(n01, n10)]).
double mcnemar_exact(std::uint64_t n01, std::uint64_t n10);

// n01 counts items A gets right and B gets wrong; n10 the reverse.
double mcnemar(std::span<const AnimacyLabel> preds_a, std::span<const AnimacyLabel> preds_b,
               std::span<const AnimacyLabel> golds);

inline constexpr double kSignificanceLevel = 0.05;

struct SystemPredictions {
  std::string name;
  std::vector<AnimacyLabel> preds;
};

struct Reference {
  std::string name;  // must match a system
  std::string mark;  // e.g. "*"
};

struct ComparisonRow {
  std::string name;
  EvalReport report;
  std::string marks;
  // p-value against each reference, in reference order (1 for itself).
  std::vector<double> p_values;
};

// A system gets a reference's mark when it is less accurate than the
// reference and McNemar's p is below kSignificanceLevel.
std::vector<ComparisonRow> compare_systems(const std::vector<SystemPredictions>& systems,
                                           std::span<const AnimacyLabel> golds,
                                           const std::vector<Reference>& references);

// Plain-text table: representation, accuracy, marks; then a legend.
void write_report_table(std::ostream& out, const std::vector<ComparisonRow>& rows,
                        const std::vector<Reference>& references);
// Header row, then one row per system: name, n, correct, accuracy,
// animate/inanimate correct and totals, marks, p-values.
void write_report_tsv(std::ostream& out, const std::vector<ComparisonRow>& rows,
                      const std::vector<Reference>& references);

}  // namespace mcembed
