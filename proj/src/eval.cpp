#include "mcembed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mcembed/error.hpp"

namespace mcembed {

EvalReport accuracy(std::span<const AnimacyLabel> preds, std::span<const AnimacyLabel> golds) {
  if (preds.size() != golds.size()) {
    throw Error("accuracy: " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(golds.size()) + " gold labels");
  }
  if (golds.empty()) throw Error("accuracy: empty evaluation set");
  EvalReport r;
  r.n = golds.size();
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool ok = preds[i] == golds[i];
    if (golds[i] == AnimacyLabel::Animate) {
      ++r.animate_total;
      r.animate_correct += ok;
    } else {
      ++r.inanimate_total;
      r.inanimate_correct += ok;
    }
    r.correct += ok;
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n);
  return r;
}

double mcnemar_exact(std::uint64_t n01, std::uint64_t n10) {
  const std::uint64_t n = n01 + n10;
  if (n == 0) return 1.0;
  const std::uint64_t k_max = std::min(n01, n10);
  // Lower tail of Binom(n, 1/2) accumulated in log space; 2^-n underflows
  // for large n.
  const double nd = static_cast<double>(n);
  double log_pmf = -nd * std::log(2.0);
  double log_tail = log_pmf;
  for (std::uint64_t k = 0; k < k_max; ++k) {
    log_pmf += std::log((nd - static_cast<double>(k)) / static_cast<double>(k + 1));
    const double hi = std::max(log_tail, log_pmf);
    log_tail = hi + std::log1p(std::exp(std::min(log_tail, log_pmf) - hi));
  }
  const double p = std::exp(std::log(2.0) + log_tail);
  // A tail too small for a double is reported as the smallest positive value.
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0);
}

double mcnemar(std::span<const AnimacyLabel> preds_a, std::span<const AnimacyLabel> preds_b,
               std::span<const AnimacyLabel> golds) {
  if (preds_a.size() != golds.size() || preds_b.size() != golds.size()) {
    throw Error("mcnemar: prediction and gold lengths differ");
  }
  std::uint64_t n01 = 0;
  std::uint64_t n10 = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool a = preds_a[i] == golds[i];
    const bool b = preds_b[i] == golds[i];
    if (a && !b) ++n01;
    if (!a && b) ++n10;
  }
  return mcnemar_exact(n01, n10);
}

std::vector<ComparisonRow> compare_systems(const std::vector<SystemPredictions>& systems,
                                           std::span<const AnimacyLabel> golds,
                                           const std::vector<Reference>& references) {
  std::vector<const SystemPredictions*> refs;
  for (const auto& r : references) {
    const auto it = std::find_if(systems.begin(), systems.end(),
                                 [&](const auto& s) { return s.name == r.name; });
    if (it == systems.end()) throw Error("unknown reference system '" + r.name + "'");
    refs.push_back(&*it);
  }
  std::vector<ComparisonRow> rows;
  for (const auto& sys : systems) {
    ComparisonRow row;
    row.name = sys.name;
    row.report = accuracy(sys.preds, golds);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      if (refs[r] == &sys) {
        row.p_values.push_back(1.0);
        continue;
      }
      const double p = mcnemar(sys.preds, refs[r]->preds, golds);
      row.p_values.push_back(p);
      const double ref_acc = accuracy(refs[r]->preds, golds).accuracy;
      if (row.report.accuracy < ref_acc && p < kSignificanceLevel) row.marks += references[r].mark;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::string scientific(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

}  // namespace

void write_report_table(std::ostream& out, const std::vector<ComparisonRow>& rows,
                        const std::vector<Reference>& references) {
  std::size_t width = std::string("representation").size();
  for (const auto& r : rows) width = std::max(width, r.name.size());
  const auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  out << pad("representation") << " | accuracy\n";
  out << std::string(width, '-') << "-+---------\n";
  for (const auto& r : rows) {
    out << pad(r.name) << " | " << fixed(r.report.accuracy, 3) << r.marks << '\n';
  }
  for (const auto& ref : references) {
    out << ref.mark << " significantly lower than " << ref.name << " (exact McNemar, p < "
        << fixed(kSignificanceLevel, 2) << ")\n";
  }
}

void write_report_tsv(std::ostream& out, const std::vector<ComparisonRow>& rows,
                      const std::vector<Reference>& references) {
  out << "system\tn\tcorrect\taccuracy\tanimate_correct\tanimate_total\tinanimate_correct"
         "\tinanimate_total\tmarks";
  for (const auto& ref : references) out << "\tp_vs_" << ref.name;
  out << '\n';
  for (const auto& r : rows) {
    out << r.name << '\t' << r.report.n << '\t' << r.report.correct << '\t'
        << fixed(r.report.accuracy, 6) << '\t' << r.report.animate_correct << '\t'
        << r.report.animate_total << '\t' << r.report.inanimate_correct << '\t'
        << r.report.inanimate_total << '\t' << (r.marks.empty() ? "-" : r.marks);
    for (const double p : r.p_values) out << '\t' << scientific(p);
    out << '\n';
  }
}

}  // namespace mcembed
