#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcembed/coref.hpp"
#include "mcembed/feats.hpp"

namespace mcembed {

// Per-class multipliers on the misclassification cost C.
struct ClassWeights {
  double c_inanimate = 3.0;
  double c_animate = 1.0;

  double of(AnimacyLabel label) const {
    return label == AnimacyLabel::Animate ? c_animate : c_inanimate;
  }
  void validate() const;
};

struct FitConfig {
  ClassWeights class_weights;
  double c = 1.0;
  double tolerance = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct LabeledFeature {
  FeatureVector x;
  AnimacyLabel y;
};

// sign(w.x + b), +1 = Animate. A zero decision value predicts Animate.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::vector<double> weights, double bias);

  std::size_t dim() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double bias() const { return bias_; }

  double decision(const FeatureVector& x) const;
  AnimacyLabel predict(const FeatureVector& x) const;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct FitReport {
  int epochs = 0;
  bool converged = false;
  // Maximal KKT violation measured at the start of each epoch, and at exit.
  std::vector<double> violation;
  // Dual objective sum(alpha) - |w|^2 / 2 at the same points.
  std::vector<double> dual_objective;
  // Primal minus dual objective at the last check.
  double duality_gap = 0.0;
  std::vector<double> alpha;
  std::vector<double> upper_bound;
};

// L2-regularized, class-weighted hinge loss with an unregularized bias,
//   min 1/2 |w|^2 + C * sum_i cw(y_i) * max(0, 1 - y_i (w.x_i + b)),
// solved in the dual by coordinate descent over pairs of variables so that
// sum_i y_i alpha_i = 0 holds after every step. Each epoch measures the
// maximal KKT violation with exact gradients and stops once it is below
// tolerance and the duality gap is below tolerance relative to the dual;
// otherwise it visits every example in seeded-random order and pairs it with
// the most violating partner of the epoch's ranking. The bias is the exact
// minimizer of the objective for the final weights.
LinearModel fit(std::span<const LabeledFeature> data, const FitConfig& config,
                FitReport* report = nullptr);

std::vector<LabeledFeature> featurize(std::span<const MarkableExample> examples,
                                      const Featurizer& featurizer);
std::vector<AnimacyLabel> predict_all(const LinearModel& model,
                                      std::span<const MarkableExample> examples,
                                      const Featurizer& featurizer);
std::vector<AnimacyLabel> gold_labels(std::span<const MarkableExample> examples);

// The value fit minimizes, for reporting.
double primal_objective(const LinearModel& model, std::span<const LabeledFeature> data,
                        const FitConfig& config);

// Line 1 "dim bias", line 2 the weights, line 3 the label map.
void save_model(std::ostream& out, const LinearModel& model);
LinearModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace mcembed
