#include <sstream>

#include "doctest.h"
#include "mcembed/clf.hpp"
#include "mcembed/error.hpp"
#include "mcembed/rng.hpp"
#include "oracles/svm_oracle.hpp"

using namespace mcembed;

namespace {

constexpr auto A = AnimacyLabel::Animate;
constexpr auto I = AnimacyLabel::Inanimate;

std::vector<LabeledFeature> random_problem(Rng& rng, std::size_t n, std::size_t dim, double shift) {
  std::vector<LabeledFeature> data;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = i % 2 == 0 ? A : (i % 3 == 0 ? A : I);
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.uniform(-1, 1);
    x[0] += y == A ? shift : -shift;
    data.push_back({FeatureVector::dense(x), y});
  }
  return data;
}

oracle::SvmProblem to_oracle(std::span<const LabeledFeature> data, const FitConfig& cfg) {
  oracle::SvmProblem p;
  for (const auto& d : data) {
    p.x.push_back(d.x.to_dense());
    p.y.push_back(d.y == A ? 1.0 : -1.0);
    p.c.push_back(cfg.c * cfg.class_weights.of(d.y));
  }
  return p;
}

double yval(AnimacyLabel l) { return l == A ? 1.0 : -1.0; }

}  // namespace

TEST_CASE("config validation") {
  FitConfig c;
  CHECK(c.class_weights.c_inanimate == 3.0);
  CHECK(c.class_weights.c_animate == 1.0);
  CHECK_NOTHROW(c.validate());
  c.c = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS((ClassWeights{-1, 1}.validate()), Error);
}

TEST_CASE("linearly separable data is separated") {
  std::vector<LabeledFeature> data = {
      {FeatureVector::dense({2, 0}), A},  {FeatureVector::dense({3, 1}), A},
      {FeatureVector::dense({-2, 0}), I}, {FeatureVector::dense({-3, -1}), I},
  };
  FitReport report;
  const auto model = fit(data, FitConfig{}, &report);
  CHECK(report.converged);
  for (const auto& d : data) CHECK(model.predict(d.x) == d.y);
  // Hard-margin solution: w = (0.5, 0), b = 0.
  CHECK(model.weights()[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(model.bias() == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("fit input errors") {
  CHECK_THROWS_AS(fit({}, FitConfig{}), Error);
  std::vector<LabeledFeature> one = {{FeatureVector::dense({1}), A}, {FeatureVector::dense({2}), A}};
  CHECK_THROWS_AS(fit(one, FitConfig{}), Error);
  std::vector<LabeledFeature> mixed = {{FeatureVector::dense({1}), A},
                                       {FeatureVector::dense({2, 3}), I}};
  CHECK_THROWS_AS(fit(mixed, FitConfig{}), Error);
}

TEST_CASE("a zero decision value predicts animate") {
  const LinearModel m({1.0, -1.0}, 0.0);
  CHECK(m.predict(FeatureVector::dense({2, 2})) == A);
  CHECK(m.predict(FeatureVector::dense({1, 2})) == I);
  CHECK(LinearModel({}, 0.0).predict(FeatureVector::dense({})) == A);
}

TEST_CASE("property: fit reaches the reference optimum") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_problem(rng, 10 + rng.below(41), 1 + rng.below(10), rng.uniform(0, 1.5));
    FitConfig cfg;
    cfg.seed = trial;
    FitReport report;
    const auto model = fit(data, cfg, &report);
    CHECK(report.converged);
    const auto p = to_oracle(data, cfg);
    const auto ref = oracle::solve_svm(p);
    const std::vector<double> w(model.weights().begin(), model.weights().end());
    const double ours = oracle::primal_value(p, w, model.bias());
    CHECK(ours == doctest::Approx(primal_objective(model, data, cfg)).epsilon(1e-12));
    CHECK(std::abs(ours - ref.primal) <= 1e-4 * std::abs(ref.primal));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double margin = oracle::dot(ref.w, p.x[i]) + ref.b;
      if (std::abs(margin) > 1e-3) CHECK((margin >= 0 ? A : I) == model.predict(data[i].x));
    }
  }
}

TEST_CASE("property: dual feasibility and monotone dual objective") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = random_problem(rng, 60, 5, 0.3);
    FitConfig cfg;
    cfg.class_weights = {2.5, 0.7};
    FitReport r;
    fit(data, cfg, &r);
    REQUIRE(r.alpha.size() == data.size());
    double balance = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(r.alpha[i] >= 0.0);
      CHECK(r.alpha[i] <= r.upper_bound[i]);
      CHECK(r.upper_bound[i] == cfg.class_weights.of(data[i].y));
      balance += yval(data[i].y) * r.alpha[i];
    }
    CHECK(std::abs(balance) < 1e-9);
    for (std::size_t e = 1; e < r.dual_objective.size(); ++e) {
      CHECK(r.dual_objective[e] >= r.dual_objective[e - 1] - 1e-9);
    }
    CHECK(r.violation.back() < cfg.tolerance);
  }
}

TEST_CASE("fit is deterministic for a seed and handles sparse features") {
  std::vector<LabeledFeature> data;
  Rng rng(9);
  for (int i = 0; i < 80; ++i) {
    const auto y = rng.bernoulli(0.5) ? A : I;
    const std::uint32_t left = static_cast<std::uint32_t>(rng.below(5)) + (y == A ? 0 : 3);
    data.push_back({FeatureVector::sparse(16, {{left, 1.0}, {8 + static_cast<std::uint32_t>(rng.below(8)), 1.0}}), y});
  }
  const auto a = fit(data, FitConfig{});
  const auto b = fit(data, FitConfig{});
  CHECK(a == b);
  const auto p = to_oracle(data, FitConfig{});
  const auto ref = oracle::solve_svm(p);
  CHECK(primal_objective(a, data, FitConfig{}) == doctest::Approx(ref.primal).epsilon(1e-4));
}

TEST_CASE("scaling C and the features consistently preserves predictions") {
  Rng rng(12);
  const auto data = random_problem(rng, 40, 3, 0.8);
  const auto base = fit(data, FitConfig{});
  std::vector<LabeledFeature> scaled;
  for (const auto& d : data) {
    auto x = d.x.to_dense();
    for (auto& v : x) v *= 2.0;
    scaled.push_back({FeatureVector::dense(x), d.y});
  }
  FitConfig cfg;
  cfg.c = 0.25;  // w' = w / 2 and the same margins
  const auto other = fit(scaled, cfg);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (base.predict(data[i].x) == other.predict(scaled[i].x)) ++agree;
  }
  CHECK(agree >= data.size() - 1);
}

TEST_CASE("raising the inanimate weight does not lower inanimate recall") {
  Rng rng(21);
  const auto data = random_problem(rng, 200, 4, 0.2);
  std::size_t previous = 0;
  for (const double wi : {0.5, 1.0, 3.0, 10.0}) {
    FitConfig cfg;
    cfg.class_weights = {wi, 1.0};
    const auto model = fit(data, cfg);
    std::size_t recall = 0;
    for (const auto& d : data) {
      if (d.y == I && model.predict(d.x) == I) ++recall;
    }
    CHECK(recall + 2 >= previous);
    previous = recall;
  }
}

TEST_CASE("model round trip") {
  const LinearModel m({0.1, -1e-300, 3.25}, -0.7);
  std::stringstream io;
  save_model(io, m);
  CHECK(load_model(io) == m);
  std::istringstream bad("2 0.5\n1\n");
  CHECK_THROWS_AS(load_model(bad), ParseError);
}

TEST_CASE("featurize and predict_all") {
  std::vector<MarkableExample> ex = {{A, "a", "b", "x"}, {I, "c", "d", "y"}};
  const auto vocab = enclosing_word_vocab(ex);
  const auto f = Featurizer::bow(vocab);
  const auto data = featurize(ex, f);
  REQUIRE(data.size() == 2);
  CHECK(data[1].y == I);
  const auto model = fit(data, FitConfig{});
  CHECK(predict_all(model, ex, f) == gold_labels(ex));
}
