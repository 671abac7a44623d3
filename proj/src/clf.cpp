#include "mcembed/clf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "mcembed/error.hpp"
#include "mcembed/rng.hpp"

namespace mcembed {

void ClassWeights::validate() const {
  if (!(c_inanimate > 0.0) || !(c_animate > 0.0)) throw Error("class weights must be > 0");
}

void FitConfig::validate() const {
  class_weights.validate();
  if (!(c > 0.0)) throw Error("C must be > 0");
  if (!(tolerance > 0.0)) throw Error("tolerance must be > 0");
  if (max_epochs < 1) throw Error("max_epochs must be >= 1");
}

LinearModel::LinearModel(std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  for (const double w : weights_) {
    if (!std::isfinite(w)) throw Error("model weight is not finite");
  }
  if (!std::isfinite(bias_)) throw Error("model bias is not finite");
}

double LinearModel::decision(const FeatureVector& x) const {
  if (x.dim() != weights_.size()) {
    throw Error("feature dimension " + std::to_string(x.dim()) + " does not match model dimension " +
                std::to_string(weights_.size()));
  }
  return x.dot(weights_) + bias_;
}

AnimacyLabel LinearModel::predict(const FeatureVector& x) const {
  return decision(x) >= 0.0 ? AnimacyLabel::Animate : AnimacyLabel::Inanimate;
}

namespace {

class DualSolver {
 public:
  DualSolver(std::span<const LabeledFeature> data, const FitConfig& config)
      : data_(data), config_(config) {
    const std::size_t l = data.size();
    dim_ = data[0].x.dim();
    y_.resize(l);
    upper_.resize(l);
    for (std::size_t i = 0; i < l; ++i) {
      if (data[i].x.dim() != dim_) throw Error("inconsistent feature dimensions in training data");
      y_[i] = data[i].y == AnimacyLabel::Animate ? 1.0 : -1.0;
      upper_[i] = config.c * config.class_weights.of(data[i].y);
      sq_norm_.push_back(data[i].x.squared_norm());
    }
    alpha_.assign(l, 0.0);
    w_.assign(dim_, 0.0);
    score_.assign(l, 0.0);
  }

  LinearModel solve(FitReport* report) {
    const std::size_t l = y_.size();
    Rng rng(config_.seed);
    std::vector<std::size_t> order(l);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> up_rank;
    std::vector<std::size_t> low_rank;

    FitReport local;
    FitReport& rep = report ? *report : local;
    rep = FitReport{};

    int epoch = 0;
    for (; epoch < config_.max_epochs; ++epoch) {
      const Extremes ext = refresh_scores();
      rep.violation.push_back(ext.violation());
      rep.dual_objective.push_back(dual_objective());
      if (ext.violation() < config_.tolerance) {
        // Small KKT violations can still leave the primal visibly above the
        // dual, so also require a small relative duality gap.
        const double gap = primal_value() - rep.dual_objective.back();
        rep.duality_gap = gap;
        if (gap <= config_.tolerance * std::abs(rep.dual_objective.back())) {
          rep.converged = true;
          break;
        }
      }
      pair_step(ext.best_up, ext.best_low);

      up_rank.clear();
      low_rank.clear();
      for (std::size_t i = 0; i < l; ++i) {
        if (in_up(i)) up_rank.push_back(i);
        if (in_low(i)) low_rank.push_back(i);
      }
      std::sort(up_rank.begin(), up_rank.end(), [&](std::size_t a, std::size_t b) {
        return score_[a] > score_[b] || (score_[a] == score_[b] && a < b);
      });
      std::sort(low_rank.begin(), low_rank.end(), [&](std::size_t a, std::size_t b) {
        return score_[a] < score_[b] || (score_[a] == score_[b] && a < b);
      });
      std::size_t up_pos = 0;
      std::size_t low_pos = 0;

      rng.shuffle(std::span<std::size_t>(order));
      for (const std::size_t i : order) {
        const double s_i = exact_score(i);
        std::size_t partner = l;
        double gain = 0.0;
        bool i_is_up = false;
        if (in_up(i)) {
          const std::size_t j = first_eligible(low_rank, low_pos, i, false);
          if (j < l && s_i - score_[j] > gain) {
            partner = j;
            gain = s_i - score_[j];
            i_is_up = true;
          }
        }
        if (in_low(i)) {
          const std::size_t j = first_eligible(up_rank, up_pos, i, true);
          if (j < l && score_[j] - s_i > gain) {
            partner = j;
            i_is_up = false;
          }
        }
        if (partner == l) continue;
        if (i_is_up) {
          pair_step(i, partner);
        } else {
          pair_step(partner, i);
        }
      }
    }

    const Extremes ext = refresh_scores();  // also leaves exact scores for the bias
    if (!rep.converged) {
      rep.violation.push_back(ext.violation());
      rep.dual_objective.push_back(dual_objective());
      rep.duality_gap = primal_value() - rep.dual_objective.back();
    }
    rep.epochs = epoch;
    rep.alpha = alpha_;
    rep.upper_bound = upper_;
    return LinearModel(w_, optimal_bias());
  }

 private:
  struct Extremes {
    double max_up = -std::numeric_limits<double>::infinity();
    double min_low = std::numeric_limits<double>::infinity();
    std::size_t best_up = 0;
    std::size_t best_low = 0;

    double violation() const { return max_up - min_low; }
  };

  bool in_up(std::size_t i) const {
    return y_[i] > 0 ? alpha_[i] < upper_[i] : alpha_[i] > 0.0;
  }
  bool in_low(std::size_t i) const {
    return y_[i] < 0 ? alpha_[i] < upper_[i] : alpha_[i] > 0.0;
  }

  // -y_i * grad_i of the dual, which equals y_i - w.x_i.
  double exact_score(std::size_t i) {
    score_[i] = y_[i] - data_[i].x.dot(w_);
    return score_[i];
  }

  Extremes refresh_scores() {
    Extremes ext;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const double s = exact_score(i);
      if (in_up(i) && s > ext.max_up) {
        ext.max_up = s;
        ext.best_up = i;
      }
      if (in_low(i) && s < ext.min_low) {
        ext.min_low = s;
        ext.best_low = i;
      }
    }
    return ext;
  }

  std::size_t first_eligible(const std::vector<std::size_t>& rank, std::size_t& pos,
                             std::size_t skip, bool up) const {
    const auto eligible = [&](std::size_t j) { return up ? in_up(j) : in_low(j); };
    while (pos < rank.size() && !eligible(rank[pos])) ++pos;
    for (std::size_t p = pos; p < rank.size(); ++p) {
      if (rank[p] != skip && eligible(rank[p])) return rank[p];
    }
    return y_.size();
  }

  // Moves along y_i d_i = t, y_j d_j = -t with i in I_up and j in I_low.
  void pair_step(std::size_t i, std::size_t j) {
    if (i == j) return;
    const double s_i = exact_score(i);
    const double s_j = exact_score(j);
    const double gap = s_i - s_j;
    if (!(gap > 0.0)) return;
    const auto& xi = data_[i].x;
    const auto& xj = data_[j].x;
    const double curvature =
        std::max(sq_norm_[i] + sq_norm_[j] - 2.0 * xi.dot(xj), 1e-12);
    const double room_i = y_[i] > 0 ? upper_[i] - alpha_[i] : alpha_[i];
    const double room_j = y_[j] > 0 ? alpha_[j] : upper_[j] - alpha_[j];
    const double t = std::min({gap / curvature, room_i, room_j});
    if (!(t > 0.0)) return;
    // Land exactly on a bound when the step is clipped by it.
    alpha_[i] = t == room_i ? (y_[i] > 0 ? upper_[i] : 0.0)
                            : std::clamp(alpha_[i] + y_[i] * t, 0.0, upper_[i]);
    alpha_[j] = t == room_j ? (y_[j] > 0 ? 0.0 : upper_[j])
                            : std::clamp(alpha_[j] - y_[j] * t, 0.0, upper_[j]);
    xi.add_to(w_, t);
    xj.add_to(w_, -t);
  }

  double dual_objective() const {
    double sum = 0.0;
    for (const double a : alpha_) sum += a;
    double norm = 0.0;
    for (const double v : w_) norm += v * v;
    return sum - 0.5 * norm;
  }

  // Primal objective at the current w and its best bias; needs exact scores.
  double primal_value() const {
    const double b = optimal_bias();
    double value = 0.0;
    for (const double v : w_) value += v * v;
    value *= 0.5;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      // y_i (w.x_i + b) = 1 - y_i (s_i - b), since y_i^2 = 1.
      value += upper_[i] * std::max(0.0, y_[i] * (score_[i] - b));
    }
    return value;
  }

  // Minimizes the weighted hinge sum over b for the final w. The sum is
  // piecewise linear in b with kinks at the scores y_i - w.x_i; its right
  // slope starts at -sum_{y=+1} C_i and grows by C_i at every kink.
  double optimal_bias() const {
    const std::size_t l = y_.size();
    std::vector<std::size_t> idx(l);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return score_[a] < score_[b] || (score_[a] == score_[b] && a < b);
    });
    double slope = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      total += upper_[i];
      if (y_[i] > 0) slope -= upper_[i];
    }
    const double flat = 1e-12 * total;
    for (std::size_t k = 0; k < l; ++k) {
      slope += upper_[idx[k]];
      if (slope > flat) return score_[idx[k]];
      if (slope >= -flat) {
        // Flat segment: take its midpoint.
        return k + 1 < l ? 0.5 * (score_[idx[k]] + score_[idx[k + 1]]) : score_[idx[k]];
      }
    }
    return score_[idx[l - 1]];
  }

  std::span<const LabeledFeature> data_;
  const FitConfig& config_;
  std::size_t dim_ = 0;
  std::vector<double> y_;
  std::vector<double> upper_;
  std::vector<double> sq_norm_;
  std::vector<double> alpha_;
  std::vector<double> w_;
  std::vector<double> score_;
};

}  // namespace

LinearModel fit(std::span<const LabeledFeature> data, const FitConfig& config, FitReport* report) {
  config.validate();
  if (data.empty()) throw Error("empty training set");
  const bool has_animate = std::any_of(data.begin(), data.end(),
                                       [](const auto& d) { return d.y == AnimacyLabel::Animate; });
  const bool has_inanimate = std::any_of(
      data.begin(), data.end(), [](const auto& d) { return d.y == AnimacyLabel::Inanimate; });
  if (!has_animate || !has_inanimate) throw Error("training data must contain both classes");
  DualSolver solver(data, config);
  return solver.solve(report);
}

std::vector<LabeledFeature> featurize(std::span<const MarkableExample> examples,
                                      const Featurizer& featurizer) {
  std::vector<LabeledFeature> data;
  data.reserve(examples.size());
  for (const auto& ex : examples) data.push_back({featurizer(ex), ex.label});
  return data;
}

std::vector<AnimacyLabel> predict_all(const LinearModel& model,
                                      std::span<const MarkableExample> examples,
                                      const Featurizer& featurizer) {
  std::vector<AnimacyLabel> preds;
  preds.reserve(examples.size());
  for (const auto& ex : examples) preds.push_back(model.predict(featurizer(ex)));
  return preds;
}

std::vector<AnimacyLabel> gold_labels(std::span<const MarkableExample> examples) {
  std::vector<AnimacyLabel> golds;
  golds.reserve(examples.size());
  for (const auto& ex : examples) golds.push_back(ex.label);
  return golds;
}

double primal_objective(const LinearModel& model, std::span<const LabeledFeature> data,
                        const FitConfig& config) {
  double norm = 0.0;
  for (const double v : model.weights()) norm += v * v;
  double loss = 0.0;
  for (const auto& d : data) {
    const double y = d.y == AnimacyLabel::Animate ? 1.0 : -1.0;
    loss += config.class_weights.of(d.y) * std::max(0.0, 1.0 - y * model.decision(d.x));
  }
  return 0.5 * norm + config.c * loss;
}

namespace {

void append_double(std::string& out, double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  out.append(buf, end);
}

double parse_double(const std::string& field, std::size_t line_no) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(x)) {
    throw ParseError(line_no, "non-numeric value '" + field + "'");
  }
  return x;
}

constexpr const char* kLabelMap = "+1 animate -1 inanimate";

}  // namespace

void save_model(std::ostream& out, const LinearModel& model) {
  std::string text = std::to_string(model.dim());
  text.push_back(' ');
  append_double(text, model.bias());
  text.push_back('\n');
  for (std::size_t i = 0; i < model.dim(); ++i) {
    if (i > 0) text.push_back(' ');
    append_double(text, model.weights()[i]);
  }
  text.push_back('\n');
  text += kLabelMap;
  text.push_back('\n');
  out << text;
  if (!out) throw Error("write failed while saving model");
}

LinearModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header 'dim bias'");
  const auto header = tokenize_line(line);
  if (header.size() != 2) throw ParseError(1, "malformed header: expected 'dim bias'");
  std::size_t dim = 0;
  {
    const auto& f = header[0];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), dim);
    if (ec != std::errc{} || ptr != f.data() + f.size()) {
      throw ParseError(1, "malformed header: expected 'dim bias'");
    }
  }
  const double bias = parse_double(header[1], 1);
  if (!std::getline(in, line)) throw ParseError(2, "missing weight line");
  const auto fields = tokenize_line(line);
  if (fields.size() != dim) {
    throw ParseError(2, "expected " + std::to_string(dim) + " weights, found " +
                            std::to_string(fields.size()));
  }
  std::vector<double> weights;
  weights.reserve(dim);
  for (const auto& f : fields) weights.push_back(parse_double(f, 2));
  if (!std::getline(in, line) || tokenize_line(line) != tokenize_line(kLabelMap)) {
    throw ParseError(3, std::string("expected label map '") + kLabelMap + "'");
  }
  return LinearModel(std::move(weights), bias);
}

void save_model(const std::filesystem::path& path, const LinearModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  save_model(out, model);
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return load_model(in);
}

}  // namespace mcembed
