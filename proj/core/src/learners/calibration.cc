#include "cek/learners/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cek/error.h"
#include "cek/log.h"

namespace cek::learners {
namespace {

constexpr const char* kModule = "learners";

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Logit(double s) {
  s = std::clamp(s, kProbabilityFloor, 1.0 - kProbabilityFloor);
  return std::log(s) - std::log1p(-s);
}

Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

// Platt objective for fixed targets.
struct SigmoidProblem {
  std::vector<double> f;  // logit scores
  std::vector<double> t;  // smoothed targets

  double Loss(double a, double b) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = a * f[i] + b;
      loss += t[i] * Softplus(z) + (1.0 - t[i]) * Softplus(-z);
    }
    return loss;
  }
};

// Minimizes over (a, b), or over b alone when `fix_slope` is set.
std::pair<double, double> MinimizeSigmoid(const SigmoidProblem& p, double a, double b,
                                          bool fix_slope) {
  double loss = p.Loss(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < p.f.size(); ++i) {
      const double z = a * p.f[i] + b;
      const double q = 1.0 / (1.0 + std::exp(z));
      const double r = p.t[i] - q;
      const double s = q * (1.0 - q);
      ga += r * p.f[i];
      gb += r;
      haa += s * p.f[i] * p.f[i];
      hab += s * p.f[i];
      hbb += s;
    }
    double da = 0.0, db = 0.0;
    if (fix_slope) {
      if (std::abs(gb) < 1e-12 * static_cast<double>(p.f.size())) break;
      db = -gb / (hbb + 1e-12);
    } else {
      if (std::max(std::abs(ga), std::abs(gb)) < 1e-12 * static_cast<double>(p.f.size())) break;
      haa += 1e-12;
      hbb += 1e-12;
      const double det = haa * hbb - hab * hab;
      da = -(hbb * ga - hab * gb) / det;
      db = -(-hab * ga + haa * gb) / det;
    }
    double step = 1.0;
    bool improved = false;
    while (step >= 1e-10) {
      const double na = a + step * da, nb = b + step * db;
      const double nl = p.Loss(na, nb);
      if (nl < loss + 1e-4 * step * (ga * da + gb * db)) {
        a = na;
        b = nb;
        loss = nl;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {a, b};
}

}  // namespace

const char* ToString(CalibrationMethod method) {
  switch (method) {
    case CalibrationMethod::kNone:
      return "none";
    case CalibrationMethod::kIsotonic:
      return "isotonic";
    case CalibrationMethod::kSigmoid:
      return "sigmoid";
  }
  return "none";
}

CalibrationMethod ParseCalibrationMethod(const std::string& name) {
  if (name == "none") return CalibrationMethod::kNone;
  if (name == "isotonic") return CalibrationMethod::kIsotonic;
  if (name == "sigmoid") return CalibrationMethod::kSigmoid;
  throw ParameterError(kModule, "unknown calibration method \"" + name + "\"");
}

CalibrationMap CalibrationMap::Isotonic(std::vector<double> breakpoints,
                                        std::vector<double> levels) {
  CalibrationMap map;
  map.method_ = CalibrationMethod::kIsotonic;
  map.breakpoints_ = std::move(breakpoints);
  map.levels_ = std::move(levels);
  if (!map.levels_.empty() &&
      std::all_of(map.levels_.begin(), map.levels_.end(),
                  [&](double v) { return v == map.levels_.front(); })) {
    map.constant_ = true;
    map.constant_value_ = map.levels_.front();
  }
  return map;
}

CalibrationMap CalibrationMap::Sigmoid(double slope, double offset) {
  CalibrationMap map;
  map.method_ = CalibrationMethod::kSigmoid;
  map.slope_ = slope;
  map.offset_ = offset;
  if (slope == 0.0) {
    map.constant_ = true;
    map.constant_value_ = 1.0 / (1.0 + std::exp(offset));
  }
  return map;
}

CalibrationMap CalibrationMap::Constant(CalibrationMethod method, double value) {
  CalibrationMap map;
  map.method_ = method;
  map.constant_ = true;
  map.constant_value_ = value;
  if (method == CalibrationMethod::kIsotonic) {
    map.breakpoints_ = {0.0};
    map.levels_ = {value};
  } else if (method == CalibrationMethod::kSigmoid) {
    map.slope_ = 0.0;
    const double v = std::clamp(value, kProbabilityFloor, 1.0 - kProbabilityFloor);
    map.offset_ = std::log1p(-v) - std::log(v);
  }
  return map;
}

double CalibrationMap::Apply(double score) const {
  if (constant_) return constant_value_;
  switch (method_) {
    case CalibrationMethod::kNone:
      return score;
    case CalibrationMethod::kSigmoid:
      return 1.0 / (1.0 + std::exp(slope_ * Logit(score) + offset_));
    case CalibrationMethod::kIsotonic: {
      if (score <= breakpoints_.front()) return levels_.front();
      if (score >= breakpoints_.back()) return levels_.back();
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), score);
      const std::size_t hi = static_cast<std::size_t>(it - breakpoints_.begin());
      const std::size_t lo = hi - 1;
      const double span = breakpoints_[hi] - breakpoints_[lo];
      const double frac = (score - breakpoints_[lo]) / span;
      return levels_[lo] + frac * (levels_[hi] - levels_[lo]);
    }
  }
  return score;
}

std::vector<double> CalibrationMap::Apply(std::span<const double> scores) const {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = Apply(scores[i]);
  return out;
}

nlohmann::json CalibrationMap::ToJson() const {
  nlohmann::json j;
  j["method"] = ToString(method_);
  j["constant"] = constant_;
  if (constant_) j["value"] = constant_value_;
  if (method_ == CalibrationMethod::kIsotonic) {
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      pairs.push_back({breakpoints_[i], levels_[i]});
    }
    j["breakpoints_levels"] = std::move(pairs);
  } else if (method_ == CalibrationMethod::kSigmoid) {
    j["slope"] = slope_;
    j["offset"] = offset_;
    j["form"] = "1/(1+exp(slope*logit(s)+offset)), slope<=0";
  }
  if (!warning_.empty()) j["warning"] = warning_;
  return j;
}

CalibrationMap FitIsotonic(std::span<const double> scores, std::span<const double> labels,
                           std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (n < 2) throw ParameterError(kModule, "fit_isotonic needs at least 2 samples");
  if (labels.size() != n || (!weights.empty() && weights.size() != n)) {
    throw ParameterError(kModule, "fit_isotonic: length mismatch");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ParameterError(kModule, "fit_isotonic: non-finite score");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Blocks of the PAV stack: weighted label sum and weight, first tie group.
  struct Block {
    double sum;
    double weight;
    std::size_t first_group;
  };
  std::vector<double> group_score;
  std::vector<double> group_sum;
  std::vector<double> group_weight;
  for (std::size_t idx : order) {
    const double w = weights.empty() ? 1.0 : weights[idx];
    if (group_score.empty() || scores[idx] != group_score.back()) {
      group_score.push_back(scores[idx]);
      group_sum.push_back(0.0);
      group_weight.push_back(0.0);
    }
    group_sum.back() += w * labels[idx];
    group_weight.back() += w;
  }

  std::vector<Block> stack;
  for (std::size_t g = 0; g < group_score.size(); ++g) {
    if (group_weight[g] <= 0.0) continue;
    stack.push_back({group_sum[g], group_weight[g], g});
    while (stack.size() > 1) {
      const Block& top = stack.back();
      const Block& below = stack[stack.size() - 2];
      if (below.sum / below.weight <= top.sum / top.weight) break;
      Block merged{below.sum + top.sum, below.weight + top.weight, below.first_group};
      stack.pop_back();
      stack.back() = merged;
    }
  }
  if (stack.empty()) throw ParameterError(kModule, "fit_isotonic: all weights are zero");

  std::vector<double> levels(group_score.size());
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const std::size_t end = b + 1 < stack.size() ? stack[b + 1].first_group : group_score.size();
    for (std::size_t g = stack[b].first_group; g < end; ++g) {
      levels[g] = stack[b].sum / stack[b].weight;
    }
  }
  // Zero-weight groups ahead of the first block take the first level.
  for (std::size_t g = 0; g < stack.front().first_group; ++g) levels[g] = levels[stack.front().first_group];
  return CalibrationMap::Isotonic(std::move(group_score), std::move(levels));
}

CalibrationMap FitSigmoidCalibration(std::span<const double> scores,
                                     std::span<const double> labels) {
  const std::size_t n = scores.size();
  if (n == 0 || labels.size() != n) {
    throw ParameterError(kModule, "fit_sigmoid_calibration: empty or mismatched input");
  }
  double n_pos = 0.0;
  for (double y : labels) n_pos += y;
  const double n_neg = static_cast<double>(n) - n_pos;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);

  if (n_pos == 0.0 || n_neg == 0.0) {
    CalibrationMap map = CalibrationMap::Constant(CalibrationMethod::kSigmoid,
                                                  n_pos == 0.0 ? t_neg : t_pos);
    map.set_warning("labels are constant; using a constant map");
    LogWarning(kModule, "sigmoid calibration: labels are constant; using a constant map");
    return map;
  }

  SigmoidProblem problem;
  problem.f.resize(n);
  problem.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) {
      throw ParameterError(kModule, "fit_sigmoid_calibration: non-finite score");
    }
    problem.f[i] = Logit(scores[i]);
    problem.t[i] = labels[i] > 0.5 ? t_pos : t_neg;
  }
  auto [a, b] = MinimizeSigmoid(problem, 0.0, std::log((n_neg + 1.0) / (n_pos + 1.0)), false);
  if (a > 0.0) {
    // A decreasing fit is not a calibration; fall back to the best constant.
    auto [a0, b0] = MinimizeSigmoid(problem, 0.0, b, true);
    (void)a0;
    return CalibrationMap::Sigmoid(0.0, b0);
  }
  return CalibrationMap::Sigmoid(a, b);
}

CalibrationMap FitCalibration(CalibrationMethod method, std::span<const double> scores,
                              std::span<const double> labels) {
  switch (method) {
    case CalibrationMethod::kIsotonic:
      return FitIsotonic(scores, labels);
    case CalibrationMethod::kSigmoid:
      return FitSigmoidCalibration(scores, labels);
    case CalibrationMethod::kNone:
      break;
  }
  return CalibrationMap();
}

Eigen::VectorXd CalibratedLinearModel::PredictProba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd p = base.PredictProba(x);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = map.Apply(p(i));
  return p;
}

nlohmann::json CalibratedLinearModel::ToJson() const {
  nlohmann::json j;
  j["base"] = base.ToJson();
  j["calibration"] = map.ToJson();
  return j;
}

CalibratedLinearModel CalibrateCv(const LinearFitFn& base_fit, CalibrationMethod method,
                                  const Eigen::MatrixXd& x, std::span<const double> y,
                                  const FoldPlan& folds) {
  if (folds.size() != static_cast<std::size_t>(x.rows()) || y.size() != folds.size()) {
    throw ParameterError(kModule, "calibrate_cv: fold plan does not match data");
  }
  CalibratedLinearModel out;
  out.out_of_fold_scores.assign(y.size(), std::nan(""));
  if (method != CalibrationMethod::kNone) {
    for (int f = 0; f < folds.k; ++f) {
      const std::vector<std::size_t> train = folds.TrainRows(f);
      const std::vector<std::size_t> valid = folds.ValidationRows(f);
      std::vector<double> y_train(train.size());
      for (std::size_t r = 0; r < train.size(); ++r) y_train[r] = y[train[r]];
      const LinearModel fold_model = base_fit(SelectRows(x, train), y_train);
      const Eigen::VectorXd scores = fold_model.PredictProba(SelectRows(x, valid));
      for (std::size_t r = 0; r < valid.size(); ++r) {
        out.out_of_fold_scores[valid[r]] = scores(static_cast<Eigen::Index>(r));
      }
    }
    out.map = FitCalibration(method, out.out_of_fold_scores, y);
  }
  out.base = base_fit(x, y);
  return out;
}

}  // namespace cek::learners
