#include "cek/learners/forest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cek/error.h"

namespace cek::learners {
namespace {

constexpr const char* kModule = "learners";
constexpr double kMinGain = 1e-12;

// Gini cost scaled by node weight: 2 * (pos - pos^2 / total).
double WeightedGini(double pos, double total) {
  return total > 0.0 ? 2.0 * (pos - pos * pos / total) : 0.0;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> y,
              const std::vector<std::uint16_t>& counts, const ForestParams& params,
              int mtry, std::mt19937_64& rng)
      : x_(x), y_(y), params_(params), mtry_(mtry), rng_(rng) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > 0) {
        samples_.push_back(i);
        weight_.push_back(counts[i]);
      }
    }
    features_.resize(static_cast<std::size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree Build() {
    DecisionTree tree;
    struct Pending {
      int node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<std::size_t> order(samples_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, order.size(), 0}};
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      double total = 0.0, pos = 0.0;
      for (std::size_t k = job.begin; k < job.end; ++k) {
        total += weight_[order[k]];
        pos += weight_[order[k]] * y_[samples_[order[k]]];
      }
      tree.nodes[static_cast<std::size_t>(job.node)].value = total > 0 ? pos / total : 0.0;

      const bool depth_capped = params_.max_depth > 0 && job.depth >= params_.max_depth;
      if (depth_capped || pos == 0.0 || pos == total || total < 2.0 * params_.min_leaf) {
        continue;
      }
      const Split split = FindSplit(order, job.begin, job.end, total, pos);
      if (split.feature < 0) continue;

      auto mid_it = std::partition(
          order.begin() + static_cast<std::ptrdiff_t>(job.begin),
          order.begin() + static_cast<std::ptrdiff_t>(job.end), [&](std::size_t k) {
            return x_(static_cast<Eigen::Index>(samples_[k]), split.feature) <= split.threshold;
          });
      const std::size_t mid = static_cast<std::size_t>(mid_it - order.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, job.end, job.depth + 1});
      stack.push_back({left, job.begin, mid, job.depth + 1});
    }
    return tree;
  }

 private:
  Split FindSplit(const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  double total, double pos) {
    const double parent_cost = WeightedGini(pos, total);
    Split best;
    const std::size_t d = features_.size();
    // Visit features in a random order; keep going past mtry only while no
    // valid split has been found.
    for (std::size_t f = 0; f < d; ++f) {
      std::uniform_int_distribution<std::size_t> pick(f, d - 1);
      std::swap(features_[f], features_[pick(rng_)]);
      if (static_cast<int>(f) >= mtry_ && best.feature >= 0) break;
      const int feature = features_[f];

      entries_.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t s = samples_[order[k]];
        entries_.push_back({x_(static_cast<Eigen::Index>(s), feature), weight_[order[k]],
                            y_[s] * weight_[order[k]]});
      }
      std::sort(entries_.begin(), entries_.end(),
                [](const Entry& a, const Entry& b) { return a.value < b.value; });
      double wl = 0.0, pl = 0.0;
      for (std::size_t k = 0; k + 1 < entries_.size(); ++k) {
        wl += entries_[k].weight;
        pl += entries_[k].pos;
        if (entries_[k].value == entries_[k + 1].value) continue;
        const double wr = total - wl;
        if (wl < params_.min_leaf || wr < params_.min_leaf) continue;
        const double gain = parent_cost - WeightedGini(pl, wl) - WeightedGini(pos - pl, wr);
        if (gain > kMinGain && gain > best.gain) {
          double threshold = 0.5 * (entries_[k].value + entries_[k + 1].value);
          if (!(threshold < entries_[k + 1].value)) threshold = entries_[k].value;
          best = {feature, threshold, gain};
        }
      }
    }
    return best;
  }

  struct Entry {
    double value;
    double weight;
    double pos;
  };

  const Eigen::MatrixXd& x_;
  std::span<const double> y_;
  const ForestParams& params_;
  int mtry_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> samples_;
  std::vector<double> weight_;
  std::vector<int> features_;
  std::vector<Entry> entries_;
};

}  // namespace

double DecisionTree::Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    node = static_cast<std::size_t>(x(nodes[node].feature) <= nodes[node].threshold
                                        ? nodes[node].left
                                        : nodes[node].right);
  }
  return nodes[node].value;
}

int DecisionTree::Depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    auto [node, level] = stack.back();
    stack.pop_back();
    depth = std::max(depth, level);
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    if (n.feature >= 0) {
      stack.push_back({n.left, level + 1});
      stack.push_back({n.right, level + 1});
    }
  }
  return depth;
}

ForestModel::ForestModel(ForestParams params, std::size_t num_train,
                         std::vector<DecisionTree> trees,
                         std::vector<std::vector<std::uint16_t>> in_bag)
    : params_(params),
      num_train_(num_train),
      trees_(std::move(trees)),
      in_bag_(std::move(in_bag)) {}

std::vector<std::size_t> ForestModel::OutOfBagTrees(std::size_t sample) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (in_bag_[t][sample] == 0) out.push_back(t);
  }
  return out;
}

ForestPrediction ForestModel::Predict(const Eigen::MatrixXd& x, ForestPredictMode mode,
                                      std::span<const std::size_t> train_index) const {
  const std::size_t rows = static_cast<std::size_t>(x.rows());
  ForestPrediction out;
  out.values.assign(rows, 0.0);
  out.missing.assign(rows, false);
  if (mode == ForestPredictMode::kOutOfBag) {
    if (train_index.size() != rows) {
      throw ParameterError(kModule, "out-of-bag prediction needs one training index per row");
    }
    for (std::size_t idx : train_index) {
      if (idx >= num_train_) {
        throw ParameterError(kModule, "out-of-bag prediction requested for index " +
                                          std::to_string(idx) +
                                          " which is not a training sample");
      }
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = x.row(static_cast<Eigen::Index>(r));
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      if (mode == ForestPredictMode::kOutOfBag && in_bag_[t][train_index[r]] != 0) continue;
      sum += trees_[t].Predict(row);
      ++used;
    }
    if (used == 0) {
      out.values[r] = std::numeric_limits<double>::quiet_NaN();
      out.missing[r] = true;
      ++out.missing_count;
    } else {
      out.values[r] = sum / static_cast<double>(used);
    }
  }
  return out;
}

std::vector<double> ForestModel::PredictRegular(const Eigen::MatrixXd& x) const {
  return Predict(x, ForestPredictMode::kRegular).values;
}

nlohmann::json ForestModel::ToJson(bool include_in_bag) const {
  nlohmann::json j;
  j["type"] = "forest";
  j["num_trees"] = params_.num_trees;
  j["max_depth"] = params_.max_depth;
  j["min_leaf"] = params_.min_leaf;
  j["mtry"] = params_.mtry;
  j["seed"] = params_.seed;
  j["num_train"] = num_train_;
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    nlohmann::json tree;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const TreeNode& n : trees_[t].nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    tree["feature"] = feature;
    tree["threshold"] = threshold;
    tree["left"] = left;
    tree["right"] = right;
    tree["value"] = value;
    if (include_in_bag) tree["in_bag"] = in_bag_[t];
    trees.push_back(std::move(tree));
  }
  j["trees"] = std::move(trees);
  return j;
}

ForestModel FitForest(const Eigen::MatrixXd& x, std::span<const double> y,
                      const ForestParams& params) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw ParameterError(kModule, "fit_forest needs at least 2 samples");
  if (y.size() != n) throw ParameterError(kModule, "fit_forest: label length mismatch");
  if (params.num_trees < 1) throw ParameterError(kModule, "fit_forest needs at least 1 tree");
  if (params.min_leaf < 1) throw ParameterError(kModule, "fit_forest: min_leaf must be >= 1");
  if (x.cols() < 1) throw ParameterError(kModule, "fit_forest needs at least one feature");
  if (!x.allFinite()) throw ParameterError(kModule, "fit_forest: non-finite feature value");
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw ParameterError(kModule, "fit_forest: labels must be 0 or 1");
  }
  int mtry = params.mtry;
  if (mtry <= 0) {
    mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
  }
  mtry = std::min<int>(mtry, static_cast<int>(x.cols()));

  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::uint16_t>> in_bag;
  trees.reserve(static_cast<std::size_t>(params.num_trees));
  in_bag.reserve(static_cast<std::size_t>(params.num_trees));
  for (int t = 0; t < params.num_trees; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::vector<std::uint16_t> counts(n, 0);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t& c = counts[draw(rng)];
      if (c < std::numeric_limits<std::uint16_t>::max()) ++c;
    }
    TreeBuilder builder(x, y, counts, params, mtry, rng);
    trees.push_back(builder.Build());
    in_bag.push_back(std::move(counts));
  }
  return ForestModel(params, n, std::move(trees), std::move(in_bag));
}

}  // namespace cek::learners
