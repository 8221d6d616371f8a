#ifndef CEK_LEARNERS_FOREST_H_
#define CEK_LEARNERS_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cek::learners {

struct ForestParams {
  int num_trees = 500;
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  int mtry = 0;       // features tried per node; 0 = floor(sqrt(d)), at least 1
  std::uint64_t seed = 0;
};

// Internal nodes route x[feature] <= threshold to the left child. Leaves have
// feature == -1 and carry the in-bag positive-class frequency.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int Depth() const;
};

enum class ForestPredictMode { kRegular, kOutOfBag };

struct ForestPrediction {
  std::vector<double> values;  // NaN where missing
  std::vector<bool> missing;   // out-of-bag rows with no excluding tree
  std::size_t missing_count = 0;
};

// Bagged Gini classification trees. in_bag[t][i] counts how many times
// training sample i was drawn for tree t; the out-of-bag set of sample i is the
// trees with a zero count.
class ForestModel {
 public:
  ForestModel(ForestParams params, std::size_t num_train, std::vector<DecisionTree> trees,
              std::vector<std::vector<std::uint16_t>> in_bag);

  const ForestParams& params() const { return params_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t num_train() const { return num_train_; }
  std::uint16_t InBagCount(std::size_t tree, std::size_t sample) const {
    return in_bag_[tree][sample];
  }
  // Trees whose bootstrap excluded `sample`.
  std::vector<std::size_t> OutOfBagTrees(std::size_t sample) const;

  // kRegular averages every tree. kOutOfBag averages only the trees that did
  // not see train_index[r] and requires train_index to map each row of x to a
  // training sample; an index outside the training set throws ParameterError.
  ForestPrediction Predict(const Eigen::MatrixXd& x, ForestPredictMode mode,
                           std::span<const std::size_t> train_index = {}) const;

  std::vector<double> PredictRegular(const Eigen::MatrixXd& x) const;

  nlohmann::json ToJson(bool include_in_bag = false) const;

 private:
  ForestParams params_;
  std::size_t num_train_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<std::uint16_t>> in_bag_;
};

// Each tree is grown on n draws with replacement using a generator seeded from
// (seed, tree index), so the result does not depend on build order. Labels must
// be 0/1.
ForestModel FitForest(const Eigen::MatrixXd& x, std::span<const double> y,
                      const ForestParams& params);

}  // namespace cek::learners

#endif  // CEK_LEARNERS_FOREST_H_
