#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ensconv/random.hpp"
#include "ensconv/types.hpp"

namespace ensconv {

struct Dataset {
  Eigen::MatrixXd features;  // n x p
  LabelVector labels;        // n
  int classes = 2;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index dims() const noexcept { return features.cols(); }

  /// Throws unless n >= 1, labels align with rows and lie in [0, classes).
  void validate() const;

  /// Rows at the given positions, in order.
  Dataset subset(std::span<const Eigen::Index> rows) const;
};

struct TreeParams {
  int max_depth = 16;
  int min_leaf = 1;
  /// Features drawn per split; 0 means ceil(sqrt(p)).
  int mtry = 0;

  int resolved_mtry(Eigen::Index dims) const;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  Label label = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Axis-aligned binary tree; x[feature] <= threshold goes left.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  template <class Derived>
  Label predict(const Eigen::DenseBase<Derived>& x) const {
    int node = 0;
    while (!nodes_[node].is_leaf())
      node = x(nodes_[node].feature) <= nodes_[node].threshold ? nodes_[node].left
                                                               : nodes_[node].right;
    return nodes_[node].label;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct BootstrapSample {
  std::vector<std::uint32_t> indices;  // n draws with replacement
  std::vector<bool> oob;               // oob[j] iff j was never drawn
};

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng);

/// Greedy Gini CART on the multiset of rows `indices`. Each split considers
/// mtry features drawn without replacement; thresholds are midpoints between
/// consecutive distinct values. Equal impurity is resolved towards the lowest
/// feature index, then the lowest threshold. A node is split only when impurity
/// strictly decreases. Leaves predict the majority label of their bag rows
/// (lowest label on ties).
DecisionTree train_tree(const Dataset& data, std::span<const std::uint32_t> indices,
                        const TreeParams& params, Rng& rng);

struct Ensemble {
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::uint32_t>> bags;
  int classes = 2;
  Eigen::Index dims = 0;

  std::size_t size() const noexcept { return trees.size(); }
};

struct TrainedEnsemble {
  Ensemble ensemble;
  OobMask oob;  // t x n
};

/// t trees on independent bootstrap bags. Tree i uses substream (seed, i) for
/// both its bag and its feature draws, so results ignore the worker count.
TrainedEnsemble train_ensemble(const Dataset& data, std::size_t t, const TreeParams& params,
                               std::uint64_t seed);

/// Row i holds tree i's labels on the m rows of `points`.
PredictionArray predict_array(const Ensemble& ensemble, const Eigen::MatrixXd& points);

/// FNV-1a hash of a bag, used in ensemble metadata.
std::uint64_t bag_hash(std::span<const std::uint32_t> bag);

/// Two Gaussian classes N(0, Sigma) and N(mu_1, Sigma) in R^p. mu_1 has 10
/// coordinates (sampled without replacement) equal to 0.05; Sigma = U diag(1/j^2) U^T
/// with U Haar-distributed.
class SyntheticContinuous {
 public:
  SyntheticContinuous(int dims, std::uint64_t seed);

  const Eigen::VectorXd& mean(Label l) const { return l == 0 ? mean0_ : mean1_; }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  Eigen::MatrixXd covariance() const;

  /// n_per_class rows of class 0 followed by n_per_class rows of class 1.
  Dataset sample(std::size_t n_per_class, Rng& rng) const;

 private:
  Eigen::VectorXd mean0_;
  Eigen::VectorXd mean1_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd scales_;  // 1/j
};

/// Two multinomial classes of 100 balls in 100 cells: p_0 uniform and
/// p_1 = |p_0 + z/300| / ||p_0 + z/300||_1 with z standard normal.
class SyntheticDiscrete {
 public:
  static constexpr int kCells = 100;
  static constexpr int kBalls = 100;

  explicit SyntheticDiscrete(std::uint64_t seed);

  const Eigen::VectorXd& cell_probabilities(Label l) const { return l == 0 ? p0_ : p1_; }
  Dataset sample(std::size_t n_per_class, Rng& rng) const;

 private:
  Eigen::VectorXd p0_;
  Eigen::VectorXd p1_;
};

/// Distribution from substream (seed, 0), rows from substream (seed, 1).
Dataset gen_synthetic_continuous(std::size_t n_per_class, int dims, std::uint64_t seed);
Dataset gen_synthetic_discrete(std::size_t n_per_class, std::uint64_t seed);

}  // namespace ensconv
