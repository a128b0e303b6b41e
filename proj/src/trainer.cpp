#include "ensconv/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ensconv/parallel.hpp"

namespace ensconv {

void Dataset::validate() const {
  if (rows() < 1) throw DomainError("dataset has no rows");
  if (labels.size() != rows())
    throw DimensionError("dataset has " + std::to_string(rows()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
  if (classes < 2) throw DomainError("dataset needs at least 2 classes");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= classes)
      throw DomainError("label " + std::to_string(labels[i]) + " in row " +
                        std::to_string(i) + " is outside [0, " + std::to_string(classes) + ")");
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows_to_keep) const {
  Dataset out;
  out.classes = classes;
  out.features.resize(static_cast<Eigen::Index>(rows_to_keep.size()), dims());
  out.labels.resize(static_cast<Eigen::Index>(rows_to_keep.size()));
  for (std::size_t i = 0; i < rows_to_keep.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows_to_keep[i]);
    out.labels[static_cast<Eigen::Index>(i)] = labels[rows_to_keep[i]];
  }
  return out;
}

int TreeParams::resolved_mtry(Eigen::Index dims) const {
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
  if (mtry < 0) throw ConfigError("mtry must be nonnegative");
  if (mtry > dims)
    throw ConfigError("mtry " + std::to_string(mtry) + " exceeds the feature count " +
                      std::to_string(dims));
  if (mtry > 0) return mtry;
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dims))));
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng) {
  if (n < 1) throw DomainError("bootstrap sample needs n >= 1");
  BootstrapSample out;
  out.indices.resize(n);
  out.oob.assign(n, true);
  for (auto& idx : out.indices) {
    idx = static_cast<std::uint32_t>(uniform_index(rng, n));
    out.oob[idx] = false;
  }
  return out;
}

namespace {

using FeatureOrder = std::vector<std::vector<std::uint32_t>>;

// Every row sorted by each feature (ties by row index).
FeatureOrder presort(const Dataset& data) {
  FeatureOrder order(static_cast<std::size_t>(data.dims()));
  for (Eigen::Index f = 0; f < data.dims(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(data.rows()));
    std::iota(o.begin(), o.end(), 0u);
    const auto col = data.features.col(f);
    std::stable_sort(o.begin(), o.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col(a) < col(b); });
  }
  return order;
}

// Grows one tree. Each node owns the range [begin, end) of every per-feature
// order array; all arrays hold the same in-bag rows, sorted by their feature.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const std::uint32_t> indices,
              const TreeParams& params, Rng& rng, const FeatureOrder& sorted)
      : data_(data), params_(params), mtry_(params.resolved_mtry(data.dims())), rng_(rng),
        k_(data.classes), weight_(static_cast<std::size_t>(data.rows()), 0),
        goes_left_(static_cast<std::size_t>(data.rows()), 0) {
    for (std::uint32_t i : indices) {
      if (i >= weight_.size()) throw DomainError("bag index outside the dataset");
      ++weight_[i];
    }
    order_.resize(sorted.size());
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      order_[f].reserve(indices.size());
      for (std::uint32_t row : sorted[f])
        if (weight_[row] > 0) order_[f].push_back(row);
    }
    scratch_.resize(order_.empty() ? 0 : order_[0].size());
    features_.resize(static_cast<std::size_t>(data.dims()));
    std::iota(features_.begin(), features_.end(), 0);
    node_counts_.resize(static_cast<std::size_t>(k_));
    left_counts_.resize(static_cast<std::size_t>(k_));
  }

  DecisionTree build() {
    grow(0, order_[0].size(), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0;
    double score = 0;
  };

  int grow(std::size_t begin, std::size_t end, int depth) {
    std::fill(node_counts_.begin(), node_counts_.end(), 0.0);
    for (std::size_t pos = begin; pos < end; ++pos) {
      const std::uint32_t row = order_[0][pos];
      node_counts_[static_cast<std::size_t>(data_.labels[row])] += weight_[row];
    }
    const double total = std::accumulate(node_counts_.begin(), node_counts_.end(), 0.0);
    const auto majority = static_cast<Label>(
        std::max_element(node_counts_.begin(), node_counts_.end()) - node_counts_.begin());
    const bool pure = node_counts_[static_cast<std::size_t>(majority)] == total;

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0, -1, -1, majority});
    if (pure || depth >= params_.max_depth || total < 2.0 * params_.min_leaf) return index;

    double parent_score = 0;
    for (double c : node_counts_) parent_score += c * c;
    parent_score /= total;

    const Split split = best_split(begin, end, total);
    if (split.feature < 0 || !(split.score > parent_score + 1e-12 * total)) return index;

    const auto f = static_cast<std::size_t>(split.feature);
    const auto col = data_.features.col(split.feature);
    std::size_t n_left = 0;
    for (std::size_t pos = begin; pos < end; ++pos) {
      const std::uint32_t row = order_[f][pos];
      goes_left_[row] = col(row) <= split.threshold;
      n_left += goes_left_[row];
    }
    for (auto& o : order_) stable_partition(o, begin, end);
    const std::size_t mid = begin + n_left;

    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(index)] =
        TreeNode{split.feature, split.threshold, left, right, majority};
    return index;
  }

  void stable_partition(std::vector<std::uint32_t>& o, std::size_t begin, std::size_t end) {
    std::size_t left = begin;
    std::size_t right = 0;
    for (std::size_t pos = begin; pos < end; ++pos) {
      const std::uint32_t row = o[pos];
      if (goes_left_[row])
        o[left++] = row;
      else
        scratch_[right++] = row;
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(right),
              o.begin() + static_cast<std::ptrdiff_t>(left));
  }

  Split best_split(std::size_t begin, std::size_t end, double total) {
    // Partial Fisher-Yates: the first mtry entries become the candidate set.
    const std::size_t p = features_.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(mtry_); ++i) {
      const std::size_t j = i + uniform_index(rng_, p - i);
      std::swap(features_[i], features_[j]);
    }
    std::vector<int> candidates(features_.begin(), features_.begin() + mtry_);
    std::sort(candidates.begin(), candidates.end());

    Split best;
    const double min_leaf = params_.min_leaf;
    for (int feature : candidates) {
      const auto& o = order_[static_cast<std::size_t>(feature)];
      const auto col = data_.features.col(feature);
      std::fill(left_counts_.begin(), left_counts_.end(), 0.0);
      double left_total = 0;
      for (std::size_t pos = begin; pos + 1 < end; ++pos) {
        const std::uint32_t row = o[pos];
        left_counts_[static_cast<std::size_t>(data_.labels[row])] += weight_[row];
        left_total += weight_[row];
        const double value = col(row);
        const double next = col(o[pos + 1]);
        if (!(value < next)) continue;
        const double right_total = total - left_total;
        if (left_total < min_leaf || right_total < min_leaf) continue;
        double left_sq = 0;
        double right_sq = 0;
        for (std::size_t c = 0; c < left_counts_.size(); ++c) {
          const double r = node_counts_[c] - left_counts_[c];
          left_sq += left_counts_[c] * left_counts_[c];
          right_sq += r * r;
        }
        const double score = left_sq / left_total + right_sq / right_total;
        if (best.feature < 0 || score > best.score) {
          double threshold = value + (next - value) / 2;
          if (!(threshold < next)) threshold = value;
          best = Split{feature, threshold, score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& params_;
  int mtry_;
  Rng& rng_;
  int k_;
  std::vector<int> weight_;
  std::vector<char> goes_left_;
  FeatureOrder order_;
  std::vector<std::uint32_t> scratch_;
  std::vector<int> features_;
  std::vector<double> node_counts_;
  std::vector<double> left_counts_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree train_tree(const Dataset& data, std::span<const std::uint32_t> indices,
                        const TreeParams& params, Rng& rng) {
  data.validate();
  if (indices.empty()) throw DomainError("cannot train a tree on an empty bag");
  return TreeBuilder(data, indices, params, rng, presort(data)).build();
}

TrainedEnsemble train_ensemble(const Dataset& data, std::size_t t, const TreeParams& params,
                               std::uint64_t seed) {
  data.validate();
  if (t < 1) throw DomainError("ensemble needs at least one tree");
  params.resolved_mtry(data.dims());
  const auto n = static_cast<std::size_t>(data.rows());
  const FeatureOrder sorted = presort(data);

  TrainedEnsemble out;
  out.ensemble.trees.resize(t);
  out.ensemble.bags.resize(t);
  out.ensemble.classes = data.classes;
  out.ensemble.dims = data.dims();
  out.oob.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
  parallel_for(t, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    BootstrapSample bag = bootstrap_sample(n, rng);
    out.ensemble.trees[i] = TreeBuilder(data, bag.indices, params, rng, sorted).build();
    for (std::size_t j = 0; j < n; ++j)
      out.oob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bag.oob[j];
    out.ensemble.bags[i] = std::move(bag.indices);
  });
  return out;
}

PredictionArray predict_array(const Ensemble& ensemble, const Eigen::MatrixXd& points) {
  if (ensemble.trees.empty()) throw DomainError("ensemble has no trees");
  if (points.cols() != ensemble.dims)
    throw DimensionError("points have " + std::to_string(points.cols()) +
                         " features but the ensemble was trained on " +
                         std::to_string(ensemble.dims));
  if (points.rows() < 1) throw DimensionError("no points to predict");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = points;
  LabelMatrix cells(static_cast<Eigen::Index>(ensemble.size()), points.rows());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    const DecisionTree& tree = ensemble.trees[i];
    for (Eigen::Index j = 0; j < rows.rows(); ++j)
      cells(static_cast<Eigen::Index>(i), j) = tree.predict(rows.row(j));
  });
  return PredictionArray(std::move(cells), ensemble.classes);
}

std::uint64_t bag_hash(std::span<const std::uint32_t> bag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t v : bag)
    for (int byte = 0; byte < 4; ++byte) {
      h ^= (v >> (8 * byte)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  return h;
}

}  // namespace ensconv
