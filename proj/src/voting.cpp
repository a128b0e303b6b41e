#include "ensconv/voting.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace ensconv {

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::holdout ? "holdout" : "oob";
}

Mode parse_mode(std::string_view text) {
  if (text == "holdout") return Mode::holdout;
  if (text == "oob") return Mode::oob;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected holdout or oob)");
}

PredictionArray::PredictionArray(LabelMatrix cells, int num_classes)
    : cells_(std::move(cells)), k_(num_classes) {
  if (k_ < 2) throw DomainError("class count must be at least 2");
  if (cells_.rows() < 1 || cells_.cols() < 1)
    throw DimensionError("prediction array must have at least one row and one column");
  for (Eigen::Index j = 0; j < cells_.cols(); ++j)
    for (Eigen::Index i = 0; i < cells_.rows(); ++i)
      if (cells_(i, j) < 0 || cells_(i, j) >= k_)
        throw DomainError("label " + std::to_string(cells_(i, j)) + " at (" +
                          std::to_string(i) + ", " + std::to_string(j) +
                          ") is outside [0, " + std::to_string(k_) + ")");
}

PredictionArray PredictionArray::top_rows(Eigen::Index rows) const {
  if (rows < 1 || rows > trees())
    throw DimensionError("cannot take " + std::to_string(rows) + " of " +
                         std::to_string(trees()) + " rows");
  return PredictionArray(cells_.topRows(rows), k_);
}

void check_shapes(const PredictionArray& array, const TruthLabels& truth, const OobMask* mask) {
  if (truth.size() != array.points())
    throw DimensionError("truth has " + std::to_string(truth.size()) +
                         " labels but the array has " + std::to_string(array.points()) +
                         " columns");
  if (mask && (mask->rows() != array.trees() || mask->cols() != array.points()))
    throw DimensionError("mask is " + std::to_string(mask->rows()) + "x" +
                         std::to_string(mask->cols()) + " but the array is " +
                         std::to_string(array.trees()) + "x" + std::to_string(array.points()));
  for (Eigen::Index j = 0; j < truth.size(); ++j)
    if (truth[j] < 0 || truth[j] >= array.classes())
      throw DomainError("truth label " + std::to_string(truth[j]) + " at position " +
                        std::to_string(j) + " is outside [0, " +
                        std::to_string(array.classes()) + ")");
}

Label vote_from_counts(std::span<const std::int64_t> counts) {
  const auto k = static_cast<Label>(counts.size());
  Label best = tie_label(k);
  std::int64_t best_count = 0;
  bool shared = false;
  for (Label l = 0; l < k; ++l) {
    if (counts[l] > best_count) {
      best = l;
      best_count = counts[l];
      shared = false;
    } else if (counts[l] == best_count && best_count > 0) {
      shared = true;
    }
  }
  return shared ? tie_label(k) : best;
}

Label plurality_vote(std::span<const Label> column, int num_classes) {
  std::vector<std::int64_t> counts(num_classes, 0);
  for (Label v : column) {
    if (v < 0 || v >= num_classes) throw DomainError("label outside [0, k) in vote");
    ++counts[v];
  }
  return vote_from_counts(counts);
}

Label oob_vote(std::span<const Label> column, std::span<const bool> oob, int num_classes) {
  if (column.size() != oob.size())
    throw DimensionError("column and mask column lengths differ");
  std::vector<std::int64_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!oob[i]) continue;
    if (column[i] < 0 || column[i] >= num_classes)
      throw DomainError("label outside [0, k) in vote");
    ++counts[column[i]];
  }
  return vote_from_counts(counts);
}

double ErrorTally::rate() const {
  return static_cast<double>(wrong) / static_cast<double>(total);
}

ErrorTally tally_errors(const PredictionArray& array, const TruthLabels& truth,
                        const OobMask* mask, std::optional<Label> target,
                        std::span<const int> row_weights) {
  check_shapes(array, truth, mask);
  const Eigen::Index t = array.trees();
  if (!row_weights.empty() && static_cast<Eigen::Index>(row_weights.size()) != t)
    throw DimensionError("row weight vector does not match the ensemble size");

  const int k = array.classes();
  const LabelMatrix& cells = array.cells();
  std::vector<std::int64_t> counts(k);
  ErrorTally tally;
  for (Eigen::Index j = 0; j < array.points(); ++j) {
    if (target && truth[j] != *target) continue;
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < t; ++i) {
      const int w = row_weights.empty() ? 1 : row_weights[i];
      if (w == 0 || (mask && !(*mask)(i, j))) continue;
      counts[cells(i, j)] += w;
    }
    ++tally.total;
    if (vote_from_counts(counts) != truth[j]) ++tally.wrong;
  }
  if (target && tally.total == 0)
    throw EmptyClassError("no evaluation point has truth label " + std::to_string(*target));
  return tally;
}

double error_rate_holdout(const PredictionArray& array, const TruthLabels& truth) {
  return tally_errors(array, truth, nullptr, std::nullopt).rate();
}

double error_rate_oob(const PredictionArray& array, const TruthLabels& truth,
                      const OobMask& mask) {
  return tally_errors(array, truth, &mask, std::nullopt).rate();
}

double classwise_error_rate(const PredictionArray& array, const TruthLabels& truth,
                            Label target, const OobMask* mask) {
  if (target < 0 || target >= array.classes())
    throw DomainError("target class " + std::to_string(target) + " is outside [0, k)");
  return tally_errors(array, truth, mask, target).rate();
}

Eigen::VectorXd prefix_error_curve(const PredictionArray& array, const TruthLabels& truth,
                                   const OobMask* mask) {
  check_shapes(array, truth, mask);
  const Eigen::Index t = array.trees();
  const Eigen::Index m = array.points();
  const int k = array.classes();
  // counts(l, j): votes for label l in column j among the rows seen so far.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, m);
  Eigen::VectorXd curve(t);
  for (Eigen::Index s = 0; s < t; ++s) {
    Eigen::Index wrong = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!mask || (*mask)(s, j)) ++counts(array(s, j), j);
      const std::span<const std::int64_t> col(&counts(0, j), static_cast<std::size_t>(k));
      if (vote_from_counts(col) != truth[j]) ++wrong;
    }
    curve[s] = static_cast<double>(wrong) / static_cast<double>(m);
  }
  return curve;
}

}  // namespace ensconv
