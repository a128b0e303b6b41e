#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "ensconv/error.hpp"

namespace ensconv {

/// Dense class label in {0, ..., k-1}. The value k itself is reserved for a tie.
using Label = std::int32_t;

using LabelMatrix = Eigen::Matrix<Label, Eigen::Dynamic, Eigen::Dynamic>;
using LabelVector = Eigen::Matrix<Label, Eigen::Dynamic, 1>;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Truth labels aligned with the columns of a PredictionArray.
using TruthLabels = LabelVector;

/// oob(i, j) is true when evaluation point j is out-of-bag for classifier i.
using OobMask = BoolMatrix;

enum class Mode { holdout, oob };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

/// Sentinel returned by a vote whose maximum is shared (or empty).
constexpr Label tie_label(int num_classes) noexcept { return num_classes; }
constexpr bool is_tie(Label outcome, int num_classes) noexcept {
  return outcome == tie_label(num_classes);
}

/// t x m array of predicted labels: one row per classifier, one column per
/// evaluation point. Immutable after construction.
class PredictionArray {
 public:
  PredictionArray(LabelMatrix cells, int num_classes);

  Eigen::Index trees() const noexcept { return cells_.rows(); }
  Eigen::Index points() const noexcept { return cells_.cols(); }
  int classes() const noexcept { return k_; }

  const LabelMatrix& cells() const noexcept { return cells_; }
  Label operator()(Eigen::Index row, Eigen::Index col) const { return cells_(row, col); }

  /// The first `rows` classifiers, i.e. the ensemble truncated to that size.
  PredictionArray top_rows(Eigen::Index rows) const;

 private:
  LabelMatrix cells_;
  int k_;
};

/// Throws DimensionError unless truth (and mask, when given) align with array.
void check_shapes(const PredictionArray& array, const TruthLabels& truth,
                  const OobMask* mask = nullptr);

}  // namespace ensconv
