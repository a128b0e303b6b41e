#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "ensconv/types.hpp"

namespace ensconv {

/// Plurality vote over `column`. Returns tie_label(k) when the maximal count is
/// attained by two or more labels, or when the column is empty.
Label plurality_vote(std::span<const Label> column, int num_classes);

/// Plurality vote restricted to rows i with oob[i] set. Empty restriction is a tie.
Label oob_vote(std::span<const Label> column, std::span<const bool> oob, int num_classes);

/// Vote from per-label counts; shared maximum or all-zero counts give a tie.
Label vote_from_counts(std::span<const std::int64_t> counts);

/// Fraction of columns whose plurality vote differs from the truth label.
double error_rate_holdout(const PredictionArray& array, const TruthLabels& truth);

/// Same as error_rate_holdout, voting only over out-of-bag rows of each column.
double error_rate_oob(const PredictionArray& array, const TruthLabels& truth,
                      const OobMask& mask);

/// Error rate over the columns whose truth label is `target`. Pass a mask for
/// the out-of-bag version. Throws EmptyClassError when no column has that label.
double classwise_error_rate(const PredictionArray& array, const TruthLabels& truth,
                            Label target, const OobMask* mask = nullptr);

/// Err_s for s = 1..t, the error of the ensemble truncated to its first s rows.
/// Runs in O(t m k) with per-column running vote counts.
Eigen::VectorXd prefix_error_curve(const PredictionArray& array, const TruthLabels& truth,
                                   const OobMask* mask = nullptr);

struct ErrorTally {
  Eigen::Index wrong = 0;
  Eigen::Index total = 0;

  double rate() const;
};

/// Shared engine behind the error-rate functions. `row_weights[i]` is the number
/// of copies of row i in the (possibly resampled) ensemble; an empty span means
/// one copy of every row. Columns are restricted to `target` when it is set.
ErrorTally tally_errors(const PredictionArray& array, const TruthLabels& truth,
                        const OobMask* mask, std::optional<Label> target,
                        std::span<const int> row_weights = {});

}  // namespace ensconv
