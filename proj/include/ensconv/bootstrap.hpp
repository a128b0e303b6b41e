#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ensconv/types.hpp"

namespace ensconv {

struct BootstrapConfig {
  int replicates = 50;
  std::uint64_t seed = 0;
  Mode mode = Mode::holdout;
  std::optional<Label> target_class;
};

struct SigmaEstimate {
  Eigen::VectorXd replicates;
  double sigma_hat = 0;
  Eigen::Index t = 0;
};

/// Bootstrap replicates of the ensemble error: each replicate resamples the t
/// rows of the array with replacement (and, in oob mode, the matching mask
/// rows) and records the resulting error rate. Replicate b draws from substream
/// (config.seed, b), so the output does not depend on the worker count.
Eigen::VectorXd bootstrap_replicates(const PredictionArray& array, const TruthLabels& truth,
                                     const OobMask* mask, const BootstrapConfig& config);

SigmaEstimate estimate_sigma(const PredictionArray& array, const TruthLabels& truth,
                             const OobMask* mask, const BootstrapConfig& config);

/// Per-row multiplicities of one bootstrap draw of t rows.
std::vector<int> resample_row_weights(Eigen::Index t, std::uint64_t seed, std::uint64_t replicate);

/// Sample standard deviation of the replicates (denominator B - 1).
double sigma_hat(const Eigen::Ref<const Eigen::VectorXd>& replicates);

/// Quantiles of z_b - mean(z); probabilities must lie in (0, 1).
std::vector<double> centered_quantiles(const Eigen::Ref<const Eigen::VectorXd>& replicates,
                                       std::span<const double> probs);

/// Phi^-1(3/4) - Phi^-1(1/4).
double normal_iqr_constant();

/// Interquartile range of the replicates over normal_iqr_constant(). B >= 4.
double sigma_from_iqr(const Eigen::Ref<const Eigen::VectorXd>& replicates);

/// sqrt(t0 / t) * sigma0.
double extrapolate_sigma(double sigma0, std::int64_t t0, std::int64_t t);

/// Smallest t with 3 * extrapolate_sigma(sigma0, t0, t) <= eps. Returns 0 when
/// sigma0 is 0. Not clamped to t0.
std::int64_t min_trees_for_tolerance(double sigma0, std::int64_t t0, double eps);

/// sigma_hat <= eta * err_hat.
bool relative_stopping(double sigma_hat, double err_hat, double eta);

}  // namespace ensconv
