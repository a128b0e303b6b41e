#include "ensconv/bootstrap.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ensconv/parallel.hpp"
#include "ensconv/random.hpp"
#include "ensconv/stats.hpp"
#include "ensconv/voting.hpp"

namespace ensconv {

std::vector<int> resample_row_weights(Eigen::Index t, std::uint64_t seed, std::uint64_t replicate) {
  Rng rng = make_rng(seed, replicate);
  std::vector<int> weights(t, 0);
  for (Eigen::Index draw = 0; draw < t; ++draw)
    ++weights[uniform_index(rng, static_cast<std::uint64_t>(t))];
  return weights;
}

Eigen::VectorXd bootstrap_replicates(const PredictionArray& array, const TruthLabels& truth,
                                     const OobMask* mask, const BootstrapConfig& config) {
  if (config.replicates < 2)
    throw ConfigError("bootstrap needs at least 2 replicates, got " +
                      std::to_string(config.replicates));
  if ((config.mode == Mode::oob) != (mask != nullptr))
    throw ConfigError(config.mode == Mode::oob ? "oob mode requires a mask"
                                               : "a mask is only used in oob mode");
  // Shape, label and empty-class checks happen once, on the original array.
  tally_errors(array, truth, mask, config.target_class);

  Eigen::VectorXd z(config.replicates);
  parallel_for(static_cast<std::size_t>(config.replicates), [&](std::size_t b) {
    const std::vector<int> weights = resample_row_weights(array.trees(), config.seed, b);
    z[static_cast<Eigen::Index>(b)] =
        tally_errors(array, truth, mask, config.target_class, weights).rate();
  });
  return z;
}

SigmaEstimate estimate_sigma(const PredictionArray& array, const TruthLabels& truth,
                             const OobMask* mask, const BootstrapConfig& config) {
  SigmaEstimate est;
  est.replicates = bootstrap_replicates(array, truth, mask, config);
  est.sigma_hat = sigma_hat(est.replicates);
  est.t = array.trees();
  return est;
}

double sigma_hat(const Eigen::Ref<const Eigen::VectorXd>& replicates) {
  if (replicates.size() < 2) throw ConfigError("sigma_hat needs at least 2 replicates");
  return sample_sd(replicates);
}

std::vector<double> centered_quantiles(const Eigen::Ref<const Eigen::VectorXd>& replicates,
                                       std::span<const double> probs) {
  if (replicates.size() == 0) throw DomainError("no replicates");
  for (double p : probs)
    if (!(p > 0 && p < 1)) throw DomainError("quantile probability must lie in (0, 1)");
  const Eigen::VectorXd centred = replicates.array() - mean(replicates);
  const std::vector<double> sorted = sorted_copy(centred);
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(sorted, p));
  return out;
}

double normal_iqr_constant() { return normal_quantile(0.75) - normal_quantile(0.25); }

double sigma_from_iqr(const Eigen::Ref<const Eigen::VectorXd>& replicates) {
  if (replicates.size() < 4) throw ConfigError("IQR-based sigma needs at least 4 replicates");
  const std::vector<double> sorted = sorted_copy(replicates);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  return iqr / normal_iqr_constant();
}

double extrapolate_sigma(double sigma0, std::int64_t t0, std::int64_t t) {
  if (t0 < 1 || t < 1) throw DomainError("ensemble sizes must be at least 1");
  if (!(sigma0 >= 0)) throw DomainError("sigma0 must be nonnegative");
  return std::sqrt(static_cast<double>(t0) / static_cast<double>(t)) * sigma0;
}

std::int64_t min_trees_for_tolerance(double sigma0, std::int64_t t0, double eps) {
  if (!(eps > 0)) throw DomainError("eps must be positive");
  if (t0 < 1) throw DomainError("t0 must be at least 1");
  if (!(sigma0 >= 0)) throw DomainError("sigma0 must be nonnegative");
  if (sigma0 == 0) return 0;

  const double ratio = 3.0 * sigma0 / eps;
  const double estimate = std::ceil(ratio * ratio * static_cast<double>(t0));
  if (!(estimate < 9.0e15)) throw DomainError("required ensemble size is out of range");

  // The closed form can land one off after rounding; settle on the predicate.
  auto converged = [&](std::int64_t t) { return 3.0 * extrapolate_sigma(sigma0, t0, t) <= eps; };
  auto t = std::max<std::int64_t>(1, static_cast<std::int64_t>(estimate));
  while (t > 1 && converged(t - 1)) --t;
  while (!converged(t)) ++t;
  return t;
}

bool relative_stopping(double sigma_hat, double err_hat, double eta) {
  if (!(eta > 0 && eta < 1)) throw DomainError("eta must lie in (0, 1)");
  return sigma_hat <= eta * err_hat;
}

}  // namespace ensconv
