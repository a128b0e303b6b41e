#pragma once

// First-order model of a randomized voting ensemble on k classes.
//
// A point x is summarised by theta(x) in the simplex
//   Delta = { theta in [0,1]^(k-1) : theta_1 + ... + theta_(k-1) <= 1 },
// with theta_0 = 1 - sum(theta) implied. Classifier i votes for the label whose
// interval I_l(theta) contains its uniform draw U_i. The ensemble error is then
// a functional of the empirical CDF of U_1..U_t, computed exactly for k = 2.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ensconv/random.hpp"
#include "ensconv/types.hpp"

namespace ensconv {

/// Coordinates theta_1..theta_(k-1) of a point in Delta.
using SimplexPoint = Eigen::VectorXd;

inline constexpr double kSimplexTolerance = 1e-12;

/// Throws DomainError when theta lies outside Delta (beyond kSimplexTolerance).
void check_simplex(const Eigen::Ref<const Eigen::VectorXd>& theta);

/// (lower, upper], or [lower, upper] when closed_lower is set.
struct Interval {
  double lower = 0;
  double upper = 0;
  bool closed_lower = false;

  double width() const { return upper - lower; }
  bool contains(double u) const {
    return (closed_lower ? u >= lower : u > lower) && u <= upper;
  }
};

/// Intervals I_0..I_(k-1) partitioning [0, 1]; I_l has width theta_l for l >= 1:
/// I_1 = [0, theta_1], I_l = (S_(l-1), S_l], I_0 = (S_(k-1), 1].
std::vector<Interval> interval_partition(const Eigen::Ref<const Eigen::VectorXd>& theta);

/// The label l whose interval I_l(theta) contains u.
Label first_order_label(const Eigen::Ref<const Eigen::VectorXd>& theta, double u);

/// Lifting of a univariate h to a map R^(k-1) -> R^(k-1):
///   [L(h)(theta)]_l = h(S_l) - h(S_(l-1)),  S_l = theta_1 + ... + theta_l,
/// where the subtracted term is 0 for l = 1.
template <class Fn, class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lift(
    Fn&& h, const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(theta.size());
  Scalar partial(0);
  Scalar previous(0);
  for (Eigen::Index l = 0; l < theta.size(); ++l) {
    partial += theta(l);
    const Scalar current = h(partial);
    out(l) = current - previous;
    previous = current;
  }
  return out;
}

/// Bernstein basis b_j(u; s) = C(s, j) u^j (1-u)^(s-j) for j = 0..s. Evaluated
/// from the mode outwards by ratio recursion, so no binomial overflows.
std::vector<double> bernstein_basis(int degree, double u);

/// B_s(h)(u) = sum_j h(j/s) b_j(u; s).
template <class Fn>
double bernstein(Fn&& h, int degree, double u) {
  const std::vector<double> basis = bernstein_basis(degree, u);
  double sum = 0;
  for (int j = 0; j <= degree; ++j)
    sum += h(static_cast<double>(j) / degree) * basis[static_cast<std::size_t>(j)];
  return sum;
}

/// d/du B_s(h)(u) = s sum_{j<s} (h((j+1)/s) - h(j/s)) b_j(u; s-1).
template <class Fn>
double bernstein_derivative(Fn&& h, int degree, double u) {
  const std::vector<double> basis = bernstein_basis(degree - 1, u);
  double sum = 0;
  double left = h(0.0);
  for (int j = 0; j < degree; ++j) {
    const double right = h(static_cast<double>(j + 1) / degree);
    sum += (right - left) * basis[static_cast<std::size_t>(j)];
    left = right;
  }
  return degree * sum;
}

/// Right-continuous empirical CDF F_t(u) = #{i : U_i <= u} / t.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> draws);

  double operator()(double u) const;
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

enum class LawFamily { beta, dirichlet };

/// Distribution of theta(X) for one class. Beta params are (alpha, beta) of
/// theta_1 (k = 2 only). Dirichlet params are alpha_0..alpha_(k-1), indexed
/// like the coordinates theta_0..theta_(k-1).
struct ClassLaw {
  LawFamily family = LawFamily::beta;
  Eigen::VectorXd params;
};

class FirstOrderModel {
 public:
  FirstOrderModel(Eigen::VectorXd class_proportions, std::vector<ClassLaw> laws);

  /// Two-class model with theta_1 ~ Beta(alpha_l, beta_l) for class l.
  static FirstOrderModel binary(double pi0, double alpha0, double beta0, double alpha1,
                                double beta1);

  int classes() const noexcept { return static_cast<int>(pi_.size()); }
  const Eigen::VectorXd& pi() const noexcept { return pi_; }
  const ClassLaw& law(Label l) const { return laws_.at(static_cast<std::size_t>(l)); }

  /// Dirichlet parameters over (theta_0, ..., theta_(k-1)) for class l.
  const Eigen::VectorXd& dirichlet_alpha(Label l) const {
    return alpha_.at(static_cast<std::size_t>(l));
  }

  /// k = 2: CDF and density of theta_1 under class l.
  double theta_cdf(Label l, double x) const;
  double theta_pdf(Label l, double x) const;

  Label sample_class(Rng& rng) const;
  SimplexPoint sample_theta(Label l, Rng& rng) const;

  /// Parameters <= 1 give densities that are unbounded or have unbounded
  /// gradient at the boundary of Delta; reported, not rejected.
  std::vector<std::string> assumption_warnings() const;

 private:
  Eigen::VectorXd pi_;
  std::vector<ClassLaw> laws_;
  std::vector<Eigen::VectorXd> alpha_;
};

/// t i.i.d. Uniform[0, 1] draws.
std::vector<double> draw_uniforms(std::size_t t, Rng& rng);

/// Exact Err_t of a two-class first-order ensemble:
///   pi_0 mu_0{v : F_t(v) >= 1/2} + pi_1 mu_1{v : F_t(v) <= 1/2},
/// both sets being intervals cut at order statistics of U. Depends on U only
/// through its empirical CDF.
double exact_err_t_binary(const FirstOrderModel& model, std::span<const double> draws);

/// Err_s for s = 1..t along the sequence of draws (running order statistics).
Eigen::VectorXd exact_err_path_binary(const FirstOrderModel& model, std::span<const double> draws);

/// Monte Carlo Err_t: n_test points (Y ~ pi, theta ~ mu_Y) are labelled by every
/// classifier, put to a plurality vote (ties are errors) and scored. Any k.
double mc_err_t(const FirstOrderModel& model, std::span<const double> draws,
                std::size_t n_test, Rng& rng);

struct MonteCarloOptions {
  std::size_t test_points = 1'000'000;
  std::uint64_t seed = 0x5eed'0001;
};

/// Err functional at F = identity. Exact for k = 2, Monte Carlo otherwise.
double err_infinity(const FirstOrderModel& model, const MonteCarloOptions& mc = {});

struct SimulationOptions {
  /// Every run reuses substream 0 (the runs are then identical).
  bool identical_runs = false;
  /// Test points per run when k > 2 (no exact functional).
  std::size_t test_points = 20'000;
};

/// Err_t for n_runs independent ensembles; run r draws from substream (seed, r).
Eigen::VectorXd simulate_err_t(const FirstOrderModel& model, std::size_t t, std::size_t n_runs,
                               std::uint64_t seed, const SimulationOptions& options = {});

/// n_runs x t matrix of sample paths Err_1..Err_t, one row per run.
Eigen::MatrixXd simulate_err_paths(const FirstOrderModel& model, std::size_t t,
                                   std::size_t n_runs, std::uint64_t seed,
                                   const SimulationOptions& options = {});

/// Sample standard deviation of Err_t across n_runs >= 2 runs.
double ground_truth_sigma(const FirstOrderModel& model, std::size_t t, std::size_t n_runs,
                          std::uint64_t seed, const SimulationOptions& options = {});

/// sigma_s for s = 1..t from the same runs.
Eigen::VectorXd ground_truth_sigma_curve(const FirstOrderModel& model, std::size_t t,
                                         std::size_t n_runs, std::uint64_t seed,
                                         const SimulationOptions& options = {});

/// Bootstrap with the exact error functional (k = 2): replicate b resamples the
/// draws with replacement from substream (seed, b) and evaluates Err exactly.
Eigen::VectorXd idealized_bootstrap_replicates(const FirstOrderModel& model,
                                               std::span<const double> draws, int replicates,
                                               std::uint64_t seed);

struct BetaParams {
  double alpha = 1;
  double beta = 1;
};

/// Method-of-moments Beta parameters from a mean and variance.
BetaParams beta_from_moments(double mean, double variance);

/// beta_from_moments on the sample mean and the (1/n) sample variance.
BetaParams beta_moment_fit(std::span<const double> samples);

/// Sorted samples paired with Beta quantiles at plotting positions (i - 0.5) / n.
std::vector<std::pair<double, double>> qq_pairs(std::span<const double> samples,
                                                BetaParams dist);

struct NormalityDiagnostics {
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;
  /// Kolmogorov-Smirnov distance to N(mean, sd^2).
  double ks_stat = 0;
  double skewness = 0;
  double excess_kurtosis = 0;
};

/// Requires n >= 8 and nonzero variance.
NormalityDiagnostics normality_diagnostics(std::span<const double> values);

}  // namespace ensconv
