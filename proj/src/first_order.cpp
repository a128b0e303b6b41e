#include "ensconv/first_order.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "ensconv/parallel.hpp"
#include "ensconv/stats.hpp"
#include "ensconv/voting.hpp"

namespace ensconv {

namespace {

// first_order_label without the domain checks, for inner loops.
Label label_unchecked(const Eigen::Ref<const Eigen::VectorXd>& theta, double u) {
  double partial = 0;
  for (Eigen::Index l = 0; l < theta.size(); ++l) {
    partial += theta(l);
    if (u <= partial) return static_cast<Label>(l + 1);
  }
  return 0;
}

void require_binary(const FirstOrderModel& model) {
  if (model.classes() != 2)
    throw DomainError("the exact error functional is only available for k = 2");
}

double err_from_order_statistics(const FirstOrderModel& model, double lower, double upper) {
  const double pi0 = model.pi()[0];
  const double pi1 = model.pi()[1];
  // Class 0 errs where F_t(v) >= 1/2, i.e. v >= U_(ceil(t/2)); class 1 errs
  // where F_t(v) <= 1/2, i.e. v < U_(floor(t/2)+1).
  return pi0 * (1.0 - model.theta_cdf(0, lower)) + pi1 * model.theta_cdf(1, upper);
}

}  // namespace

void check_simplex(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() < 1) throw DomainError("simplex point needs at least one coordinate");
  double sum = 0;
  for (Eigen::Index l = 0; l < theta.size(); ++l) {
    if (!std::isfinite(theta(l)) || theta(l) < -kSimplexTolerance)
      throw DomainError("simplex coordinate " + std::to_string(l + 1) + " is negative");
    sum += theta(l);
  }
  if (sum > 1.0 + kSimplexTolerance) throw DomainError("simplex coordinates sum above 1");
}

std::vector<Interval> interval_partition(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  check_simplex(theta);
  const auto k = static_cast<std::size_t>(theta.size()) + 1;
  std::vector<Interval> out(k);
  double partial = 0;
  for (std::size_t l = 1; l < k; ++l) {
    const double lower = partial;
    partial += theta(static_cast<Eigen::Index>(l - 1));
    out[l] = Interval{lower, partial, l == 1};
  }
  out[0] = Interval{partial, 1.0, false};
  return out;
}

Label first_order_label(const Eigen::Ref<const Eigen::VectorXd>& theta, double u) {
  check_simplex(theta);
  if (!(u >= 0 && u <= 1)) throw DomainError("u must lie in [0, 1]");
  return label_unchecked(theta, u);
}

std::vector<double> bernstein_basis(int degree, double u) {
  if (degree < 0) throw DomainError("Bernstein degree must be nonnegative");
  if (!(u >= 0 && u <= 1)) throw DomainError("Bernstein argument must lie in [0, 1]");
  const auto s = static_cast<std::size_t>(degree);
  std::vector<double> b(s + 1, 0.0);
  if (u == 0) {
    b[0] = 1;
    return b;
  }
  if (u == 1) {
    b[s] = 1;
    return b;
  }
  const int mode = std::clamp(static_cast<int>(std::floor((degree + 1) * u)), 0, degree);
  const double odds = u / (1 - u);
  b[static_cast<std::size_t>(mode)] = 1;
  for (int j = mode; j < degree; ++j)
    b[static_cast<std::size_t>(j + 1)] =
        b[static_cast<std::size_t>(j)] * (degree - j) / (j + 1.0) * odds;
  for (int j = mode; j > 0; --j)
    b[static_cast<std::size_t>(j - 1)] =
        b[static_cast<std::size_t>(j)] * j / (degree - j + 1.0) / odds;
  // scale so the weights sum to one
  double total = 0;
  for (double v : b) total += v;
  for (double& v : b) v /= total;
  return b;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> draws) : sorted_(std::move(draws)) {
  if (sorted_.empty()) throw DomainError("empirical CDF needs at least one draw");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double u) const {
  const auto below = std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin();
  return static_cast<double>(below) / static_cast<double>(sorted_.size());
}

FirstOrderModel::FirstOrderModel(Eigen::VectorXd class_proportions, std::vector<ClassLaw> laws)
    : pi_(std::move(class_proportions)), laws_(std::move(laws)) {
  const Eigen::Index k = pi_.size();
  if (k < 2) throw DomainError("model needs at least 2 classes");
  if ((pi_.array() < 0).any() || !pi_.allFinite())
    throw DomainError("class proportions must be nonnegative");
  if (std::abs(pi_.sum() - 1.0) > 1e-9) throw DomainError("class proportions must sum to 1");
  if (static_cast<Eigen::Index>(laws_.size()) != k)
    throw DomainError("model needs one distribution per class");
  for (std::size_t l = 0; l < laws_.size(); ++l) {
    const ClassLaw& law = laws_[l];
    if (!law.params.allFinite() || (law.params.array() <= 0).any())
      throw DomainError("distribution parameters of class " + std::to_string(l) +
                        " must be positive");
    Eigen::VectorXd alpha;
    if (law.family == LawFamily::beta) {
      if (k != 2) throw DomainError("beta laws are only valid for k = 2 (use dirichlet)");
      if (law.params.size() != 2) throw DomainError("beta law needs 2 parameters");
      alpha = Eigen::Vector2d(law.params[1], law.params[0]);
    } else {
      if (law.params.size() != k)
        throw DomainError("dirichlet law of class " + std::to_string(l) + " needs " +
                          std::to_string(k) + " parameters");
      alpha = law.params;
    }
    alpha_.push_back(std::move(alpha));
  }
}

FirstOrderModel FirstOrderModel::binary(double pi0, double alpha0, double beta0, double alpha1,
                                        double beta1) {
  return FirstOrderModel(Eigen::Vector2d(pi0, 1.0 - pi0),
                         {ClassLaw{LawFamily::beta, Eigen::Vector2d(alpha0, beta0)},
                          ClassLaw{LawFamily::beta, Eigen::Vector2d(alpha1, beta1)}});
}

double FirstOrderModel::theta_cdf(Label l, double x) const {
  require_binary(*this);
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const Eigen::VectorXd& a = dirichlet_alpha(l);
  return boost::math::ibeta(a[1], a[0], x);
}

double FirstOrderModel::theta_pdf(Label l, double x) const {
  require_binary(*this);
  const Eigen::VectorXd& a = dirichlet_alpha(l);
  return boost::math::pdf(boost::math::beta_distribution<double>(a[1], a[0]), x);
}

Label FirstOrderModel::sample_class(Rng& rng) const {
  const double u = uniform01(rng);
  double cumulative = 0;
  for (Eigen::Index l = 0; l + 1 < pi_.size(); ++l) {
    cumulative += pi_[l];
    if (u < cumulative) return static_cast<Label>(l);
  }
  return static_cast<Label>(pi_.size() - 1);
}

SimplexPoint FirstOrderModel::sample_theta(Label l, Rng& rng) const {
  const Eigen::VectorXd& a = dirichlet_alpha(l);
  Eigen::VectorXd g(a.size());
  double total = 0;
  do {
    for (Eigen::Index c = 0; c < a.size(); ++c)
      g[c] = std::gamma_distribution<double>(a[c], 1.0)(rng);
    total = g.sum();
  } while (!(total > 0));
  return g.tail(a.size() - 1) / total;
}

std::vector<std::string> FirstOrderModel::assumption_warnings() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < alpha_.size(); ++l)
    if ((alpha_[l].array() <= 1.0).any())
      out.push_back("class " + std::to_string(l) +
                    ": parameters <= 1 give a density without a bounded gradient on the "
                    "simplex interior");
  return out;
}

std::vector<double> draw_uniforms(std::size_t t, Rng& rng) {
  std::vector<double> u(t);
  for (double& v : u) v = uniform01(rng);
  return u;
}

double exact_err_t_binary(const FirstOrderModel& model, std::span<const double> draws) {
  require_binary(model);
  if (draws.empty()) throw DomainError("ensemble needs at least one draw");
  const std::size_t t = draws.size();
  std::vector<double> u(draws.begin(), draws.end());
  const std::size_t lower_rank = (t + 1) / 2 - 1;  // U_(ceil(t/2)), 0-based
  const std::size_t upper_rank = t / 2;            // U_(floor(t/2)+1), 0-based
  std::nth_element(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(upper_rank), u.end());
  const double upper = u[upper_rank];
  double lower = upper;
  if (lower_rank != upper_rank)
    lower = *std::max_element(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(upper_rank));
  return err_from_order_statistics(model, lower, upper);
}

Eigen::VectorXd exact_err_path_binary(const FirstOrderModel& model,
                                      std::span<const double> draws) {
  require_binary(model);
  // low holds the ceil(s/2) smallest draws, high the rest.
  std::priority_queue<double> low;
  std::priority_queue<double, std::vector<double>, std::greater<>> high;
  Eigen::VectorXd path(static_cast<Eigen::Index>(draws.size()));
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const double v = draws[s];
    if (low.empty() || v <= low.top())
      low.push(v);
    else
      high.push(v);
    if (low.size() > high.size() + 1) {
      high.push(low.top());
      low.pop();
    } else if (high.size() > low.size()) {
      low.push(high.top());
      high.pop();
    }
    const std::size_t count = s + 1;
    const double lower = low.top();
    const double upper = (count % 2 == 1) ? low.top() : high.top();
    path[static_cast<Eigen::Index>(s)] = err_from_order_statistics(model, lower, upper);
  }
  return path;
}

double mc_err_t(const FirstOrderModel& model, std::span<const double> draws,
                std::size_t n_test, Rng& rng) {
  if (n_test < 1) throw DomainError("Monte Carlo error needs at least one test point");
  const int k = model.classes();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
  std::size_t wrong = 0;
  for (std::size_t n = 0; n < n_test; ++n) {
    const Label y = model.sample_class(rng);
    const SimplexPoint theta = model.sample_theta(y, rng);
    std::fill(counts.begin(), counts.end(), 0);
    for (double u : draws) ++counts[static_cast<std::size_t>(label_unchecked(theta, u))];
    if (vote_from_counts(counts) != y) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(n_test);
}

double err_infinity(const FirstOrderModel& model, const MonteCarloOptions& mc) {
  if (model.classes() == 2) return err_from_order_statistics(model, 0.5, 0.5);

  // Infinite ensemble: the vote vector is theta itself; class y errs unless
  // theta_y strictly exceeds every other coordinate.
  const int k = model.classes();
  Rng rng = make_rng(mc.seed, 0);
  std::size_t wrong = 0;
  for (std::size_t n = 0; n < mc.test_points; ++n) {
    const Label y = model.sample_class(rng);
    const SimplexPoint theta = model.sample_theta(y, rng);
    Eigen::VectorXd full(k);
    full[0] = 1.0 - theta.sum();
    full.tail(k - 1) = theta;
    bool strict = true;
    for (int l = 0; l < k; ++l)
      if (l != y && full[y] <= full[l]) strict = false;
    if (!strict) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(mc.test_points);
}

Eigen::VectorXd simulate_err_t(const FirstOrderModel& model, std::size_t t, std::size_t n_runs,
                               std::uint64_t seed, const SimulationOptions& options) {
  if (t < 1) throw DomainError("ensemble size must be at least 1");
  Eigen::VectorXd err(static_cast<Eigen::Index>(n_runs));
  parallel_for(n_runs, [&](std::size_t r) {
    Rng rng = make_rng(seed, options.identical_runs ? 0 : r);
    const std::vector<double> u = draw_uniforms(t, rng);
    err[static_cast<Eigen::Index>(r)] = model.classes() == 2
                                            ? exact_err_t_binary(model, u)
                                            : mc_err_t(model, u, options.test_points, rng);
  });
  return err;
}

Eigen::MatrixXd simulate_err_paths(const FirstOrderModel& model, std::size_t t,
                                   std::size_t n_runs, std::uint64_t seed,
                                   const SimulationOptions& options) {
  if (t < 1) throw DomainError("ensemble size must be at least 1");
  const int k = model.classes();
  Eigen::MatrixXd paths(static_cast<Eigen::Index>(n_runs), static_cast<Eigen::Index>(t));
  parallel_for(n_runs, [&](std::size_t r) {
    Rng rng = make_rng(seed, options.identical_runs ? 0 : r);
    const std::vector<double> u = draw_uniforms(t, rng);
    const auto row = static_cast<Eigen::Index>(r);
    if (k == 2) {
      paths.row(row) = exact_err_path_binary(model, u).transpose();
      return;
    }
    // k > 2: one fixed test sample per run, votes accumulated draw by draw.
    const std::size_t n_test = options.test_points;
    std::vector<Label> y(n_test);
    std::vector<SimplexPoint> theta(n_test);
    for (std::size_t n = 0; n < n_test; ++n) {
      y[n] = model.sample_class(rng);
      theta[n] = model.sample_theta(y[n], rng);
    }
    std::vector<std::int64_t> counts(n_test * static_cast<std::size_t>(k), 0);
    for (std::size_t s = 0; s < t; ++s) {
      std::size_t wrong = 0;
      for (std::size_t n = 0; n < n_test; ++n) {
        std::int64_t* c = &counts[n * static_cast<std::size_t>(k)];
        ++c[label_unchecked(theta[n], u[s])];
        if (vote_from_counts({c, static_cast<std::size_t>(k)}) != y[n]) ++wrong;
      }
      paths(row, static_cast<Eigen::Index>(s)) =
          static_cast<double>(wrong) / static_cast<double>(n_test);
    }
  });
  return paths;
}

double ground_truth_sigma(const FirstOrderModel& model, std::size_t t, std::size_t n_runs,
                          std::uint64_t seed, const SimulationOptions& options) {
  if (n_runs < 2) throw DomainError("ground truth sigma needs at least 2 runs");
  return sample_sd(simulate_err_t(model, t, n_runs, seed, options));
}

Eigen::VectorXd ground_truth_sigma_curve(const FirstOrderModel& model, std::size_t t,
                                         std::size_t n_runs, std::uint64_t seed,
                                         const SimulationOptions& options) {
  if (n_runs < 2) throw DomainError("ground truth sigma needs at least 2 runs");
  const Eigen::MatrixXd paths = simulate_err_paths(model, t, n_runs, seed, options);
  Eigen::VectorXd curve(paths.cols());
  for (Eigen::Index s = 0; s < paths.cols(); ++s) curve[s] = sample_sd(paths.col(s));
  return curve;
}

Eigen::VectorXd idealized_bootstrap_replicates(const FirstOrderModel& model,
                                               std::span<const double> draws, int replicates,
                                               std::uint64_t seed) {
  require_binary(model);
  if (replicates < 2) throw ConfigError("bootstrap needs at least 2 replicates");
  if (draws.empty()) throw DomainError("ensemble needs at least one draw");
  Eigen::VectorXd z(replicates);
  parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::vector<double> resampled(draws.size());
    for (double& v : resampled) v = draws[uniform_index(rng, draws.size())];
    z[static_cast<Eigen::Index>(b)] = exact_err_t_binary(model, resampled);
  });
  return z;
}

BetaParams beta_from_moments(double mean, double variance) {
  if (!(mean > 0 && mean < 1)) throw DomainError("Beta fit needs a mean in (0, 1)");
  if (!(variance > 0)) throw DomainError("Beta fit needs a positive variance");
  const double spread = mean * (1 - mean);
  if (variance >= spread)
    throw DomainError("infeasible moments: variance must be below mean * (1 - mean)");
  const double scale = spread / variance - 1;
  return BetaParams{mean * scale, (1 - mean) * scale};
}

BetaParams beta_moment_fit(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("Beta fit needs at least 2 samples");
  const Eigen::Map<const Eigen::VectorXd> x(samples.data(),
                                            static_cast<Eigen::Index>(samples.size()));
  const double m = x.mean();
  const double v = (x.array() - m).square().mean();
  return beta_from_moments(m, v);
}

std::vector<std::pair<double, double>> qq_pairs(std::span<const double> samples,
                                                BetaParams dist) {
  if (samples.empty()) throw DomainError("QQ pairs need at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out.emplace_back(sorted[i], boost::math::ibeta_inv(dist.alpha, dist.beta, p));
  }
  return out;
}

NormalityDiagnostics normality_diagnostics(std::span<const double> values) {
  if (values.size() < 8) throw DomainError("normality diagnostics need at least 8 values");
  const Eigen::Map<const Eigen::VectorXd> x(values.data(),
                                            static_cast<Eigen::Index>(values.size()));
  NormalityDiagnostics d;
  d.n = values.size();
  d.mean = x.mean();
  const Eigen::ArrayXd centred = x.array() - d.mean;
  const double m2 = centred.square().mean();
  if (!(m2 > 0)) throw DomainError("normality diagnostics need nonzero variance");
  const double m3 = centred.cube().mean();
  const double m4 = centred.square().square().mean();
  d.sd = sample_sd(x);
  d.skewness = m3 / std::pow(m2, 1.5);
  d.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double ks = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf((sorted[i] - d.mean) / d.sd);
    ks = std::max({ks, (static_cast<double>(i) + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  d.ks_stat = ks;
  return d;
}

}  // namespace ensconv
