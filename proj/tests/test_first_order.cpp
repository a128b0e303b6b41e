#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ensconv/error.hpp"
#include "ensconv/first_order.hpp"
#include "properties.hpp"

using namespace ensconv;
using props::PiecewiseLinear;
using props::random_simplex_point;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Exact Err_t for k = 2 by integrating each class law over the steps of F_t:
// class 0 errs where F_t >= 1/2, class 1 where F_t <= 1/2.
double err_by_segments(double pi0, double a0, double b0, double a1, double b1,
                       std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double t = static_cast<double>(u.size());
  auto cdf = [](double a, double b, double x) {
    return x <= 0 ? 0.0 : x >= 1 ? 1.0 : boost::math::ibeta(a, b, x);
  };
  double err = 0;
  for (std::size_t i = 0; i <= u.size(); ++i) {
    const double lo = i == 0 ? 0.0 : u[i - 1];
    const double hi = i == u.size() ? 1.0 : u[i];
    const double f = static_cast<double>(i) / t;
    if (f >= 0.5) err += pi0 * (cdf(a0, b0, hi) - cdf(a0, b0, lo));
    if (f <= 0.5) err += (1 - pi0) * (cdf(a1, b1, hi) - cdf(a1, b1, lo));
  }
  return err;
}

}  // namespace

TEST_CASE("interval partition") {
  const auto parts = interval_partition(vec({0.2, 0.3}));
  REQUIRE(parts.size() == 3);
  CHECK(parts[1].lower == 0.0);
  CHECK(parts[1].upper == 0.2);
  CHECK(parts[1].closed_lower);
  CHECK(parts[2].lower == 0.2);
  CHECK(parts[2].upper == 0.5);
  CHECK_FALSE(parts[2].closed_lower);
  CHECK(parts[0].lower == 0.5);
  CHECK(parts[0].upper == 1.0);

  const auto zero = interval_partition(vec({0.0, 0.0}));
  CHECK(zero[0].width() == 1.0);
  CHECK(zero[1].width() == 0.0);
  CHECK(zero[2].width() == 0.0);

  Rng rng = make_rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    const auto theta = random_simplex_point(4, rng);
    double total = 0;
    for (const auto& iv : interval_partition(theta)) total += iv.width();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(interval_partition(vec({0.7, 0.4})), DomainError);
  CHECK_THROWS_AS(interval_partition(vec({-0.1, 0.4})), DomainError);
}

TEST_CASE("first-order label") {
  CHECK(first_order_label(vec({0.7}), 0.5) == 1);
  CHECK(first_order_label(vec({0.7}), 0.9) == 0);
  CHECK(first_order_label(vec({0.2, 0.3}), 0.4) == 2);
  CHECK(first_order_label(vec({0.2, 0.3}), 0.0) == 1);
  CHECK(first_order_label(vec({0.2, 0.3}), 0.2) == 1);
}

TEST_CASE("lift examples") {
  const auto sq = lift([](double u) { return u * u; }, vec({0.2, 0.3}));
  CHECK(sq[0] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(sq[1] == doctest::Approx(0.21).epsilon(1e-15));
}

TEST_CASE("lift algebra on random functions") {
  Rng rng = make_rng(21, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dims = 1 + static_cast<int>(uniform_index(rng, 5));
    const auto theta = random_simplex_point(dims, rng);
    const auto g = PiecewiseLinear::random(rng, 4, false);
    const auto h = PiecewiseLinear::random(rng, 4, false);
    const auto F = PiecewiseLinear::random(rng, 5, true);
    const double a = uniform01(rng) * 4 - 2;

    const Eigen::VectorXd lin = lift([&](double u) { return a * g(u) + h(u); }, theta);
    CHECK((lin - (a * lift(g, theta) + lift(h, theta))).cwiseAbs().maxCoeff() <= 1e-10);

    const Eigen::VectorXd comp = lift([&](double u) { return F(h(u)); }, theta);
    CHECK((comp - lift(F, lift(h, theta))).cwiseAbs().maxCoeff() <= 1e-10);

    CHECK((lift([](double u) { return u; }, theta) - theta).cwiseAbs().maxCoeff() <= 1e-10);

    const Eigen::VectorXd image = lift(F, theta);
    CHECK(image.minCoeff() >= -1e-10);
    CHECK(image.sum() <= 1 + 1e-10);

    const Eigen::VectorXd back = lift([&](double v) { return F.inverse(v); }, lift(F, theta));
    CHECK((back - theta).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("Bernstein operator") {
  CHECK(bernstein([](double u) { return u * u; }, 2, 0.5) == doctest::Approx(0.375).epsilon(1e-15));
  auto h = [](double u) { return std::exp(u); };
  for (double u : {0.0, 0.3, 1.0})
    CHECK(bernstein(h, 1, u) == doctest::Approx(h(0) * (1 - u) + h(1) * u).epsilon(1e-15));

  for (int s : {1, 2, 7, 64, 1000}) {
    for (int i = 0; i <= 100; ++i) {
      const double u = i / 100.0;
      CHECK(std::abs(bernstein([](double v) { return 0.3 - 2 * v; }, s, u) - (0.3 - 2 * u)) <= 1e-12);
    }
  }

  const auto basis = bernstein_basis(300, 0.37);
  double total = 0;
  for (double b : basis) total += b;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Bernstein derivative matches a difference quotient") {
  auto h = [](double u) { return std::sin(3 * u) + u * u; };
  for (int s : {3, 10, 40}) {
    for (double u : {0.1, 0.5, 0.83}) {
      const double d = 1e-6;
      const double numeric = (bernstein(h, s, u + d) - bernstein(h, s, u - d)) / (2 * d);
      CHECK(bernstein_derivative(h, s, u) == doctest::Approx(numeric).epsilon(1e-6));
    }
  }
}

TEST_CASE("empirical CDF") {
  CHECK(EmpiricalCdf({0.5})(0.5) == 1.0);
  CHECK(EmpiricalCdf({0.5})(0.49) == 0.0);
  CHECK(EmpiricalCdf({0.2, 0.8})(0.5) == 0.5);
}

TEST_CASE("exact error of two-class ensembles") {
  const auto uniform = FirstOrderModel::binary(0.5, 1, 1, 1, 1);
  CHECK(err_infinity(uniform) == doctest::Approx(0.5).epsilon(1e-14));

  const auto only_one = FirstOrderModel::binary(0.0, 2, 2, 1, 1);
  const double u1[] = {0.3};
  CHECK(exact_err_t_binary(only_one, u1) == doctest::Approx(0.3).epsilon(1e-14));

  const auto skew = FirstOrderModel::binary(0.5, 1, 3, 3, 1);
  CHECK(err_infinity(skew) == doctest::Approx(0.125).epsilon(1e-13));

  Rng rng = make_rng(8, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const double pi0 = uniform01(rng);
    const double a0 = 0.5 + 4 * uniform01(rng), b0 = 0.5 + 4 * uniform01(rng);
    const double a1 = 0.5 + 4 * uniform01(rng), b1 = 0.5 + 4 * uniform01(rng);
    const auto model = FirstOrderModel::binary(pi0, a0, b0, a1, b1);
    const auto u = draw_uniforms(1 + uniform_index(rng, 40), rng);
    CHECK(exact_err_t_binary(model, u) ==
          doctest::Approx(err_by_segments(pi0, a0, b0, a1, b1, u)).epsilon(1e-12));
    const Eigen::VectorXd path = exact_err_path_binary(model, u);
    for (std::size_t s = 1; s <= u.size(); ++s)
      CHECK(path[static_cast<Eigen::Index>(s - 1)] ==
            doctest::Approx(exact_err_t_binary(model, std::span(u).first(s))).epsilon(1e-12));
  }
}

TEST_CASE("pi = (1, 0) depends only on the class-0 law") {
  const auto a = FirstOrderModel::binary(1.0, 2, 5, 1, 1);
  const auto b = FirstOrderModel::binary(1.0, 2, 5, 9, 2);
  Rng rng = make_rng(4, 0);
  const auto u = draw_uniforms(25, rng);
  CHECK(exact_err_t_binary(a, u) == exact_err_t_binary(b, u));
  CHECK(err_infinity(FirstOrderModel::binary(1.0, 2, 50, 1, 1)) < 1e-10);
}

TEST_CASE("Monte Carlo error agrees with the exact functional") {
  const auto model = FirstOrderModel::binary(0.4, 2, 5, 5, 2);
  Rng rng = make_rng(10, 0);
  const auto u = draw_uniforms(15, rng);
  const double exact = exact_err_t_binary(model, u);
  const std::size_t n = 200000;
  const double mc = mc_err_t(model, u, n, rng);
  CHECK(std::abs(mc - exact) <= 3 * std::sqrt(exact * (1 - exact) / n));
  const double one = mc_err_t(model, u, 1, rng);
  CHECK((one == 0.0 || one == 1.0));
}

TEST_CASE("k = 3 Dirichlet model") {
  std::vector<ClassLaw> laws;
  laws.push_back({LawFamily::dirichlet, vec({6, 2, 2})});
  laws.push_back({LawFamily::dirichlet, vec({2, 6, 2})});
  laws.push_back({LawFamily::dirichlet, vec({2, 2, 6})});
  const FirstOrderModel model(vec({0.3, 0.3, 0.4}), laws);
  CHECK(model.assumption_warnings().empty());
  Rng rng = make_rng(12, 0);
  for (int i = 0; i < 100; ++i) check_simplex(model.sample_theta(2, rng));
  MonteCarloOptions mc;
  mc.test_points = 100000;
  const double e = err_infinity(model, mc);
  CHECK(e > 0.0);
  CHECK(e < 0.5);
  const Eigen::VectorXd runs = simulate_err_t(model, 51, 8, 1, {false, 5000});
  CHECK(runs.minCoeff() >= 0.0);
  CHECK(runs.maxCoeff() <= 1.0);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(FirstOrderModel(vec({0.6, 0.6}), {{LawFamily::beta, vec({2, 2})},
                                                    {LawFamily::beta, vec({2, 2})}}),
                  DomainError);
  CHECK_THROWS_AS(FirstOrderModel(vec({0.5, 0.5}), {{LawFamily::beta, vec({2, 0})},
                                                    {LawFamily::beta, vec({2, 2})}}),
                  DomainError);
  CHECK_THROWS_AS(FirstOrderModel(vec({0.2, 0.3, 0.5}), {{LawFamily::beta, vec({2, 2})},
                                                         {LawFamily::beta, vec({2, 2})},
                                                         {LawFamily::beta, vec({2, 2})}}),
                  DomainError);
  CHECK(FirstOrderModel::binary(0.5, 1, 1, 1, 1).assumption_warnings().size() == 2);
}

TEST_CASE("ground-truth sigma") {
  const auto model = FirstOrderModel::binary(0.5, 2, 5, 5, 2);
  SimulationOptions same;
  same.identical_runs = true;
  CHECK(ground_truth_sigma(model, 50, 2, 9, same) == 0.0);
  const auto degenerate = FirstOrderModel::binary(1.0, 2, 80, 1, 1);
  CHECK(ground_truth_sigma(degenerate, 101, 50, 9) < 1e-6);
  const Eigen::VectorXd curve = ground_truth_sigma_curve(model, 400, 300, 2);
  CHECK(curve.segment(300, 100).mean() < curve.segment(20, 100).mean());
}

TEST_CASE("idealized bootstrap") {
  const auto model = FirstOrderModel::binary(0.3, 2, 5, 5, 2);
  Rng rng = make_rng(2, 0);
  const auto u = draw_uniforms(41, rng);
  const Eigen::VectorXd z = idealized_bootstrap_replicates(model, u, 30, 77);
  for (Eigen::Index b = 0; b < z.size(); ++b) {
    Rng r = make_rng(77, static_cast<std::uint64_t>(b));
    std::vector<double> resampled(u.size());
    for (auto& v : resampled) v = u[uniform_index(r, u.size())];
    CHECK(z[b] == exact_err_t_binary(model, resampled));
  }
}

TEST_CASE("method of moments") {
  const auto p = beta_from_moments(0.5, 0.05);
  CHECK(p.alpha == doctest::Approx(2.0));
  CHECK(p.beta == doctest::Approx(2.0));
  const auto q = beta_from_moments(0.5, 1.0 / 12);
  CHECK(q.alpha == doctest::Approx(1.0));
  CHECK(q.beta == doctest::Approx(1.0));
  CHECK_THROWS_AS(beta_from_moments(0.5, 0.3), DomainError);

  std::mt19937_64 gen(4);
  std::gamma_distribution<double> ga(2.0), gb(5.0);
  std::vector<double> s(100000);
  for (auto& v : s) {
    const double x = ga(gen);
    v = x / (x + gb(gen));
  }
  const auto fit = beta_moment_fit(s);
  CHECK(fit.alpha == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.beta == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("QQ pairs") {
  const double one[] = {0.42};
  const auto single = qq_pairs(one, {2, 2});
  REQUIRE(single.size() == 1);
  CHECK(single[0].first == 0.42);
  CHECK(single[0].second == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<double> constant(500, 0.3);
  double worst = 0;
  for (const auto& [x, q] : qq_pairs(constant, {2, 5})) worst = std::max(worst, std::abs(x - q));
  CHECK(worst > 0.1);
}

TEST_CASE("normality diagnostics") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  std::vector<double> z(10000);
  for (auto& v : z) v = normal(gen);
  const auto nd = normality_diagnostics(z);
  CHECK(nd.ks_stat < 0.02);
  CHECK(std::abs(nd.skewness) < 0.1);

  std::uniform_real_distribution<double> unif;
  for (auto& v : z) v = unif(gen);
  CHECK(normality_diagnostics(z).excess_kurtosis == doctest::Approx(-1.2).epsilon(0.05));

  const std::vector<double> flat(20, 1.0);
  CHECK_THROWS_AS(normality_diagnostics(flat), DomainError);
}
