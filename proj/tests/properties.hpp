#pragma once

// Random inputs shared by the unit tests and the acceptance gate.

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "ensconv/random.hpp"

namespace props {

using ensconv::Rng;
using ensconv::uniform01;

inline Eigen::VectorXd random_simplex_point(int dims, Rng& rng) {
  // Uniform on Delta via sorted uniforms.
  std::vector<double> cuts(static_cast<std::size_t>(dims));
  for (auto& c : cuts) c = uniform01(rng);
  cuts.push_back(0);
  cuts.push_back(1);
  std::sort(cuts.begin(), cuts.end());
  Eigen::VectorXd theta(dims);
  for (int l = 0; l < dims; ++l) theta[l] = cuts[l + 1] - cuts[l];
  return theta;
}

// Piecewise-linear random function on [0, 1] with `knots` interior breakpoints.
struct PiecewiseLinear {
  std::vector<double> x, y;

  static PiecewiseLinear random(Rng& rng, int knots, bool increasing) {
    PiecewiseLinear f;
    f.x = {0.0, 1.0};
    for (int i = 0; i < knots; ++i) f.x.push_back(uniform01(rng));
    std::sort(f.x.begin(), f.x.end());
    double level = increasing ? 0.0 : uniform01(rng) * 2 - 1;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      f.y.push_back(level);
      level += increasing ? 0.05 + uniform01(rng) : uniform01(rng) * 2 - 1;
    }
    if (increasing)
      for (auto& v : f.y) v /= f.y.back();
    return f;
  }

  double operator()(double u) const {
    if (u <= x.front()) return y.front() + (u - x.front()) * slope(0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (u <= x[i + 1]) return y[i] + (u - x[i]) * slope(i);
    return y.back() + (u - x.back()) * slope(x.size() - 2);
  }

  // Inverse of an increasing instance on [0, 1].
  double inverse(double v) const {
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (v <= y[i + 1]) return x[i] + (v - y[i]) / slope(i);
    return x.back();
  }

  double slope(std::size_t i) const { return (y[i + 1] - y[i]) / (x[i + 1] - x[i]); }
};

// Nondecreasing, nonconstant step function: positive jumps at random points.
struct StepMixture {
  std::vector<double> at, weight;

  static StepMixture random(Rng& rng, int jumps) {
    StepMixture h;
    for (int i = 0; i < jumps; ++i) {
      h.at.push_back(uniform01(rng));
      h.weight.push_back(0.1 + uniform01(rng));
    }
    return h;
  }

  double operator()(double u) const {
    double v = 0;
    for (std::size_t i = 0; i < at.size(); ++i)
      if (u >= at[i]) v += weight[i];
    return v;
  }
};

}  // namespace props
