#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "ensconv/error.hpp"

namespace ensconv {

template <class Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& values) {
  if (values.size() == 0) throw DomainError("mean of an empty sample");
  return values.sum() / static_cast<typename Derived::Scalar>(values.size());
}

/// Sample standard deviation with denominator n - 1.
template <class Derived>
typename Derived::Scalar sample_sd(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  if (values.size() < 2) throw DomainError("sample standard deviation needs at least 2 values");
  const Scalar centre = mean(values);
  const Scalar ss = (values.derived().array() - centre).square().sum();
  return std::sqrt(ss / static_cast<Scalar>(values.size() - 1));
}

/// Quantile of sorted data by linear interpolation between order statistics at
/// 1-based rank p (n - 1) + 1.
template <class Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, Scalar p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0 && p <= 1)) throw DomainError("quantile probability outside [0, 1]");
  const Scalar h = p * static_cast<Scalar>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<Scalar>(lo)) * (sorted[hi] - sorted[lo]);
}

template <class Derived>
std::vector<typename Derived::Scalar> sorted_copy(const Eigen::DenseBase<Derived>& values) {
  std::vector<typename Derived::Scalar> out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = values.derived()(i);
  std::sort(out.begin(), out.end());
  return out;
}

template <class Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived>& values,
                                  typename Derived::Scalar p) {
  return quantile_sorted(sorted_copy(values), p);
}

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace ensconv
