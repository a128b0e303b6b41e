#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond the RNG helpers, so agreement is evidence and not tautology.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "ensconv/random.hpp"

namespace oracle {

using Grid = std::vector<std::vector<int>>;  // [tree][point]
using Mask = std::vector<std::vector<bool>>;

constexpr int kTie = -1;

// Plurality by explicit tallying; kTie on a shared maximum or no votes.
inline int vote(const std::vector<int>& labels) {
  std::map<int, int> count;
  for (int v : labels) ++count[v];
  int best = kTie, best_count = 0;
  bool shared = false;
  for (const auto& [label, c] : count) {
    if (c > best_count) {
      best = label;
      best_count = c;
      shared = false;
    } else if (c == best_count) {
      shared = true;
    }
  }
  return (best_count == 0 || shared) ? kTie : best;
}

inline std::vector<int> column(const Grid& g, std::size_t j, const Mask* mask = nullptr) {
  std::vector<int> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask || (*mask)[i][j]) out.push_back(g[i][j]);
  return out;
}

// Fraction of (optionally class-restricted) columns whose vote misses the truth.
// nullopt when no column qualifies.
inline std::optional<double> error(const Grid& g, const std::vector<int>& truth,
                                   const Mask* mask = nullptr,
                                   std::optional<int> target = std::nullopt) {
  int wrong = 0, total = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (target && truth[j] != *target) continue;
    ++total;
    const int v = vote(column(g, j, mask));
    if (v == kTie || v != truth[j]) ++wrong;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(wrong) / total;
}

// Bootstrap by materializing each resampled array. Draw order mirrors the
// documented substream contract: replicate b takes t uniform indices from (seed, b).
inline std::vector<double> bootstrap(const Grid& g, const std::vector<int>& truth,
                                     const Mask* mask, int replicates, std::uint64_t seed,
                                     std::optional<int> target = std::nullopt) {
  const std::size_t t = g.size();
  std::vector<double> z;
  for (int b = 0; b < replicates; ++b) {
    ensconv::Rng rng = ensconv::make_rng(seed, static_cast<std::uint64_t>(b));
    Grid rows;
    Mask mrows;
    for (std::size_t draw = 0; draw < t; ++draw) {
      const auto i = static_cast<std::size_t>(ensconv::uniform_index(rng, t));
      rows.push_back(g[i]);
      if (mask) mrows.push_back((*mask)[i]);
    }
    z.push_back(*error(rows, truth, mask ? &mrows : nullptr, target));
  }
  return z;
}

struct Split {
  int feature = -1;
  double threshold = 0;
  double impurity = std::numeric_limits<double>::infinity();  // weighted Gini sum
};

inline double gini_mass(const std::map<int, double>& counts) {
  double w = 0, sq = 0;
  for (const auto& [label, c] : counts) {
    w += c;
    sq += c * c;
  }
  return w > 0 ? w - sq / w : 0;
}

// Every feature, every midpoint, impurity recomputed from scratch.
inline Split best_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        const std::vector<double>& weight, int min_leaf = 1) {
  Split best;
  const std::size_t p = x.empty() ? 0 : x.front().size();
  for (std::size_t f = 0; f < p; ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (weight[i] > 0) values.push_back(x[i][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double thr = 0.5 * (values[v] + values[v + 1]);
      std::map<int, double> left, right;
      double wl = 0, wr = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (weight[i] <= 0) continue;
        if (x[i][f] <= thr) {
          left[y[i]] += weight[i];
          wl += weight[i];
        } else {
          right[y[i]] += weight[i];
          wr += weight[i];
        }
      }
      if (wl < min_leaf || wr < min_leaf) continue;
      const double imp = gini_mass(left) + gini_mass(right);
      if (imp < best.impurity - 1e-12) best = {static_cast<int>(f), thr, imp};
    }
  }
  return best;
}

}  // namespace oracle
