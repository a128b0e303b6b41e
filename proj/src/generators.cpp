#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "ensconv/trainer.hpp"

namespace ensconv {

namespace {

Eigen::VectorXd standard_normals(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of R's diagonal folded into Q.
Eigen::MatrixXd haar_orthogonal(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

SyntheticContinuous::SyntheticContinuous(int dims, std::uint64_t seed) {
  if (dims < 10) throw DomainError("continuous generator needs at least 10 dimensions");
  Rng rng = make_rng(seed, 0);
  mean0_ = Eigen::VectorXd::Zero(dims);
  mean1_ = Eigen::VectorXd::Zero(dims);
  std::vector<int> positions(static_cast<std::size_t>(dims));
  std::iota(positions.begin(), positions.end(), 0);
  for (int i = 0; i < 10; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   uniform_index(rng, static_cast<std::uint64_t>(dims - i));
    std::swap(positions[static_cast<std::size_t>(i)], positions[j]);
    mean1_[positions[static_cast<std::size_t>(i)]] = 0.05;
  }
  basis_ = haar_orthogonal(dims, rng);
  scales_ = Eigen::VectorXd::LinSpaced(dims, 1.0, dims).cwiseInverse();
}

Eigen::MatrixXd SyntheticContinuous::covariance() const {
  return basis_ * scales_.cwiseAbs2().asDiagonal() * basis_.transpose();
}

Dataset SyntheticContinuous::sample(std::size_t n_per_class, Rng& rng) const {
  if (n_per_class < 1) throw DomainError("need at least one row per class");
  const Eigen::Index p = mean0_.size();
  const auto n = static_cast<Eigen::Index>(2 * n_per_class);
  Dataset out;
  out.classes = 2;
  out.features.resize(n, p);
  out.labels.resize(n);
  const Eigen::MatrixXd factor = basis_ * scales_.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Label y = i < static_cast<Eigen::Index>(n_per_class) ? 0 : 1;
    out.features.row(i) = (mean(y) + factor * standard_normals(p, rng)).transpose();
    out.labels[i] = y;
  }
  return out;
}

SyntheticDiscrete::SyntheticDiscrete(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  p0_ = Eigen::VectorXd::Constant(kCells, 1.0 / kCells);
  const Eigen::VectorXd perturbed = (p0_ + standard_normals(kCells, rng) / 300.0).cwiseAbs();
  p1_ = perturbed / perturbed.sum();
}

Dataset SyntheticDiscrete::sample(std::size_t n_per_class, Rng& rng) const {
  if (n_per_class < 1) throw DomainError("need at least one row per class");
  const auto n = static_cast<Eigen::Index>(2 * n_per_class);
  Dataset out;
  out.classes = 2;
  out.features.setZero(n, kCells);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Label y = i < static_cast<Eigen::Index>(n_per_class) ? 0 : 1;
    const Eigen::VectorXd& p = cell_probabilities(y);
    std::discrete_distribution<int> cell(p.data(), p.data() + p.size());
    for (int ball = 0; ball < kBalls; ++ball) out.features(i, cell(rng)) += 1.0;
    out.labels[i] = y;
  }
  return out;
}

Dataset gen_synthetic_continuous(std::size_t n_per_class, int dims, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  return SyntheticContinuous(dims, seed).sample(n_per_class, rng);
}

Dataset gen_synthetic_discrete(std::size_t n_per_class, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  return SyntheticDiscrete(seed).sample(n_per_class, rng);
}

}  // namespace ensconv
