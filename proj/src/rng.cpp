#include "locsched/rng.hpp"

namespace locsched {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t id : ids) {
    h = splitmix(h ^ splitmix(id + 0x632be59bd9b4e019ULL));
  }
  return h;
}

Vec sample_gaussian(Rng& rng, const Mat& chol_lower) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = chol_lower.rows();
  Vec z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(rng);
  return chol_lower * z;
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Mat psd_sqrt(const Mat& cov) {
  // LDLT tolerates singular PSD matrices (e.g. zero process noise).
  Eigen::LDLT<Mat> ldlt(cov);
  if (ldlt.info() != Eigen::Success) throw NumericalError("covariance factorization failed");
  const Vec d = ldlt.vectorD();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (d(k) < -1e-12) throw NumericalError("covariance is not positive semidefinite");
  }
  Mat l = ldlt.matrixL();
  Mat sqrt_d = Mat::Zero(cov.rows(), cov.cols());
  for (Eigen::Index k = 0; k < d.size(); ++k) sqrt_d(k, k) = std::sqrt(std::max(0.0, d(k)));
  Mat p = Mat::Identity(cov.rows(), cov.cols());
  p = ldlt.transpositionsP().transpose() * p;
  return p * l * sqrt_d;
}

}  // namespace locsched
