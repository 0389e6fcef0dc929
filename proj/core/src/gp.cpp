#include "specret/gp.hpp"

#include <cmath>

#include "specret/rng.hpp"

namespace specret {

double matern52(double distance, const Matern52Params& p) {
  require(std::isfinite(distance) && distance >= 0.0, "matern52: distance must be >= 0");
  require(p.variance > 0.0 && std::isfinite(p.variance), "matern52: variance must be positive");
  require(p.lengthscale > 0.0 && std::isfinite(p.lengthscale),
          "matern52: lengthscale must be positive");
  const double a = std::sqrt(5.0) * distance / p.lengthscale;
  return p.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

Mat matern52_covariance(const WavelengthGrid& grid, const Matern52Params& p) {
  const int r = grid.size();
  Mat k(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = matern52(std::abs(grid.lambda(i) - grid.lambda(j)), p);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GpSampler::GpSampler(const WavelengthGrid& grid, const Matern52Params& p) : params_(p) {
  const Mat k = matern52_covariance(grid, p);
  double jitter = 1e-12 * p.variance;
  const double jitter_max = 1e-6 * p.variance;
  while (true) {
    Mat kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(kj);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      return;
    }
    if (jitter >= jitter_max) {
      throw NumericError("GpSampler: covariance not positive definite after max jitter");
    }
    jitter *= 100.0;
    if (jitter > jitter_max) jitter = jitter_max;
  }
}

Vec GpSampler::sample(std::uint64_t seed) const {
  Rng rng(derive_seed(seed, {0x6700u}));
  return chol_ * rng.normal_vec(static_cast<int>(chol_.rows()));
}

Vec sample_gp(const WavelengthGrid& grid, const Matern52Params& p, std::uint64_t seed) {
  return GpSampler(grid, p).sample(seed);
}

}  // namespace specret
