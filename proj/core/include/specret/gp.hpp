#pragma once

#include <cstdint>

#include "specret/common.hpp"
#include "specret/grid.hpp"

namespace specret {

/// Matern-5/2 kernel parameters over wavelength distance (micrometers).
struct Matern52Params {
  double variance = 1.0;     // sigma^2, marginal variance
  double lengthscale = 0.4;  // ell, micrometers
};

/// k(d) = sigma^2 (1 + sqrt(5) d / ell + 5 d^2 / (3 ell^2)) exp(-sqrt(5) d / ell).
double matern52(double distance, const Matern52Params& p);

/// Covariance matrix of the kernel evaluated on a wavelength grid.
Mat matern52_covariance(const WavelengthGrid& grid, const Matern52Params& p);

/// Draws zero-mean GP samples on a grid via a cached Cholesky factor.
/// Construction factorizes once with escalating jitter (1e-12 to 1e-6 times
/// the marginal variance); draws are deterministic functions of the seed.
class GpSampler {
 public:
  GpSampler(const WavelengthGrid& grid, const Matern52Params& p);

  Vec sample(std::uint64_t seed) const;
  const Matern52Params& params() const { return params_; }

 private:
  Matern52Params params_;
  Mat chol_;  // lower-triangular factor of K (+ jitter I)
};

/// One-shot GP draw; equivalent to GpSampler(grid, p).sample(seed).
Vec sample_gp(const WavelengthGrid& grid, const Matern52Params& p, std::uint64_t seed);

}  // namespace specret
