#pragma once

#include <cstdint>
#include <vector>

#include "specret/common.hpp"

namespace specret {

/// Background statistics and the symmetric whitening transform of a scene.
struct WhiteningModel {
  Vec mean;                          // inlier background mean
  Mat covariance;                    // inlier covariance, 1/(k-1) convention
  Mat transform;                     // W = V diag(max(lambda, floor))^(-1/2) V^T
  Vec eigenvalues;                   // floored spectrum of the covariance
  double eigen_floor = 0.0;          // floor actually applied
  double outlier_fraction = 0.0;     // fraction removed before the second pass
  std::vector<std::uint8_t> inlier;  // 1 = pixel kept in the second pass
};

/// Fits background mean, covariance, and whitening transform to the pixel
/// rows of a scene.
///
/// Two passes: a provisional mean/covariance over all pixels scores each
/// pixel by Mahalanobis distance, the ceil(outlier_fraction * n) most
/// distant pixels are dropped, and the returned statistics come from the
/// survivors. Eigenvalues are floored at 1e-10 * max(lambda_max, 1) so the
/// inverse square root always exists, including for a constant scene.
WhiteningModel fit_whitening(const Mat& pixels, double outlier_fraction);

/// Applies the whitening transform to one radiance vector.
Vec whiten(const Vec& radiance, const WhiteningModel& model);

/// Applies the whitening transform to each row of a pixel matrix.
Mat whiten_rows(const Mat& pixels, const WhiteningModel& model);

}  // namespace specret
