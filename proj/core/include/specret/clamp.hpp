#pragma once

#include "specret/common.hpp"

namespace specret {

/// Smoothly clamps x into the open interval (lo, hi).
///
/// The map is the identity on [lo + d, hi - d] with d = 1.4e-6 * (hi - lo),
/// and saturates through C1 rational corners outside that region:
///   t < d:      d^2 / (2d - t)          (approaches lo from above)
///   t > 1 - d:  1 - d^2 / (t - 1 + 2d)  (approaches hi from below)
/// in normalized coordinates t = (x - lo) / (hi - lo). It is strictly
/// increasing on all of R, exact at the midpoint, and stable under repeated
/// application (re-clamp drift < d/2). The corner width is chosen so values
/// produced by one clamp are reproduced by a second clamp to within 1e-6.
double softclamp(double x, double lo, double hi);

/// Derivative of softclamp with respect to x (continuous everywhere).
double softclamp_deriv(double x, double lo, double hi);

/// Elementwise softclamp over a vector.
Vec softclamp(const Vec& x, double lo, double hi);

}  // namespace specret
