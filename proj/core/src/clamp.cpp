#include "specret/clamp.hpp"

#include <cmath>

namespace specret {

namespace {
constexpr double kCorner = 1.4e-6;  // corner width as a fraction of (hi - lo)

void check_interval(double x, double lo, double hi) {
  require(std::isfinite(x), "softclamp: non-finite input");
  require(std::isfinite(lo) && std::isfinite(hi), "softclamp: non-finite interval");
  require(lo < hi, "softclamp: requires lo < hi");
}
}  // namespace

double softclamp(double x, double lo, double hi) {
  check_interval(x, lo, hi);
  const double w = hi - lo;
  const double d = kCorner;
  const double t = (x - lo) / w;
  if (t >= d && t <= 1.0 - d) return x;  // identity region, exact
  if (t < d) return lo + w * (d * d / (2.0 * d - t));
  return lo + w * (1.0 - d * d / (t - 1.0 + 2.0 * d));
}

double softclamp_deriv(double x, double lo, double hi) {
  check_interval(x, lo, hi);
  const double w = hi - lo;
  const double d = kCorner;
  const double t = (x - lo) / w;
  if (t >= d && t <= 1.0 - d) return 1.0;
  if (t < d) {
    const double u = 2.0 * d - t;
    return d * d / (u * u);
  }
  const double u = t - 1.0 + 2.0 * d;
  return d * d / (u * u);
}

Vec softclamp(const Vec& x, double lo, double hi) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = softclamp(x[i], lo, hi);
  return out;
}

}  // namespace specret
