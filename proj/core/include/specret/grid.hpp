#pragma once

#include <string>

#include "specret/common.hpp"

namespace specret {

/// Uniform wavelength sampling in micrometers. All spectral objects in the
/// library are defined on one of these grids; operations that combine two
/// spectra require grid equality (same bounds, same band count).
class WavelengthGrid {
 public:
  WavelengthGrid(double lambda_min, double lambda_max, int n_bands);

  /// The default longwave-infrared band, 7.56-13.16 um.
  static WavelengthGrid lwir(int n_bands);

  int size() const { return n_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  double lambda(int i) const { return lambdas_[i]; }
  const Vec& lambdas() const { return lambdas_; }

  bool operator==(const WavelengthGrid& o) const;
  std::string describe() const;

 private:
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  int n_ = 0;
  Vec lambdas_;
};

void require_same_grid(const WavelengthGrid& a, const WavelengthGrid& b,
                       const std::string& what);

}  // namespace specret
