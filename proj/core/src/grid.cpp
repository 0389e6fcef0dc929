#include "specret/grid.hpp"

#include <cmath>
#include <sstream>

namespace specret {

WavelengthGrid::WavelengthGrid(double lambda_min, double lambda_max, int n_bands) {
  require(std::isfinite(lambda_min) && std::isfinite(lambda_max),
          "WavelengthGrid: bounds must be finite");
  require(lambda_min > 0.0, "WavelengthGrid: lambda_min must be positive");
  require(lambda_max > lambda_min, "WavelengthGrid: lambda_max must exceed lambda_min");
  require(n_bands >= 2, "WavelengthGrid: need at least 2 bands");
  lambda_min_ = lambda_min;
  lambda_max_ = lambda_max;
  n_ = n_bands;
  lambdas_.resize(n_bands);
  const double step = (lambda_max - lambda_min) / static_cast<double>(n_bands - 1);
  for (int i = 0; i < n_bands; ++i) {
    lambdas_[i] = lambda_min + step * static_cast<double>(i);
  }
  lambdas_[n_bands - 1] = lambda_max;  // endpoint exact despite rounding
}

WavelengthGrid WavelengthGrid::lwir(int n_bands) {
  return WavelengthGrid(7.56, 13.16, n_bands);
}

bool WavelengthGrid::operator==(const WavelengthGrid& o) const {
  return n_ == o.n_ && lambda_min_ == o.lambda_min_ && lambda_max_ == o.lambda_max_;
}

std::string WavelengthGrid::describe() const {
  std::ostringstream os;
  os << n_ << " bands over [" << lambda_min_ << ", " << lambda_max_ << "] um";
  return os.str();
}

void require_same_grid(const WavelengthGrid& a, const WavelengthGrid& b,
                       const std::string& what) {
  if (!(a == b)) {
    throw ShapeError(what + ": wavelength grids differ (" + a.describe() + " vs " +
                     b.describe() + ")");
  }
}

}  // namespace specret
