#include "specret/planck.hpp"

#include <cmath>

namespace specret {

namespace {
// W m^-2 sr^-1 m^-1 -> microflick (1e-6 W cm^-2 sr^-1 um^-1).
constexpr double kSiToMicroflick = 1e-4;
}  // namespace

double planck_microflick(double lambda_um, double T_K) {
  require(std::isfinite(lambda_um) && lambda_um > 0.0,
          "planck: wavelength must be positive and finite");
  require(std::isfinite(T_K) && T_K > 0.0 && T_K <= 10000.0,
          "planck: temperature must lie in (0, 10000] K");
  const double lambda_m = lambda_um * 1e-6;
  const double c1 = 2.0 * kPlanckH * kLightC * kLightC;  // W m^2
  const double x = kPlanckH * kLightC / (lambda_m * kBoltzmannK * T_K);
  double radiance_si;
  if (x > 700.0) {
    // exp(x) would overflow; switch to log space, underflowing gracefully.
    const double log_b = std::log(c1) - 5.0 * std::log(lambda_m) - x;
    radiance_si = std::exp(log_b);
  } else {
    radiance_si = c1 / (std::pow(lambda_m, 5) * std::expm1(x));
  }
  return radiance_si * kSiToMicroflick;
}

Vec planck_curve(const WavelengthGrid& grid, double T_K) {
  Vec out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = planck_microflick(grid.lambda(i), T_K);
  return out;
}

double fit_planck_temperature(const WavelengthGrid& grid, const Vec& curve, double T_lo,
                              double T_hi) {
  require(curve.size() == grid.size(), "fit_planck_temperature: size mismatch");
  require(T_lo > 0.0 && T_hi > T_lo, "fit_planck_temperature: bad bracket");
  auto sse = [&](double T) {
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double d = planck_microflick(grid.lambda(i), T) - curve[i];
      s += d * d;
    }
    return s;
  };
  // Golden-section search; the objective is unimodal in T for physical curves.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = T_lo, b = T_hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = sse(c), fd = sse(d);
  for (int it = 0; it < 200 && (b - a) > 1e-6; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = sse(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace specret
