#include "specret/spectrum.hpp"

#include <cmath>

namespace specret {

namespace {

void check_curve(const WavelengthGrid& g, const Vec& v, const std::string& what) {
  if (v.size() != g.size()) {
    throw ShapeError(what + ": expected " + std::to_string(g.size()) + " values, got " +
                     std::to_string(v.size()));
  }
  if (!v.allFinite()) throw DomainError(what + ": non-finite value");
}

}  // namespace

double sample_mean(const Vec& v) {
  require(v.size() > 0, "sample_mean: empty vector");
  return v.mean();
}

double sample_sdev(const Vec& v) {
  require(v.size() > 1, "sample_sdev: need at least 2 values");
  const double m = v.mean();
  const double ss = (v.array() - m).square().sum();
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

EmissivitySpectrum::EmissivitySpectrum(WavelengthGrid g, Vec v) : grid(g), values(std::move(v)) {
  check_curve(grid, values, "EmissivitySpectrum");
  if ((values.array() < 0.0).any() || (values.array() > 1.0).any()) {
    throw DomainError("EmissivitySpectrum: values must lie in [0, 1]");
  }
}

RadianceSpectrum::RadianceSpectrum(WavelengthGrid g, Vec v) : grid(g), values(std::move(v)) {
  check_curve(grid, values, "RadianceSpectrum");
}

AtmosphereParams::AtmosphereParams(WavelengthGrid g, Vec tau_in, Vec up, Vec down, Vec bb,
                                   double temp_K)
    : grid(g),
      tau(std::move(tau_in)),
      upwelling(std::move(up)),
      downwelling(std::move(down)),
      blackbody(std::move(bb)),
      temperature_K(temp_K) {
  check_curve(grid, tau, "AtmosphereParams.tau");
  check_curve(grid, upwelling, "AtmosphereParams.upwelling");
  check_curve(grid, downwelling, "AtmosphereParams.downwelling");
  check_curve(grid, blackbody, "AtmosphereParams.blackbody");
  if ((tau.array() < 0.0).any() || (tau.array() > 1.0).any()) {
    throw DomainError("AtmosphereParams: tau must lie in [0, 1]");
  }
  if ((upwelling.array() < 0.0).any() || (downwelling.array() < 0.0).any() ||
      (blackbody.array() < 0.0).any()) {
    throw DomainError("AtmosphereParams: radiance curves must be non-negative");
  }
  require(std::isfinite(temperature_K) && temperature_K > 0.0,
          "AtmosphereParams: temperature must be positive");
}

NormalizedEmissivity normalize(const EmissivitySpectrum& eps) {
  NormalizedEmissivity out{eps.grid, Vec::Zero(eps.size()), 0.0, 0.0, false};
  out.mean = sample_mean(eps.values);
  const double sd = sample_sdev(eps.values);
  // A flat spectrum has no shape; the zero vector is the flagged stand-in.
  if (sd < 1e-14 * (1.0 + std::abs(out.mean))) {
    out.is_constant = true;
    return out;
  }
  out.sdev = sd;
  out.values = (eps.values.array() - out.mean) / sd;
  return out;
}

EmissivitySpectrum denormalize(const NormalizedEmissivity& n) {
  if (n.values.size() != n.grid.size()) throw ShapeError("denormalize: bad shape");
  Vec raw = (n.values.array() * n.sdev + n.mean).matrix();
  return EmissivitySpectrum(n.grid, softclamp(raw, 0.0, 1.0));
}

}  // namespace specret
