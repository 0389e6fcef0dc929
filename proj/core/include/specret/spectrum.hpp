#pragma once

#include <string>

#include "specret/clamp.hpp"
#include "specret/common.hpp"
#include "specret/grid.hpp"

namespace specret {

/// Sample mean of a vector.
double sample_mean(const Vec& v);

/// Sample standard deviation with the 1/(n-1) convention.
double sample_sdev(const Vec& v);

/// Surface emissivity on a wavelength grid; every value lies in [0, 1].
struct EmissivitySpectrum {
  WavelengthGrid grid;
  Vec values;

  EmissivitySpectrum(WavelengthGrid g, Vec v);
  int size() const { return grid.size(); }
};

/// Z-scored emissivity shape together with the statistics that recover the
/// original spectrum. A constant input cannot be z-scored; it is flagged and
/// represented by the zero shape with sdev 0.
struct NormalizedEmissivity {
  WavelengthGrid grid;
  Vec values;
  double mean = 0.0;
  double sdev = 0.0;
  bool is_constant = false;

  int size() const { return grid.size(); }
};

/// Spectral radiance in microflicks (1 uf = 1e-6 W cm^-2 sr^-1 um^-1).
struct RadianceSpectrum {
  WavelengthGrid grid;
  Vec values;

  RadianceSpectrum(WavelengthGrid g, Vec v);
  int size() const { return grid.size(); }
};

/// Per-scene atmospheric state: transmission, path radiances, and the
/// blackbody curve at the scene temperature. All curves share one grid.
struct AtmosphereParams {
  WavelengthGrid grid;
  Vec tau;          // transmission in [0, 1]
  Vec upwelling;    // path radiance, uf
  Vec downwelling;  // sky radiance at the surface, uf
  Vec blackbody;    // planck(temperature_K) in uf
  double temperature_K = 0.0;

  AtmosphereParams(WavelengthGrid g, Vec tau, Vec up, Vec down, Vec bb, double temp_K);
  int size() const { return grid.size(); }
};

/// Z-scores an emissivity spectrum with respect to its own statistics.
NormalizedEmissivity normalize(const EmissivitySpectrum& eps);

/// Rebuilds an emissivity spectrum from a normalized shape and its stored
/// statistics, clamping softly into [0, 1]. Inverse of normalize() to within
/// 1e-12 whenever no clamping engages.
EmissivitySpectrum denormalize(const NormalizedEmissivity& n);

}  // namespace specret
