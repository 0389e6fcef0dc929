#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specret/cube.hpp"
#include "specret/forward_model.hpp"
#include "specret/gp.hpp"
#include "specret/spectrum.hpp"
#include "specret/whitening.hpp"

namespace specret {

/// Atmosphere whose blackbody curve is exactly the Planck curve at the given
/// temperature (the generation-side constructor; estimated atmospheres carry
/// whatever curve their decoder produced).
AtmosphereParams atmosphere_from_temperature(const WavelengthGrid& grid, Vec tau, Vec up,
                                             Vec down, double temperature_K);

/// Smooth random transmission with absorption notches (deepest at the
/// low-wavelength end), path radiances tied to a cooler air temperature, and
/// an exact Planck blackbody. Deterministic per seed. With
/// transparent_override the transmission is identically 1, so both path
/// radiances vanish.
AtmosphereParams gen_atmosphere(const WavelengthGrid& grid, double temperature_K,
                                std::uint64_t seed, bool transparent_override = false);

/// One named library spectrum.
struct LibraryEntry {
  std::string name;
  EmissivitySpectrum emissivity;
};

/// Random library skewed toward high-mean, low-variation spectra: each entry
/// is softclamp(base_mean + GP, 0, 1) with base_mean ~ U[0.7, 0.98], marginal
/// sdev log-uniform in [0.002, 0.15], and lengthscale log-uniform in
/// [0.15, 8] micrometers. Names are "mat-0000", "mat-0001", ...
std::vector<LibraryEntry> gen_library(int m, const WavelengthGrid& grid, std::uint64_t seed);

/// One labeled in-scene target. The stored radiance is noiseless: it must
/// reproduce propagate(emissivity, atmosphere, alpha, background) exactly;
/// the cube pixel additionally carries sensor noise.
struct TrainingExample {
  RadianceSpectrum radiance;       // L, noiseless
  RadianceSpectrum whitened;       // L_w under the cube's whitening model
  EmissivitySpectrum emissivity;   // eps
  NormalizedEmissivity shape;      // eps z-scored, with (mean, sdev)
  double alpha = 1.0;
  std::string atm_ref;
  std::string cube_ref;
  std::string entry_name;
  int pixel_index = -1;
  RadianceSpectrum background;     // per-pixel noiseless background radiance
};

/// Knobs for one synthetic dataset.
struct SyntheticSceneSpec {
  int n_cubes = 1;
  int cube_width = 32;
  int cube_height = 32;
  int n_bands = 32;
  double temperature_lo_K = 280.0;
  double temperature_hi_K = 320.0;
  double alpha_lo = 0.1;
  double alpha_hi = 1.0;
  int library_size = 64;
  double injection_fraction = 0.15;
  double sensor_noise_frac = 0.003;  // sdev as a fraction of cube-mean radiance
  std::uint64_t seed = 0;

  void validate() const;
};

/// A generated cube with its ground truth.
struct SceneBuild {
  HsiCube cube;
  std::vector<TrainingExample> examples;
  AtmosphereParams atmosphere;
  WhiteningModel whitening;  // fit on the noisy cube (outlier fraction 0.2)
};

/// Background pixels are propagated mixtures of 2-4 library materials at
/// full strength plus i.i.d. Gaussian sensor noise; a seeded subset of
/// pixels additionally receives a library target at strength
/// alpha ~ U[alpha_lo, alpha_hi]. Deterministic per (spec, seed).
SceneBuild build_scene(const SyntheticSceneSpec& spec, const std::vector<LibraryEntry>& library,
                       std::uint64_t seed, const std::string& cube_id);

}  // namespace specret
