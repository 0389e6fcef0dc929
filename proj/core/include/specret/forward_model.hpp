#pragma once

#include "specret/common.hpp"
#include "specret/spectrum.hpp"

namespace specret {

/// At-sensor radiance of a pure target pixel:
///   tau * (eps * B + (1 - eps) * L_down) + L_up
/// The (1 - eps) term is the reflected sky contribution of an opaque
/// surface (reflectivity = 1 - emissivity).
RadianceSpectrum target_radiance(const EmissivitySpectrum& eps, const AtmosphereParams& atm);

/// At-sensor radiance of a mixed pixel: the target signature at strength
/// `alpha` blended with the pixel's background radiance.
///   alpha * target_radiance(eps, atm) + (1 - alpha) * bg
RadianceSpectrum propagate(const EmissivitySpectrum& eps, const AtmosphereParams& atm,
                           double alpha, const RadianceSpectrum& bg);

/// propagate() with a zero background; convenient for alpha = 1 call sites.
RadianceSpectrum propagate(const EmissivitySpectrum& eps, const AtmosphereParams& atm,
                           double alpha);

}  // namespace specret
