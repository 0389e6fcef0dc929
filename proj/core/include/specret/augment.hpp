#pragma once

#include <cstdint>

#include "specret/gp.hpp"
#include "specret/spectrum.hpp"

namespace specret {

/// An augmented emissivity and its re-normalized shape.
struct AugmentedEmissivity {
  EmissivitySpectrum scaled;
  NormalizedEmissivity normalized;
};

/// Perturbs the shape of an emissivity spectrum while preserving its scale
/// statistics: z-score, add a GP draw, rescale by the original (mean, sdev),
/// clamp softly into [0, 1], and re-normalize the result. Used to present a
/// fresh variant of every training spectrum each epoch.
AugmentedEmissivity augment_emissivity(const EmissivitySpectrum& eps, const Matern52Params& p,
                                       std::uint64_t seed);

/// Same pipeline with a caller-owned sampler so the Cholesky factor is
/// computed once per (grid, params) rather than per call.
AugmentedEmissivity augment_emissivity(const EmissivitySpectrum& eps, const GpSampler& sampler,
                                       std::uint64_t seed);

}  // namespace specret
