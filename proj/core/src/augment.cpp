#include "specret/augment.hpp"

#include "specret/clamp.hpp"

namespace specret {

AugmentedEmissivity augment_emissivity(const EmissivitySpectrum& eps, const GpSampler& sampler,
                                       std::uint64_t seed) {
  const NormalizedEmissivity base = normalize(eps);
  const Vec draw = sampler.sample(seed);
  if (draw.size() != eps.values.size()) {
    throw ShapeError("augment_emissivity: sampler grid does not match spectrum");
  }
  const Vec shape_star = base.values + draw;
  const Vec raw = (shape_star.array() * base.sdev + base.mean).matrix();
  EmissivitySpectrum scaled(eps.grid, softclamp(raw, 0.0, 1.0));
  NormalizedEmissivity renorm = normalize(scaled);
  return AugmentedEmissivity{std::move(scaled), std::move(renorm)};
}

AugmentedEmissivity augment_emissivity(const EmissivitySpectrum& eps, const Matern52Params& p,
                                       std::uint64_t seed) {
  GpSampler sampler(eps.grid, p);
  return augment_emissivity(eps, sampler, seed);
}

}  // namespace specret
