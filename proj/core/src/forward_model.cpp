#include "specret/forward_model.hpp"

#include <cmath>

namespace specret {

RadianceSpectrum target_radiance(const EmissivitySpectrum& eps, const AtmosphereParams& atm) {
  require_same_grid(eps.grid, atm.grid, "target_radiance");
  const auto& e = eps.values.array();
  Vec out = (atm.tau.array() * (e * atm.blackbody.array() + (1.0 - e) * atm.downwelling.array()) +
             atm.upwelling.array())
                .matrix();
  return RadianceSpectrum(eps.grid, std::move(out));
}

RadianceSpectrum propagate(const EmissivitySpectrum& eps, const AtmosphereParams& atm,
                           double alpha, const RadianceSpectrum& bg) {
  require_same_grid(eps.grid, bg.grid, "propagate");
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0,
          "propagate: alpha must lie in [0, 1]");
  const RadianceSpectrum lt = target_radiance(eps, atm);
  Vec out = (alpha * lt.values.array() + (1.0 - alpha) * bg.values.array()).matrix();
  return RadianceSpectrum(eps.grid, std::move(out));
}

RadianceSpectrum propagate(const EmissivitySpectrum& eps, const AtmosphereParams& atm,
                           double alpha) {
  const RadianceSpectrum zero_bg(eps.grid, Vec::Zero(eps.size()));
  return propagate(eps, atm, alpha, zero_bg);
}

}  // namespace specret
