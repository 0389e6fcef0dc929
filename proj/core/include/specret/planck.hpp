#pragma once

#include "specret/common.hpp"
#include "specret/grid.hpp"

namespace specret {

// CODATA 2018 exact values.
inline constexpr double kPlanckH = 6.62607015e-34;   // J s
inline constexpr double kLightC = 299792458.0;       // m / s
inline constexpr double kBoltzmannK = 1.380649e-23;  // J / K

/// Planck spectral radiance at wavelength `lambda_um` (micrometers) and
/// temperature `T_K` (kelvin), in microflicks.
///
/// B_lambda = (2 h c^2 / lambda^5) / (exp(h c / (lambda k T)) - 1), evaluated
/// in SI (W m^-2 sr^-1 m^-1) and converted to microflicks by the factor 1e-4
/// (1e-10 from per-m^2-per-m to per-cm^2-per-um, divided by 1e-6 per uf).
/// See docs/units.md for the conversion table.
double planck_microflick(double lambda_um, double T_K);

/// Planck curve over a wavelength grid, in microflicks.
Vec planck_curve(const WavelengthGrid& grid, double T_K);

/// Scene temperature that best reproduces `curve` in least squares over
/// [T_lo, T_hi]; used to label predicted blackbody curves with a temperature.
double fit_planck_temperature(const WavelengthGrid& grid, const Vec& curve,
                              double T_lo = 150.0, double T_hi = 500.0);

}  // namespace specret
