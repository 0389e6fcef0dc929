#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "specret/clamp.hpp"
#include "specret/forward_model.hpp"
#include "specret/grid.hpp"
#include "specret/planck.hpp"
#include "specret/rng.hpp"
#include "specret/spectrum.hpp"

using namespace specret;

namespace {

WavelengthGrid small_grid() { return WavelengthGrid(7.56, 13.16, 16); }

AtmosphereParams random_atmosphere(const WavelengthGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  const auto r = grid.size();
  Vec tau(r), lu(r), ld(r);
  for (int i = 0; i < r; ++i) {
    tau[i] = rng.uniform(0.3, 0.99);
    lu[i] = rng.uniform(0.0, 300.0);
    ld[i] = rng.uniform(0.0, 400.0);
  }
  const double temperature = rng.uniform(280.0, 320.0);
  return AtmosphereParams(grid, tau, lu, ld, planck_curve(grid, temperature), temperature);
}

EmissivitySpectrum random_emissivity(const WavelengthGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(0.05, 0.95);
  return EmissivitySpectrum(grid, v);
}

}  // namespace

TEST_CASE("wavelength grid endpoints and spacing") {
  const WavelengthGrid grid(7.56, 13.16, 128);
  REQUIRE(grid.size() == 128);
  REQUIRE(grid.lambda(0) == 7.56);
  REQUIRE(grid.lambda(127) == 13.16);
  const double step = grid.lambda(1) - grid.lambda(0);
  for (int i = 1; i + 1 < 128; ++i) {
    REQUIRE(grid.lambda(i + 1) - grid.lambda(i) == Catch::Approx(step).epsilon(1e-12));
  }
  REQUIRE_THROWS_AS(WavelengthGrid(2.0, 1.0, 8), DomainError);
  REQUIRE_THROWS_AS(WavelengthGrid(1.0, 2.0, 1), DomainError);
}

TEST_CASE("softclamp is identity away from the edges") {
  REQUIRE(softclamp(0.5, 0.0, 1.0) == 0.5);
  REQUIRE(softclamp(0.1, 0.0, 1.0) == 0.1);
  REQUIRE(softclamp(0.9, 0.0, 1.0) == 0.9);
  REQUIRE(softclamp(3.0, -5.0, 11.0) == 3.0);
  // Midpoint is exact, per the map's symmetry.
  REQUIRE(softclamp(0.5, 0.0, 1.0) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("softclamp saturates into the open interval") {
  const double low = softclamp(-100.0, 0.0, 1.0);
  REQUIRE(low > 0.0);
  REQUIRE(low < 1e-6);
  const double high = softclamp(+100.0, 0.0, 1.0);
  REQUIRE(high < 1.0);
  REQUIRE(high > 1.0 - 1e-6);
}

TEST_CASE("softclamp is strictly monotone over random pairs") {
  Rng rng(0xc1a3u);
  for (int t = 0; t < 1000; ++t) {
    const double lo = rng.uniform(-2.0, 0.5);
    const double hi = lo + rng.uniform(0.5, 3.0);
    const double w = hi - lo;
    double x1 = rng.uniform(lo - 2.0 * w, hi + 2.0 * w);
    double x2 = rng.uniform(lo - 2.0 * w, hi + 2.0 * w);
    if (std::abs(x1 - x2) < 0.01) continue;
    if (x1 > x2) std::swap(x1, x2);
    REQUIRE(softclamp(x1, lo, hi) < softclamp(x2, lo, hi));
  }
  REQUIRE_THROWS_AS(softclamp(0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("softclamp derivative matches finite differences") {
  Rng rng(0xd11fu);
  for (int t = 0; t < 200; ++t) {
    const double x = rng.uniform(-0.1, 1.1);
    const double h = 1e-7;
    const double fd = (softclamp(x + h, 0.0, 1.0) - softclamp(x - h, 0.0, 1.0)) / (2 * h);
    REQUIRE(softclamp_deriv(x, 0.0, 1.0) == Catch::Approx(fd).margin(2e-5));
  }
}

TEST_CASE("normalize produces zero mean unit sdev and round-trips") {
  const auto grid = WavelengthGrid(7.56, 13.16, 128);
  Vec ramp(128);
  for (int i = 0; i < 128; ++i) ramp[i] = 0.2 + 0.6 * i / 127.0;
  const auto ne = normalize(EmissivitySpectrum(grid, ramp));
  REQUIRE(!ne.is_constant);
  REQUIRE(std::abs(sample_mean(ne.values)) < 1e-12);
  REQUIRE(sample_sdev(ne.values) == Catch::Approx(1.0).epsilon(1e-12));

  const auto back = denormalize(ne);
  for (int i = 0; i < 128; ++i) {
    REQUIRE(back.values[i] == Catch::Approx(ramp[i]).margin(1e-12));
  }
}

TEST_CASE("normalize flags constant spectra") {
  const auto grid = small_grid();
  const auto ne = normalize(EmissivitySpectrum(grid, Vec::Constant(grid.size(), 0.9)));
  REQUIRE(ne.is_constant);
  REQUIRE(ne.sdev == 0.0);
  REQUIRE(ne.mean == Catch::Approx(0.9).margin(1e-15));
  REQUIRE(ne.values.cwiseAbs().maxCoeff() == 0.0);
  const auto back = denormalize(ne);
  for (Eigen::Index i = 0; i < back.values.size(); ++i) {
    REQUIRE(back.values[i] == Catch::Approx(0.9).margin(1e-12));
  }
}

TEST_CASE("normalize round trip across random spectra") {
  const auto grid = WavelengthGrid(7.56, 13.16, 64);
  Rng rng(0x77u);
  for (int t = 0; t < 100; ++t) {
    Vec v(64);
    for (int i = 0; i < 64; ++i) v[i] = rng.uniform(0.05, 0.95);
    const EmissivitySpectrum eps(grid, v);
    const auto back = denormalize(normalize(eps));
    REQUIRE((back.values - v).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("planck radiance magnitudes and monotonicity") {
  // 300 K at 10 um, in microflicks; cross-checked against the high-precision
  // oracle in the acceptance suite.
  const double v = planck_microflick(10.0, 300.0);
  REQUIRE(v == Catch::Approx(991.72).epsilon(1e-3));

  REQUIRE(planck_microflick(10.0, 1.0) < 1e-100);

  const auto grid = WavelengthGrid(7.56, 13.16, 128);
  const Vec cold = planck_curve(grid, 300.0);
  const Vec hot = planck_curve(grid, 310.0);
  for (int i = 0; i < 128; ++i) REQUIRE(hot[i] > cold[i]);

  REQUIRE_THROWS_AS(planck_microflick(10.0, -1.0), DomainError);
  REQUIRE_THROWS_AS(planck_microflick(0.0, 300.0), DomainError);
}

TEST_CASE("planck curve has at most one interior extremum over LWIR") {
  const auto grid = WavelengthGrid(7.56, 13.16, 128);
  for (double t : {280.0, 290.0, 300.0, 310.0, 320.0}) {
    const Vec curve = planck_curve(grid, t);
    int sign_changes = 0;
    double prev = curve[1] - curve[0];
    for (int i = 2; i < 128; ++i) {
      const double d = curve[i] - curve[i - 1];
      if ((d > 0) != (prev > 0)) ++sign_changes;
      prev = d;
    }
    REQUIRE(sign_changes <= 1);
  }
}

TEST_CASE("planck temperature fit recovers the generating temperature") {
  const auto grid = WavelengthGrid(7.56, 13.16, 64);
  for (double t : {285.0, 300.0, 317.5}) {
    const Vec curve = planck_curve(grid, t);
    REQUIRE(fit_planck_temperature(grid, curve) == Catch::Approx(t).margin(1e-3));
  }
}

TEST_CASE("target radiance identities") {
  const auto grid = small_grid();
  const auto atm = random_atmosphere(grid, 0xa1u);
  const auto r = grid.size();

  // Opaque atmosphere: only upwelling survives.
  AtmosphereParams opaque(grid, Vec::Zero(r), atm.upwelling, atm.downwelling, atm.blackbody,
                          atm.temperature_K);
  const auto lt0 = target_radiance(random_emissivity(grid, 1u), opaque);
  REQUIRE((lt0.values - opaque.upwelling).cwiseAbs().maxCoeff() == 0.0);

  // Direct substitution at eps = 0.5, tau = 1, Lu = 0.
  AtmosphereParams clear(grid, Vec::Ones(r), Vec::Zero(r), atm.downwelling, atm.blackbody,
                         atm.temperature_K);
  const auto lt_half =
      target_radiance(EmissivitySpectrum(grid, Vec::Constant(r, 0.5)), clear);
  const Vec expect = 0.5 * (clear.blackbody + clear.downwelling);
  REQUIRE((lt_half.values - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("target radiance matches a scalar loop") {
  const auto grid = small_grid();
  const auto atm = random_atmosphere(grid, 0xa2u);
  const auto eps = random_emissivity(grid, 0xa3u);
  const auto lt = target_radiance(eps, atm);
  for (int j = 0; j < grid.size(); ++j) {
    const double expect =
        atm.tau[j] * (eps.values[j] * atm.blackbody[j] + (1.0 - eps.values[j]) * atm.downwelling[j]) +
        atm.upwelling[j];
    REQUIRE(std::abs(lt.values[j] - expect) < 1e-14);
  }
}

TEST_CASE("propagate blends target and background affinely") {
  const auto grid = small_grid();
  const auto atm = random_atmosphere(grid, 0xb1u);
  const auto eps = random_emissivity(grid, 0xb2u);
  Rng rng(0xb3u);
  Vec bg(grid.size());
  for (Eigen::Index i = 0; i < bg.size(); ++i) bg[i] = rng.uniform(100.0, 900.0);
  const RadianceSpectrum background(grid, bg);

  const auto at_zero = propagate(eps, atm, 0.0, background);
  REQUIRE((at_zero.values - bg).cwiseAbs().maxCoeff() == 0.0);

  const auto lt = target_radiance(eps, atm);
  const auto at_one = propagate(eps, atm, 1.0, background);
  REQUIRE((at_one.values - lt.values).cwiseAbs().maxCoeff() < 1e-14);

  for (int t = 0; t < 20; ++t) {
    const double alpha = rng.uniform();
    const auto mix = propagate(eps, atm, alpha, background);
    const Vec expect = alpha * lt.values + (1.0 - alpha) * bg;
    REQUIRE((mix.values - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  REQUIRE_THROWS_AS(propagate(eps, atm, 1.5, background), DomainError);
}

TEST_CASE("perfect emitter and perfect reflector") {
  const auto grid = small_grid();
  const auto atm = random_atmosphere(grid, 0xc1u);
  const auto r = grid.size();
  Rng rng(0xc2u);
  Vec bgv(r);
  for (int i = 0; i < r; ++i) bgv[i] = rng.uniform(100.0, 900.0);
  const RadianceSpectrum bg(grid, bgv);

  const auto emitter = propagate(EmissivitySpectrum(grid, Vec::Ones(r)), atm, 1.0, bg);
  const Vec expect_emit = atm.tau.cwiseProduct(atm.blackbody) + atm.upwelling;
  REQUIRE((emitter.values - expect_emit).cwiseAbs().maxCoeff() < 1e-12);

  const auto reflector = propagate(EmissivitySpectrum(grid, Vec::Zero(r)), atm, 1.0, bg);
  const Vec expect_refl = atm.tau.cwiseProduct(atm.downwelling) + atm.upwelling;
  REQUIRE((reflector.values - expect_refl).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("emissivity monotonicity direction follows blackbody vs downwelling") {
  const auto grid = small_grid();
  const auto atm = random_atmosphere(grid, 0xd1u);
  auto eps = random_emissivity(grid, 0xd2u);
  const auto base = target_radiance(eps, atm);
  Vec bumped = eps.values;
  const int j = 4;
  bumped[j] += 0.01;
  const auto after = target_radiance(EmissivitySpectrum(grid, bumped), atm);
  if (atm.blackbody[j] > atm.downwelling[j]) {
    REQUIRE(after.values[j] > base.values[j]);
  } else {
    REQUIRE(after.values[j] < base.values[j]);
  }
}

TEST_CASE("atmosphere validation") {
  const auto grid = small_grid();
  const auto r = grid.size();
  REQUIRE_THROWS_AS(AtmosphereParams(grid, Vec::Constant(r, 1.5), Vec::Zero(r), Vec::Zero(r),
                                     Vec::Ones(r), 300.0),
                    DomainError);
  REQUIRE_THROWS_AS(AtmosphereParams(grid, Vec::Ones(r), Vec::Constant(r, -1.0), Vec::Zero(r),
                                     Vec::Ones(r), 300.0),
                    DomainError);
  REQUIRE_THROWS_AS(AtmosphereParams(grid, Vec::Ones(r), Vec::Zero(r), Vec::Zero(r), Vec::Ones(r),
                                     -5.0),
                    DomainError);
}
