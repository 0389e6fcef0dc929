#include "specret/synth.hpp"

#include <cmath>

#include "specret/clamp.hpp"
#include "specret/planck.hpp"
#include "specret/rng.hpp"

namespace specret {

AtmosphereParams atmosphere_from_temperature(const WavelengthGrid& grid, Vec tau, Vec up,
                                             Vec down, double temperature_K) {
  return AtmosphereParams(grid, std::move(tau), std::move(up), std::move(down),
                          planck_curve(grid, temperature_K), temperature_K);
}

namespace {

constexpr std::uint64_t kAtmTag = 0xa73;
constexpr std::uint64_t kLibTag = 0x11b;
constexpr std::uint64_t kSceneTag = 0x5ce;

}  // namespace

AtmosphereParams gen_atmosphere(const WavelengthGrid& grid, double temperature_K,
                                std::uint64_t seed, bool transparent_override) {
  require(temperature_K > 0.0, "gen_atmosphere: temperature must be positive");
  const int r = grid.size();
  Rng rng(derive_seed(seed, {kAtmTag}));

  Vec tau;
  if (transparent_override) {
    tau = Vec::Ones(r);
  } else {
    // Smooth base transmission plus Gaussian absorption notches; the deepest
    // notch sits near the low-wavelength edge.
    const Vec base = sample_gp(grid, Matern52Params{1.0, 2.0}, rng.next_u64());
    Vec raw = (0.78 + 0.12 * base.array()).matrix();

    const double span = grid.lambda_max() - grid.lambda_min();
    auto notch = [&](double center, double width, double depth) {
      for (int i = 0; i < r; ++i) {
        const double d = (grid.lambda(i) - center) / width;
        raw[i] -= depth * std::exp(-0.5 * d * d);
      }
    };
    notch(grid.lambda_min() + rng.uniform(0.02, 0.08) * span, rng.uniform(0.15, 0.4),
          rng.uniform(0.5, 0.9));
    const int extra = 2 + static_cast<int>(rng.uniform_index(4));  // 2..5 notches
    for (int k = 0; k < extra; ++k) {
      notch(rng.uniform(grid.lambda_min(), grid.lambda_max()), rng.uniform(0.05, 0.4),
            rng.uniform(0.1, 0.6));
    }
    tau = softclamp(raw, 0.0, 1.0);
  }

  const double t_atm = temperature_K - rng.uniform(0.0, 30.0);
  const double c_u = rng.uniform(0.3, 1.0);
  const double c_d = rng.uniform(0.3, 1.0);
  const Vec air = planck_curve(grid, t_atm);
  const Vec one_minus_tau = (1.0 - tau.array()).matrix();
  Vec up = c_u * one_minus_tau.cwiseProduct(air);
  Vec down = c_d * one_minus_tau.cwiseProduct(air);
  return atmosphere_from_temperature(grid, std::move(tau), std::move(up), std::move(down),
                                     temperature_K);
}

std::vector<LibraryEntry> gen_library(int m, const WavelengthGrid& grid, std::uint64_t seed) {
  require(m >= 1, "gen_library: m must be >= 1");
  std::vector<LibraryEntry> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, {kLibTag, static_cast<std::uint64_t>(i)}));
    const double base_mean = rng.uniform(0.7, 0.98);
    const double sdev = std::exp(rng.uniform(std::log(0.002), std::log(0.15)));
    const double ell = std::exp(rng.uniform(std::log(0.5), std::log(2000.0)));
    const Vec draw = sample_gp(grid, Matern52Params{sdev * sdev, ell}, rng.next_u64());
    char name[16];
    std::snprintf(name, sizeof(name), "mat-%04d", i);
    out.push_back(LibraryEntry{
        name, EmissivitySpectrum(grid, softclamp((base_mean + draw.array()).matrix(), 0.0, 1.0))});
  }
  return out;
}

void SyntheticSceneSpec::validate() const {
  require(n_cubes >= 0, "scene spec: n_cubes must be >= 0");
  require(cube_width > 0 && cube_height > 0, "scene spec: cube dimensions must be positive");
  require(n_bands >= 2, "scene spec: n_bands must be >= 2");
  require(temperature_lo_K > 0 && temperature_hi_K >= temperature_lo_K,
          "scene spec: temperature range invalid");
  require(alpha_lo >= 0.0 && alpha_hi <= 1.0 && alpha_lo <= alpha_hi,
          "scene spec: alpha range must lie within [0, 1]");
  require(library_size >= 1, "scene spec: library_size must be >= 1");
  require(injection_fraction >= 0.0 && injection_fraction <= 1.0,
          "scene spec: injection_fraction must lie in [0, 1]");
  require(sensor_noise_frac >= 0.0, "scene spec: sensor_noise_frac must be >= 0");
}

SceneBuild build_scene(const SyntheticSceneSpec& spec, const std::vector<LibraryEntry>& library,
                       std::uint64_t seed, const std::string& cube_id) {
  spec.validate();
  require(!library.empty(), "build_scene: library must be nonempty");
  const WavelengthGrid grid = WavelengthGrid::lwir(spec.n_bands);
  for (const auto& e : library) {
    require(e.emissivity.grid == grid, "build_scene: library grid mismatch");
  }

  Rng rng(derive_seed(seed, {kSceneTag}));
  const double temperature =
      rng.uniform(spec.temperature_lo_K, spec.temperature_hi_K);
  const AtmosphereParams atm = gen_atmosphere(grid, temperature, rng.next_u64());

  const int n_pixels = spec.cube_width * spec.cube_height;
  const int r = grid.size();

  // Background: per-pixel convex mixtures of 2-4 library materials, fully
  // propagated (alpha = 1 means the mixture IS the scene surface).
  const int n_bg = 2 + static_cast<int>(rng.uniform_index(3));
  std::vector<int> bg_idx = rng.sample_without_replacement(
      static_cast<int>(library.size()), std::min<int>(n_bg, static_cast<int>(library.size())));
  Mat bg_radiance(n_pixels, r);  // noiseless background radiance per pixel
  {
    Mat bg_curves(static_cast<int>(bg_idx.size()), r);
    for (std::size_t i = 0; i < bg_idx.size(); ++i) {
      const auto lt = target_radiance(library[static_cast<std::size_t>(bg_idx[i])].emissivity, atm);
      bg_curves.row(static_cast<Eigen::Index>(i)) = lt.values.transpose();
    }
    for (int p = 0; p < n_pixels; ++p) {
      Vec w(static_cast<int>(bg_idx.size()));
      for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform();
      w /= w.sum();
      bg_radiance.row(p) = (w.transpose() * bg_curves);
    }
  }

  // Injected targets.
  const int n_inject = static_cast<int>(std::lround(spec.injection_fraction * n_pixels));
  std::vector<int> inject_pixels = rng.sample_without_replacement(n_pixels, n_inject);
  struct Injection {
    int pixel;
    int entry;
    double alpha;
  };
  std::vector<Injection> injections;
  injections.reserve(inject_pixels.size());
  for (const int p : inject_pixels) {
    const int entry = static_cast<int>(rng.uniform_index(library.size()));
    const double alpha = rng.uniform(spec.alpha_lo, spec.alpha_hi);
    injections.push_back(Injection{p, entry, alpha});
  }

  // Noiseless cube, then additive sensor noise scaled to the cube mean.
  Mat noiseless = bg_radiance;
  for (const auto& inj : injections) {
    const RadianceSpectrum bg(grid, bg_radiance.row(inj.pixel).transpose());
    const auto mixed = propagate(library[static_cast<std::size_t>(inj.entry)].emissivity, atm,
                                 inj.alpha, bg);
    noiseless.row(inj.pixel) = mixed.values.transpose();
  }
  const double noise_sdev = spec.sensor_noise_frac * noiseless.mean();
  Mat noisy = noiseless;
  for (int p = 0; p < n_pixels; ++p) {
    for (int j = 0; j < r; ++j) noisy(p, j) += noise_sdev * rng.normal();
  }

  HsiCube cube(spec.cube_width, spec.cube_height, grid, noisy);
  cube.id = cube_id;

  const WhiteningModel whitening = fit_whitening(noisy, 0.2);

  std::vector<TrainingExample> examples;
  examples.reserve(injections.size());
  for (const auto& inj : injections) {
    const auto& entry = library[static_cast<std::size_t>(inj.entry)];
    RadianceSpectrum bg(grid, bg_radiance.row(inj.pixel).transpose());
    RadianceSpectrum radiance(grid, noiseless.row(inj.pixel).transpose());
    // Construction invariant: the stored radiance must be the propagated one.
    const auto check = propagate(entry.emissivity, atm, inj.alpha, bg);
    require((check.values - radiance.values).cwiseAbs().maxCoeff() < 1e-10,
            "build_scene: training example failed its re-propagation check");
    RadianceSpectrum whitened(grid, whiten(radiance.values, whitening));
    examples.push_back(TrainingExample{std::move(radiance), std::move(whitened),
                                       entry.emissivity, normalize(entry.emissivity), inj.alpha,
                                       cube_id, cube_id, entry.name, inj.pixel, std::move(bg)});
  }

  return SceneBuild{std::move(cube), std::move(examples), atm, whitening};
}

}  // namespace specret
