#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "specret/augment.hpp"
#include "specret/dataset.hpp"
#include "specret/gp.hpp"
#include "specret/planck.hpp"
#include "specret/rng.hpp"
#include "specret/synth.hpp"
#include "testutil.hpp"

using namespace specret;

TEST_CASE("matern52 kernel values") {
  Matern52Params p{2.5, 0.7};
  REQUIRE(matern52(0.0, p) == 2.5);
  REQUIRE(matern52(100.0 * p.lengthscale, p) < 1e-30 * p.variance);
  // k(l) = sigma^2 (1 + sqrt5 + 5/3) exp(-sqrt5), evaluated symbolically.
  const double expect = 2.5 * (1.0 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0));
  REQUIRE(matern52(p.lengthscale, p) == Catch::Approx(expect).epsilon(1e-12));

  const WavelengthGrid grid(8.0, 12.0, 16);
  const Mat k = matern52_covariance(grid, p);
  REQUIRE((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 16; ++i) REQUIRE(k(i, i) == 2.5);
}

TEST_CASE("gp draws are deterministic and match the kernel in aggregate") {
  const WavelengthGrid grid(8.0, 12.0, 8);
  const Matern52Params p{1.0, 0.5};
  REQUIRE((sample_gp(grid, p, 42u) - sample_gp(grid, p, 42u)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((sample_gp(grid, p, 42u) - sample_gp(grid, p, 43u)).cwiseAbs().maxCoeff() > 0.0);

  // Degenerate variance: draws collapse to zero.
  const Vec tiny = sample_gp(grid, Matern52Params{1e-30, 0.5}, 7u);
  REQUIRE(tiny.cwiseAbs().maxCoeff() < 1e-10);

  // Monte-Carlo covariance vs the analytic kernel.
  const int n = 20000;
  GpSampler sampler(grid, p);
  Mat draws(n, 8);
  for (int i = 0; i < n; ++i) draws.row(i) = sampler.sample(1000u + i).transpose();
  const Mat centered = draws.rowwise() - draws.colwise().mean();
  const Mat emp = centered.transpose() * centered / double(n - 1);
  const Mat k = matern52_covariance(grid, p);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (std::abs(k(i, j)) > 0.1) {
        REQUIRE(std::abs(emp(i, j) - k(i, j)) < 0.05);
      }
    }
  }
}

TEST_CASE("augmentation limits and statistics propagation") {
  const WavelengthGrid grid = WavelengthGrid::lwir(64);
  Rng rng(3u);
  Vec base(64);
  for (int i = 0; i < 64; ++i) base[i] = 0.55 + 0.25 * std::sin(0.4 * i) + 0.02 * rng.normal();
  const EmissivitySpectrum eps(grid, base);

  // Near-zero GP variance: augmentation is the identity up to the soft clamp.
  const auto still = augment_emissivity(eps, Matern52Params{1e-30, 0.4}, 5u);
  REQUIRE((still.scaled.values - base).cwiseAbs().maxCoeff() < 1e-6);

  // Mean preservation: the pipeline shifts the mean by at most
  // |mean(draw)| * sdev (plus clamping, which stays clear of this spectrum).
  const Matern52Params p{1.0, 0.4};
  const auto aug = augment_emissivity(eps, p, 11u);
  const Vec draw = sample_gp(grid, p, 11u);
  const double mean_before = sample_mean(base);
  const double sdev_before = sample_sdev(base);
  const double mean_after = sample_mean(aug.scaled.values);
  REQUIRE(std::abs(mean_after - mean_before) <=
          std::abs(sample_mean(draw)) * sdev_before + 1e-12);

  // Values always stay within [0, 1], even for wild draws.
  for (int t = 0; t < 200; ++t) {
    const auto a = augment_emissivity(eps, Matern52Params{4.0, 0.3}, 100u + t);
    REQUIRE(a.scaled.values.minCoeff() >= 0.0);
    REQUIRE(a.scaled.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("augmenting a constant spectrum suppresses the perturbation") {
  const WavelengthGrid grid = WavelengthGrid::lwir(16);
  const EmissivitySpectrum flat(grid, Vec::Constant(16, 0.8));
  const auto aug = augment_emissivity(flat, Matern52Params{1.0, 0.4}, 9u);
  REQUIRE(aug.normalized.is_constant);
  REQUIRE((aug.scaled.values.array() - 0.8).abs().maxCoeff() < 1e-9);
}

TEST_CASE("augmentation preserves the mean and sdev distributions") {
  const WavelengthGrid grid = WavelengthGrid::lwir(64);
  const Matern52Params p{1.0, 0.4};
  GpSampler sampler(grid, p);

  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    const auto library = gen_library(1024, grid, derive_seed(0xdecadeu, {trial}));
    std::vector<double> means_before, means_after, sdevs_before, sdevs_after;
    for (std::size_t i = 0; i < library.size(); ++i) {
      const auto& eps = library[i].emissivity;
      const auto aug = augment_emissivity(eps, sampler, derive_seed(0xfeedu, {trial, i}));
      means_before.push_back(sample_mean(eps.values));
      sdevs_before.push_back(sample_sdev(eps.values));
      means_after.push_back(sample_mean(aug.scaled.values));
      sdevs_after.push_back(sample_sdev(aug.scaled.values));
      REQUIRE(aug.scaled.values.minCoeff() >= 0.0);
      REQUIRE(aug.scaled.values.maxCoeff() <= 1.0);
    }
    const double ks_mean = testutil::ks_statistic(means_before, means_after);
    const double ks_sdev = testutil::ks_statistic(sdevs_before, sdevs_after);
    INFO("trial " << trial << ": KS(means) = " << ks_mean << ", KS(sdevs) = " << ks_sdev);
    REQUIRE(ks_mean < 0.08);
    REQUIRE(ks_sdev < 0.08);
  }
}

TEST_CASE("generated atmospheres satisfy their contracts") {
  const WavelengthGrid grid = WavelengthGrid::lwir(48);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto atm = gen_atmosphere(grid, 300.0, seed);
    REQUIRE(atm.tau.minCoeff() >= 0.0);
    REQUIRE(atm.tau.maxCoeff() <= 1.0);
    REQUIRE(atm.upwelling.minCoeff() >= 0.0);
    REQUIRE(atm.downwelling.minCoeff() >= 0.0);
    REQUIRE((atm.blackbody - planck_curve(grid, 300.0)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(atm.temperature_K == 300.0);
  }

  // Determinism.
  const auto a = gen_atmosphere(grid, 295.0, 77u);
  const auto b = gen_atmosphere(grid, 295.0, 77u);
  REQUIRE((a.tau - b.tau).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.upwelling - b.upwelling).cwiseAbs().maxCoeff() == 0.0);

  // Transparent override: no path radiance at all.
  const auto clear = gen_atmosphere(grid, 300.0, 5u, true);
  REQUIRE((clear.tau.array() == 1.0).all());
  REQUIRE(clear.upwelling.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(clear.downwelling.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generated libraries are bounded, named, and skewed smooth") {
  const WavelengthGrid grid = WavelengthGrid::lwir(32);
  const auto one = gen_library(1, grid, 9u);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].name == "mat-0000");
  REQUIRE(one[0].emissivity.values.minCoeff() >= 0.0);
  REQUIRE(one[0].emissivity.values.maxCoeff() <= 1.0);

  const auto lib = gen_library(1024, grid, 10u);
  int low_sdev = 0;
  for (const auto& e : lib) {
    if (sample_sdev(e.emissivity.values) < 0.02) ++low_sdev;
  }
  REQUIRE(static_cast<double>(low_sdev) / 1024.0 > 0.5);

  const auto again = gen_library(4, grid, 10u);
  for (int i = 0; i < 4; ++i) {
    REQUIRE((again[i].emissivity.values - lib[i].emissivity.values).cwiseAbs().maxCoeff() ==
            0.0);
  }
}

TEST_CASE("scene construction invariants") {
  SyntheticSceneSpec spec;
  spec.cube_width = 16;
  spec.cube_height = 16;
  spec.n_bands = 24;
  spec.library_size = 16;
  spec.injection_fraction = 0.1;
  spec.seed = 0x5ceeduLL;
  const WavelengthGrid grid = WavelengthGrid::lwir(spec.n_bands);
  const auto library = gen_library(spec.library_size, grid, 0xabUL);

  const auto scene = build_scene(spec, library, 1234u, "cube-0000");
  REQUIRE(scene.cube.id == "cube-0000");
  REQUIRE(static_cast<int>(scene.examples.size()) ==
          static_cast<int>(std::lround(0.1 * 16 * 16)));

  const Mat flat = flatten(scene.cube);
  const double noise_sdev = spec.sensor_noise_frac * flat.mean();
  for (const auto& ex : scene.examples) {
    REQUIRE(ex.alpha >= spec.alpha_lo);
    REQUIRE(ex.alpha <= spec.alpha_hi);
    // Stored radiance is exactly the propagated one.
    const auto again = propagate(ex.emissivity, scene.atmosphere, ex.alpha, ex.background);
    REQUIRE((again.values - ex.radiance.values).cwiseAbs().maxCoeff() < 1e-10);
    // The cube pixel is that radiance plus bounded sensor noise.
    const Vec pixel = flat.row(ex.pixel_index).transpose();
    REQUIRE((pixel - ex.radiance.values).cwiseAbs().maxCoeff() < 8.0 * noise_sdev);
    // Whitened form consistent with the scene's whitening model.
    REQUIRE((ex.whitened.values - whiten(ex.radiance.values, scene.whitening))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }

  // Determinism: full replay produces identical bytes.
  const auto replay = build_scene(spec, library, 1234u, "cube-0000");
  REQUIRE((flatten(replay.cube) - flat).cwiseAbs().maxCoeff() == 0.0);

  // No injections -> no examples.
  SyntheticSceneSpec none = spec;
  none.injection_fraction = 0.0;
  const auto empty_scene = build_scene(none, library, 99u, "cube-none");
  REQUIRE(empty_scene.examples.empty());
}

TEST_CASE("library and scene files round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "specret_dataset_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const WavelengthGrid grid = WavelengthGrid::lwir(20);
  const auto library = gen_library(8, grid, 3u);
  const auto lib_path = (dir / "library.json").string();
  write_library(lib_path, library, grid);
  const auto lib_back = read_library(lib_path);
  REQUIRE(lib_back.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    REQUIRE(lib_back[i].name == library[i].name);
    REQUIRE((lib_back[i].emissivity.values - library[i].emissivity.values)
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }

  SyntheticSceneSpec spec;
  spec.cube_width = 12;
  spec.cube_height = 10;
  spec.n_bands = 20;
  spec.library_size = 8;
  spec.injection_fraction = 0.2;
  const auto scene = build_scene(spec, library, 17u, "cube-rt");
  const auto paths = write_scene(dir.string(), scene);
  REQUIRE(paths.size() == 2);

  const auto record = read_scene(paths[0]);
  REQUIRE(record.cube.id == "cube-rt");
  REQUIRE(record.cube.grid() == grid);
  REQUIRE((record.atmosphere.tau - scene.atmosphere.tau).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((record.atmosphere.blackbody - scene.atmosphere.blackbody).cwiseAbs().maxCoeff() ==
          0.0);
  REQUIRE(record.atmosphere.temperature_K == scene.atmosphere.temperature_K);
  REQUIRE(record.examples.size() == scene.examples.size());
  for (std::size_t i = 0; i < record.examples.size(); ++i) {
    const auto& got = record.examples[i];
    const auto& want = scene.examples[i];
    REQUIRE(got.pixel_index == want.pixel_index);
    REQUIRE(got.entry_name == want.entry_name);
    REQUIRE(got.alpha == want.alpha);
    REQUIRE((got.emissivity.values - want.emissivity.values).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((got.background.values - want.background.values).cwiseAbs().maxCoeff() == 0.0);
    // Radiance rebuilt through the forward model: exact by the invariant.
    REQUIRE((got.radiance.values - want.radiance.values).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Reload of the same files is bit-identical (pure function of the bytes).
  const auto record2 = read_scene(paths[0]);
  REQUIRE((flatten(record2.cube) - flatten(record.cube)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((record2.whitening.transform - record.whitening.transform).cwiseAbs().maxCoeff() ==
          0.0);

  const auto all = load_dataset(dir.string());
  REQUIRE(all.size() == 1);
  fs::remove_all(dir);
}
