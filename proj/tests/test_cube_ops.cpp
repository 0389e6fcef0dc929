#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "specret/cube.hpp"
#include "specret/grid.hpp"
#include "specret/rng.hpp"
#include "specret/sampling.hpp"
#include "specret/whitening.hpp"

using namespace specret;

namespace {

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() / stem;
}

Mat gaussian_pixels(int n, int r, std::uint64_t seed) {
  Rng rng(seed);
  Mat out(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) out(i, j) = rng.normal();
  return out;
}

}  // namespace

TEST_CASE("flatten is row-major by pixel") {
  const WavelengthGrid grid(8.0, 12.0, 3);
  HsiCube cube(2, 2, grid);
  cube.set_pixel(0, 0, Vec::Constant(3, 0.0));
  cube.set_pixel(0, 1, Vec::Constant(3, 1.0));
  cube.set_pixel(1, 0, Vec::Constant(3, 2.0));
  cube.set_pixel(1, 1, Vec::Constant(3, 3.0));

  const Mat flat = flatten(cube);
  REQUIRE(flat.rows() == 4);
  REQUIRE(flat.cols() == 3);
  for (int p = 0; p < 4; ++p) REQUIRE(flat(p, 0) == static_cast<double>(p));

  REQUIRE(cube.flat_index(0, 1) == 1);
  REQUIRE(cube.flat_index(1, 0) == 2);

  const HsiCube back = unflatten(flat, 2, 2, grid);
  REQUIRE((back.pixel(1, 1) - cube.pixel(1, 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cube file round trip is bit exact") {
  const WavelengthGrid grid(7.56, 13.16, 5);
  HsiCube cube(3, 4, grid);
  cube.id = "tiny";
  Rng rng(0xf00du);
  Mat px(12, 5);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 5; ++j) px(i, j) = static_cast<float>(rng.uniform(0.0, 1000.0));
  cube.flat() = px;

  const auto path = temp_file("specret_test_cube.hsic");
  write_cube(path.string(), cube);
  const HsiCube back = read_cube(path.string());
  std::filesystem::remove(path);

  REQUIRE(back.width() == 3);
  REQUIRE(back.height() == 4);
  REQUIRE(back.grid() == grid);
  REQUIRE((back.flat() - px).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("corrupt cube header is rejected") {
  const auto path = temp_file("specret_test_corrupt.hsic");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a cube at all, just bytes";
  }
  REQUIRE_THROWS_AS(read_cube(path.string()), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("whitening a seeded gaussian scene yields identity covariance") {
  const int n = 4096, r = 8;
  Rng rng(0x5cedeu);
  // Build a random SPD covariance through a lower-triangular factor.
  Mat lower = Mat::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j <= i; ++j) lower(i, j) = rng.normal() * 0.5;
    lower(i, i) = std::abs(lower(i, i)) + 1.0;
  }
  const Mat sigma = lower * lower.transpose();
  Vec mu(r);
  for (int i = 0; i < r; ++i) mu[i] = rng.uniform(100.0, 500.0);

  Mat pixels(n, r);
  for (int i = 0; i < n; ++i) {
    Vec z = rng.normal_vec(r);
    pixels.row(i) = (mu + lower * z).transpose();
  }

  const auto model = fit_whitening(pixels, 0.0);
  REQUIRE((model.covariance - sigma).norm() / sigma.norm() < 0.05);

  const Mat white = whiten_rows(pixels, model);
  Vec wmean = white.colwise().mean();
  Mat centered = white.rowwise() - wmean.transpose();
  Mat wcov = centered.transpose() * centered / double(n - 1);
  REQUIRE((wcov - Mat::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("outlier removal drops exactly the requested count") {
  const int n = 100, r = 4;
  Mat pixels = gaussian_pixels(n, r, 0xabcu);
  // Make 10 pixels extreme.
  for (int i = 0; i < 10; ++i) pixels.row(i) *= 50.0;

  const auto model = fit_whitening(pixels, 0.2);
  int dropped = 0;
  for (auto b : model.inlier) dropped += (b == 0);
  REQUIRE(dropped == 20);  // ceil(0.2 * 100)
  // The 10 inflated pixels must all be among the dropped.
  for (int i = 0; i < 10; ++i) REQUIRE(model.inlier[i] == 0);
}

TEST_CASE("whitening an all-identical scene succeeds via the eigenvalue floor") {
  const int n = 64, r = 6;
  Mat pixels = Mat::Zero(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) pixels(i, j) = 3.5 + 0.25 * j;

  const auto model = fit_whitening(pixels, 0.1);
  const double expect = 1.0 / std::sqrt(model.eigen_floor);
  REQUIRE((model.transform - expect * Mat::Identity(r, r)).cwiseAbs().maxCoeff() <
          1e-9 * expect);
}

TEST_CASE("whitening is invariant to pixel order") {
  const int n = 256, r = 5;
  Mat pixels = gaussian_pixels(n, r, 0x0deau);
  Mat reversed(n, r);
  for (int i = 0; i < n; ++i) reversed.row(i) = pixels.row(n - 1 - i);

  const auto a = fit_whitening(pixels, 0.05);
  const auto b = fit_whitening(reversed, 0.05);
  REQUIRE((a.transform - b.transform).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("whiten centers and applies the symmetric transform") {
  const int n = 512, r = 4;
  Mat pixels = gaussian_pixels(n, r, 0x517u);
  const auto model = fit_whitening(pixels, 0.0);

  REQUIRE((model.transform - model.transform.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const Vec x = pixels.row(7).transpose();
  const Vec w = whiten(x, model);
  const Vec expect = model.transform * (x - model.mean);
  REQUIRE((w - expect).cwiseAbs().maxCoeff() < 1e-14);

  // Whitening the mean itself gives zero.
  REQUIRE(whiten(model.mean, model).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pixel set sampling is deterministic and without replacement") {
  const int n = 50, r = 3;
  Mat pixels = gaussian_pixels(n, r, 0x9e7u);

  const auto sets = sample_pixel_sets(pixels, 12, 4, 0x1234u, "cube-a");
  REQUIRE(sets.size() == 4);
  for (const auto& s : sets) {
    REQUIRE(s.cube_id == "cube-a");
    REQUIRE(static_cast<int>(s.indices.size()) == 12);
    REQUIRE(s.spectra.rows() == 12);
    REQUIRE(s.spectra.cols() == r);
    std::set<int> uniq(s.indices.begin(), s.indices.end());
    REQUIRE(uniq.size() == 12);
    for (int k = 0; k < 12; ++k) {
      REQUIRE(s.indices[k] >= 0);
      REQUIRE(s.indices[k] < n);
      REQUIRE((s.spectra.row(k) - pixels.row(s.indices[k])).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  const auto again = sample_pixel_sets(pixels, 12, 4, 0x1234u, "cube-a");
  for (size_t k = 0; k < sets.size(); ++k) {
    REQUIRE(sets[k].indices == again[k].indices);
  }

  const auto other = sample_pixel_sets(pixels, 12, 4, 0x9999u);
  bool any_differs = false;
  for (size_t k = 0; k < sets.size(); ++k) {
    if (sets[k].indices != other[k].indices) any_differs = true;
  }
  REQUIRE(any_differs);
}

TEST_CASE("pixel set of full size is a permutation") {
  const int n = 16, r = 2;
  Mat pixels = gaussian_pixels(n, r, 0x717u);
  const auto sets = sample_pixel_sets(pixels, n, 2, 0x5eedu);
  for (const auto& s : sets) {
    std::set<int> uniq(s.indices.begin(), s.indices.end());
    REQUIRE(uniq.size() == static_cast<size_t>(n));
  }
  REQUIRE_THROWS_AS(sample_pixel_sets(pixels, n + 1, 1, 1u), DomainError);
  REQUIRE_THROWS_AS(sample_pixel_sets(pixels, 0, 1, 1u), DomainError);
}
