#include "specret/sampling.hpp"

#include "specret/rng.hpp"

namespace specret {

std::vector<PixelSet> sample_pixel_sets(const Mat& pixels, int set_size, int count,
                                        std::uint64_t seed, const std::string& cube_id) {
  const int n = static_cast<int>(pixels.rows());
  require(set_size >= 1, "sample_pixel_sets: set_size must be positive");
  require(count >= 0, "sample_pixel_sets: count must be non-negative");
  require(set_size <= n, "sample_pixel_sets: set_size exceeds pixel count");

  std::vector<PixelSet> sets;
  sets.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, {0x5e75u, static_cast<std::uint64_t>(k)}));
    PixelSet s;
    s.cube_id = cube_id;
    s.indices = rng.sample_without_replacement(n, set_size);
    s.spectra.resize(set_size, pixels.cols());
    for (int j = 0; j < set_size; ++j) {
      s.spectra.row(j) = pixels.row(s.indices[static_cast<std::size_t>(j)]);
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

}  // namespace specret
