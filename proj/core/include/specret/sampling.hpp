#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specret/common.hpp"

namespace specret {

/// A set of distinct pixels drawn from a scene, with their radiance rows.
struct PixelSet {
  std::string cube_id;       // id of the source cube ("" when sampled from a bare matrix)
  std::vector<int> indices;  // flat pixel indices, draw order
  Mat spectra;               // one row per drawn pixel
};

/// Draws `count` pixel sets of `set_size` distinct pixels each from the rows
/// of `pixels`. Sets are independent; set k is derived from (seed, k), so any
/// subset of sets can be regenerated without drawing the others.
std::vector<PixelSet> sample_pixel_sets(const Mat& pixels, int set_size, int count,
                                        std::uint64_t seed, const std::string& cube_id = "");

}  // namespace specret
