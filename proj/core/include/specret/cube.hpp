#pragma once

#include <map>
#include <string>

#include "specret/common.hpp"
#include "specret/grid.hpp"
#include "specret/spectrum.hpp"

namespace specret {

/// Hyperspectral radiance cube: width N (columns), height M (rows), and one
/// radiance spectrum per pixel. Data is held flattened, one pixel per row in
/// row-major pixel order (flat index = row * N + col), which is also the
/// layout contract of flatten().
class HsiCube {
 public:
  HsiCube(int width, int height, WavelengthGrid grid);
  HsiCube(int width, int height, WavelengthGrid grid, Mat flat);

  /// Free-form identity and annotations; carried by dataset sidecars, not by
  /// the binary cube format.
  std::string id;
  std::map<std::string, std::string> metadata;

  int width() const { return width_; }
  int height() const { return height_; }
  int n_pixels() const { return width_ * height_; }
  const WavelengthGrid& grid() const { return grid_; }

  int flat_index(int row, int col) const;

  Vec pixel(int row, int col) const;
  void set_pixel(int row, int col, const Vec& v);

  /// (N*M) x r view of the cube, row-major over (row, col).
  const Mat& flat() const { return flat_; }
  Mat& flat() { return flat_; }

 private:
  int width_ = 0;
  int height_ = 0;
  WavelengthGrid grid_;
  Mat flat_;
};

/// Returns the (N*M) x r pixel matrix of a cube (copy of the flat view).
Mat flatten(const HsiCube& cube);

/// Rebuilds a cube from a flattened pixel matrix.
HsiCube unflatten(const Mat& flat, int width, int height, const WavelengthGrid& grid);

/// Binary cube file ("HSIC" magic, version 1): header + little-endian f32
/// samples ordered (row, col, band). Write/read round-trips are bit-exact.
void write_cube(const std::string& path, const HsiCube& cube);
HsiCube read_cube(const std::string& path);

}  // namespace specret
