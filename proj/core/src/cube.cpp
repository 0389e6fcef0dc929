#include "specret/cube.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace specret {

static_assert(std::endian::native == std::endian::little,
              "cube i/o writes raw little-endian words");

HsiCube::HsiCube(int width, int height, WavelengthGrid grid)
    : width_(width), height_(height), grid_(grid) {
  require(width >= 1 && height >= 1, "HsiCube: dimensions must be positive");
  flat_ = Mat::Zero(static_cast<Eigen::Index>(width) * height, grid_.size());
}

HsiCube::HsiCube(int width, int height, WavelengthGrid grid, Mat flat)
    : width_(width), height_(height), grid_(grid), flat_(std::move(flat)) {
  require(width >= 1 && height >= 1, "HsiCube: dimensions must be positive");
  if (flat_.rows() != static_cast<Eigen::Index>(width) * height ||
      flat_.cols() != grid_.size()) {
    throw ShapeError("HsiCube: flat matrix does not match dimensions");
  }
}

int HsiCube::flat_index(int row, int col) const {
  require(row >= 0 && row < height_ && col >= 0 && col < width_, "HsiCube: pixel out of range");
  return row * width_ + col;
}

Vec HsiCube::pixel(int row, int col) const { return flat_.row(flat_index(row, col)); }

void HsiCube::set_pixel(int row, int col, const Vec& v) {
  if (v.size() != grid_.size()) throw ShapeError("HsiCube::set_pixel: band count mismatch");
  flat_.row(flat_index(row, col)) = v;
}

Mat flatten(const HsiCube& cube) { return cube.flat(); }

HsiCube unflatten(const Mat& flat, int width, int height, const WavelengthGrid& grid) {
  return HsiCube(width, height, grid, flat);
}

namespace {

constexpr char kMagic[4] = {'H', 'S', 'I', 'C'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("read_cube: truncated file while reading " + what);
  return v;
}

}  // namespace

void write_cube(const std::string& path, const HsiCube& cube) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("write_cube: cannot open " + path);
  os.write(kMagic, 4);
  put<std::uint16_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.width()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.height()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cube.grid().size()));
  put<double>(os, cube.grid().lambda_min());
  put<double>(os, cube.grid().lambda_max());
  const Mat& flat = cube.flat();
  std::vector<float> row(static_cast<std::size_t>(flat.cols()));
  for (Eigen::Index p = 0; p < flat.rows(); ++p) {
    for (Eigen::Index b = 0; b < flat.cols(); ++b) {
      row[static_cast<std::size_t>(b)] = static_cast<float>(flat(p, b));
    }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw IoError("write_cube: write failed for " + path);
}

HsiCube read_cube(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_cube: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("read_cube: bad magic in " + path);
  }
  const auto version = get<std::uint16_t>(is, "version");
  if (version != kVersion) {
    throw IoError("read_cube: unsupported version " + std::to_string(version));
  }
  const auto n = get<std::uint32_t>(is, "width");
  const auto m = get<std::uint32_t>(is, "height");
  const auto r = get<std::uint32_t>(is, "bands");
  const double lo = get<double>(is, "lambda_min");
  const double hi = get<double>(is, "lambda_max");
  if (n == 0 || m == 0 || r < 2) throw IoError("read_cube: degenerate dimensions");
  WavelengthGrid grid(lo, hi, static_cast<int>(r));
  Mat flat(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(r));
  std::vector<float> row(static_cast<std::size_t>(r));
  for (Eigen::Index p = 0; p < flat.rows(); ++p) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!is) throw IoError("read_cube: truncated pixel data");
    for (Eigen::Index b = 0; b < flat.cols(); ++b) {
      flat(p, b) = static_cast<double>(row[static_cast<std::size_t>(b)]);
    }
  }
  return HsiCube(static_cast<int>(n), static_cast<int>(m), grid, std::move(flat));
}

}  // namespace specret
