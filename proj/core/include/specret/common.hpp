#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace specret {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised for malformed configs, schema violations, and unusable inputs.
/// The CLI maps this family to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an argument violates an operation precondition.
struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};

/// Raised on dimension / shape mismatches between spectral objects.
struct ShapeError : ValidationError {
  using ValidationError::ValidationError;
};

/// Raised on unreadable, unwritable, or malformed files.
struct IoError : ValidationError {
  using ValidationError::ValidationError;
};

/// Raised when a numeric routine cannot proceed (non-finite values,
/// failed factorizations, overflow). The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Throws NumericError when any entry of `m` is NaN or infinite.
void require_finite(const Mat& m, const std::string& what);

/// Throws DomainError unless `cond` holds.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

/// FNV-1a 64-bit hash; used for config echoes and artifact manifests.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

/// Lower-case hex rendering of a 64-bit hash.
std::string hex64(std::uint64_t v);

}  // namespace specret
