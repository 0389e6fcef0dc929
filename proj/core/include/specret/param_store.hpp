#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "specret/common.hpp"

namespace specret {

/// Named parameter tensors in canonical f64, insertion-ordered.
///
/// Every trainable model keeps its weights here; evaluation casts once into
/// the working precision. Names are unique; values must stay finite.
class ParamStore {
 public:
  /// Registers a tensor. Throws DomainError on duplicate names, NumericError
  /// on non-finite entries.
  void add(const std::string& name, Mat value);

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const Mat& get(const std::string& name) const;
  Mat& mutable_get(const std::string& name);

  /// Names in insertion order (the canonical iteration order everywhere).
  const std::vector<std::string>& names() const { return names_; }
  int count() const { return static_cast<int>(names_.size()); }

  /// Total number of scalar entries across all tensors.
  std::int64_t n_scalars() const;

  /// Copies every tensor whose name starts with `prefix + "/"` into a new
  /// store with the prefix stripped.
  ParamStore sub_store(const std::string& prefix) const;

  /// Copies every tensor of `other` into this store under `prefix + "/"`.
  void merge(const ParamStore& other, const std::string& prefix);

  /// Order-sensitive hash of names, shapes, and raw value bytes.
  std::uint64_t content_hash() const;

  /// RNG seed the parameters were initialized from (recorded for replay).
  std::uint64_t seed = 0;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Mat> values_;
  std::unordered_map<std::string, int> index_;
};

/// A checkpoint is a ParamStore plus free-form string metadata (config echo,
/// scale factors, epoch counters).
struct Checkpoint {
  ParamStore params;
  std::map<std::string, std::string> metadata;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Writes a versioned checkpoint: magic + JSON manifest (names, shapes,
/// dtype, seed, metadata) + little-endian f64 blob. The write is atomic
/// (temp file then rename).
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& metadata);

/// Reads a checkpoint; throws IoError on corruption and ValidationError on a
/// format-version mismatch. Round-trips bit-exactly.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace specret
