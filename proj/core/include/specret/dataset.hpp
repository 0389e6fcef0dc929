#pragma once

#include <string>
#include <vector>

#include "specret/synth.hpp"

namespace specret {

/// One cube with its ground truth, as reconstructed from disk. The whitening
/// model is refit from the stored (sensor-precision) cube, and example
/// radiances are rebuilt through the forward model, so a reload is a pure
/// function of the files.
struct SceneRecord {
  HsiCube cube;
  AtmosphereParams atmosphere;
  WhiteningModel whitening;
  std::vector<TrainingExample> examples;
};

/// Library file: JSON with a grid header and an entry array.
void write_library(const std::string& path, const std::vector<LibraryEntry>& library,
                   const WavelengthGrid& grid);
std::vector<LibraryEntry> read_library(const std::string& path);

/// Writes "<id>.hsic" (sensor data) and "<id>.json" (ground-truth sidecar)
/// into `dir`; returns the two paths written.
std::vector<std::string> write_scene(const std::string& dir, const SceneBuild& scene);

/// Reads a cube + sidecar pair given the cube path.
SceneRecord read_scene(const std::string& cube_path);

/// Loads every "*.hsic" scene under `dir`, sorted by filename.
std::vector<SceneRecord> load_dataset(const std::string& dir);

}  // namespace specret
