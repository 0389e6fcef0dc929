#include "specret/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace specret {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr, int expect, const std::string& what) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expect)
    throw IoError("dataset: " + what + " has wrong length");
  Vec v(expect);
  for (int i = 0; i < expect; ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("dataset: parse error in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("dataset: cannot open " + tmp);
    out << text;
    out.flush();
    if (!out) throw IoError("dataset: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_library(const std::string& path, const std::vector<LibraryEntry>& library,
                   const WavelengthGrid& grid) {
  json doc;
  doc["format_version"] = 1;
  doc["grid"] = {{"lambda_min", grid.lambda_min()},
                 {"lambda_max", grid.lambda_max()},
                 {"n_bands", grid.size()}};
  json entries = json::array();
  for (const auto& e : library) {
    require(e.emissivity.grid == grid, "write_library: entry grid mismatch");
    entries.push_back({{"name", e.name}, {"values", vec_to_json(e.emissivity.values)}});
  }
  doc["entries"] = std::move(entries);
  write_text_file(path, doc.dump(1));
}

std::vector<LibraryEntry> read_library(const std::string& path) {
  const json doc = read_json_file(path);
  if (doc.value("format_version", 0) != 1)
    throw ValidationError("read_library: unsupported format version in " + path);
  const auto& g = doc.at("grid");
  const WavelengthGrid grid(g.at("lambda_min").get<double>(), g.at("lambda_max").get<double>(),
                            g.at("n_bands").get<int>());
  std::vector<LibraryEntry> out;
  for (const auto& e : doc.at("entries")) {
    out.push_back(LibraryEntry{
        e.at("name").get<std::string>(),
        EmissivitySpectrum(grid, vec_from_json(e.at("values"), grid.size(), "library entry"))});
  }
  return out;
}

std::vector<std::string> write_scene(const std::string& dir, const SceneBuild& scene) {
  require(!scene.cube.id.empty(), "write_scene: cube must carry an id");
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  const std::string cube_path = (base / (scene.cube.id + ".hsic")).string();
  const std::string side_path = (base / (scene.cube.id + ".json")).string();
  write_cube(cube_path, scene.cube);

  const auto& atm = scene.atmosphere;
  json doc;
  doc["format_version"] = 1;
  doc["cube_id"] = scene.cube.id;
  doc["atmosphere"] = {{"temperature_K", atm.temperature_K},
                       {"tau", vec_to_json(atm.tau)},
                       {"upwelling", vec_to_json(atm.upwelling)},
                       {"downwelling", vec_to_json(atm.downwelling)},
                       {"blackbody", vec_to_json(atm.blackbody)}};
  json examples = json::array();
  for (const auto& ex : scene.examples) {
    examples.push_back({{"pixel", ex.pixel_index},
                        {"alpha", ex.alpha},
                        {"entry", ex.entry_name},
                        {"eps", vec_to_json(ex.emissivity.values)},
                        {"bg", vec_to_json(ex.background.values)}});
  }
  doc["examples"] = std::move(examples);
  write_text_file(side_path, doc.dump(1));
  return {cube_path, side_path};
}

SceneRecord read_scene(const std::string& cube_path) {
  HsiCube cube = read_cube(cube_path);
  const std::filesystem::path p(cube_path);
  const std::string side_path = (p.parent_path() / (p.stem().string() + ".json")).string();
  const json doc = read_json_file(side_path);
  if (doc.value("format_version", 0) != 1)
    throw ValidationError("read_scene: unsupported sidecar version in " + side_path);

  cube.id = doc.value("cube_id", p.stem().string());
  const WavelengthGrid grid = cube.grid();
  const int r = grid.size();

  const auto& a = doc.at("atmosphere");
  AtmosphereParams atm(grid, vec_from_json(a.at("tau"), r, "tau"),
                       vec_from_json(a.at("upwelling"), r, "upwelling"),
                       vec_from_json(a.at("downwelling"), r, "downwelling"),
                       vec_from_json(a.at("blackbody"), r, "blackbody"),
                       a.at("temperature_K").get<double>());

  WhiteningModel whitening = fit_whitening(flatten(cube), 0.2);

  std::vector<TrainingExample> examples;
  for (const auto& e : doc.at("examples")) {
    EmissivitySpectrum eps(grid, vec_from_json(e.at("eps"), r, "eps"));
    RadianceSpectrum bg(grid, vec_from_json(e.at("bg"), r, "bg"));
    const double alpha = e.at("alpha").get<double>();
    RadianceSpectrum radiance = propagate(eps, atm, alpha, bg);
    RadianceSpectrum whitened(grid, whiten(radiance.values, whitening));
    examples.push_back(TrainingExample{std::move(radiance), std::move(whitened), eps,
                                       normalize(eps), alpha, cube.id, cube.id,
                                       e.at("entry").get<std::string>(), e.at("pixel").get<int>(),
                                       std::move(bg)});
  }
  return SceneRecord{std::move(cube), std::move(atm), std::move(whitening),
                     std::move(examples)};
}

std::vector<SceneRecord> load_dataset(const std::string& dir) {
  std::vector<std::string> cube_paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".hsic") cube_paths.push_back(entry.path().string());
  }
  std::sort(cube_paths.begin(), cube_paths.end());
  std::vector<SceneRecord> out;
  out.reserve(cube_paths.size());
  for (const auto& path : cube_paths) out.push_back(read_scene(path));
  return out;
}

}  // namespace specret
