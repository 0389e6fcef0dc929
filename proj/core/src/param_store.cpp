#include "specret/param_store.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace specret {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written little-endian without swapping");

void ParamStore::add(const std::string& name, Mat value) {
  require(!name.empty(), "ParamStore::add: empty name");
  if (index_.count(name) != 0) throw DomainError("ParamStore::add: duplicate name " + name);
  require_finite(value, "parameter " + name);
  index_[name] = static_cast<int>(names_.size());
  names_.push_back(name);
  values_.emplace(name, std::move(value));
}

const Mat& ParamStore::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw DomainError("ParamStore::get: unknown parameter " + name);
  return it->second;
}

Mat& ParamStore::mutable_get(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw DomainError("ParamStore::get: unknown parameter " + name);
  return it->second;
}

std::int64_t ParamStore::n_scalars() const {
  std::int64_t n = 0;
  for (const auto& name : names_) n += values_.at(name).size();
  return n;
}

ParamStore ParamStore::sub_store(const std::string& prefix) const {
  const std::string full = prefix + "/";
  ParamStore out;
  out.seed = seed;
  for (const auto& name : names_) {
    if (name.rfind(full, 0) == 0) out.add(name.substr(full.size()), values_.at(name));
  }
  return out;
}

void ParamStore::merge(const ParamStore& other, const std::string& prefix) {
  for (const auto& name : other.names()) {
    add(prefix + "/" + name, other.get(name));
  }
}

std::uint64_t ParamStore::content_hash() const {
  std::uint64_t h = fnv1a64("params-v1");
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& name : names_) {
    mix(name.data(), name.size());
    const Mat& m = values_.at(name);
    const std::int64_t dims[2] = {m.rows(), m.cols()};
    mix(dims, sizeof(dims));
    mix(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'S', 'R', 'C', 'K'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& metadata) {
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["dtype"] = "f64";
  manifest["seed"] = params.seed;
  manifest["metadata"] = metadata;
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& name : params.names()) {
    const Mat& m = params.get(name);
    tensors.push_back({{"name", name},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"offset", offset}});
    offset += sizeof(double) * static_cast<std::uint64_t>(m.size());
  }
  manifest["tensors"] = std::move(tensors);
  const std::string text = manifest.dump();

  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_checkpoint: cannot open " + tmp.string());
    out.write(kMagic, 4);
    write_u32(out, kCheckpointVersion);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& name : params.names()) {
      const Mat& m = params.get(name);
      out.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * m.size()));
    }
    out.flush();
    if (!out) throw IoError("save_checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("load_checkpoint: " + path + " is not a checkpoint file");

  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in) throw IoError("load_checkpoint: truncated header in " + path);
  if (version != kCheckpointVersion)
    throw ValidationError("load_checkpoint: " + path + " has format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));

  std::uint64_t manifest_len = 0;
  in.read(reinterpret_cast<char*>(&manifest_len), sizeof(manifest_len));
  if (!in || manifest_len > (1ull << 30)) throw IoError("load_checkpoint: bad manifest length");

  std::string text(manifest_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(manifest_len));
  if (!in) throw IoError("load_checkpoint: truncated manifest in " + path);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_checkpoint: manifest parse error: " + std::string(e.what()));
  }
  if (manifest.value("dtype", "") != "f64")
    throw ValidationError("load_checkpoint: unsupported dtype in " + path);

  Checkpoint ck;
  ck.params.seed = manifest.value("seed", std::uint64_t{0});
  if (manifest.contains("metadata")) {
    for (auto it = manifest["metadata"].begin(); it != manifest["metadata"].end(); ++it) {
      ck.metadata[it.key()] = it.value().get<std::string>();
    }
  }
  for (const auto& t : manifest.at("tensors")) {
    const auto rows = t.at("rows").get<std::int64_t>();
    const auto cols = t.at("cols").get<std::int64_t>();
    if (rows < 0 || cols < 0) throw IoError("load_checkpoint: negative tensor shape");
    Mat m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw IoError("load_checkpoint: truncated blob in " + path);
    ck.params.add(t.at("name").get<std::string>(), std::move(m));
  }
  return ck;
}

}  // namespace specret
