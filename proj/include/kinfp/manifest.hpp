#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kinfp {

inline constexpr int kManifestSchemaVersion = 1;

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

struct ArtifactEntry {
  std::string path;  // relative to the artifact directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

// Every file goes through atomic_write and is recorded with its checksum.
// The manifest itself is written last and does not list itself.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<ArtifactEntry>& files() const { return files_; }

  void write(const std::string& name, std::string_view bytes);
  void write_json(const std::string& name, const nlohmann::json& j);
  // manifest.json = header + {"schema_version", "files"}.
  void write_manifest(nlohmann::json header);

 private:
  std::filesystem::path dir_;
  std::vector<ArtifactEntry> files_;
};

}  // namespace kinfp
