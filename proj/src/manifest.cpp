#include "kinfp/manifest.hpp"

#include <array>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "kinfp/io_util.hpp"

namespace kinfp {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) out += fmt::format("{:02x}", md[k]);
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, std::string_view bytes) {
  if (name.empty() || name == "manifest.json") throw std::invalid_argument("artifact name reserved: " + name);
  atomic_write(dir_ / name, bytes);
  for (auto& e : files_)
    if (e.path == name) {
      e.sha256 = sha256_hex(bytes);
      e.bytes = bytes.size();
      return;
    }
  files_.push_back({name, sha256_hex(bytes), bytes.size()});
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

void ArtifactWriter::write_manifest(nlohmann::json header) {
  header["schema_version"] = kManifestSchemaVersion;
  auto list = nlohmann::json::array();
  for (const auto& e : files_) list.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  header["files"] = std::move(list);
  atomic_write(dir_ / "manifest.json", header.dump(2) + "\n");
}

}  // namespace kinfp
