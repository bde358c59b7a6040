#include "kinfp/snapshot_io.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "kinfp/io_util.hpp"

namespace kinfp {

namespace {
constexpr std::string_view kMagic = "KINFP-SNAPSHOT 1\n";
static_assert(std::endian::native == std::endian::little, "snapshot payload assumes a little-endian host");
}  // namespace

void write_snapshot(const std::filesystem::path& path, const PhaseField& f, double t) {
  nlohmann::json h;
  h["t"] = t;
  h["nx"] = f.nx();
  h["nv"] = f.nv();
  h["x_faces"] = std::vector<double>(f.x_axis().faces().begin(), f.x_axis().faces().end());
  h["v_faces"] = std::vector<double>(f.v_axis().faces().begin(), f.v_axis().faces().end());
  h["layout"] = "row-major, v fastest";
  h["dtype"] = "float64-le";
  std::string bytes(kMagic);
  bytes += h.dump();
  bytes += '\n';
  const auto data = f.data();
  const std::size_t off = bytes.size();
  bytes.resize(off + data.size() * sizeof(double));
  std::memcpy(bytes.data() + off, data.data(), data.size() * sizeof(double));
  atomic_write(path, bytes);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) throw std::runtime_error("read_snapshot: bad magic in " + path.string());
  const auto nl = bytes.find('\n', kMagic.size());
  if (nl == std::string::npos) throw std::runtime_error("read_snapshot: missing header");
  const auto h = nlohmann::json::parse(bytes.substr(kMagic.size(), nl - kMagic.size()));
  PhaseField f(CellAxis(h.at("x_faces").get<std::vector<double>>()), CellAxis(h.at("v_faces").get<std::vector<double>>()));
  if (f.nx() != h.at("nx").get<std::size_t>() || f.nv() != h.at("nv").get<std::size_t>())
    throw std::runtime_error("read_snapshot: header counts disagree with faces");
  const std::size_t need = f.size() * sizeof(double);
  if (bytes.size() - (nl + 1) != need) throw std::runtime_error("read_snapshot: payload size mismatch");
  std::memcpy(f.data().data(), bytes.data() + nl + 1, need);
  return {h.at("t").get<double>(), std::move(f)};
}

}  // namespace kinfp
