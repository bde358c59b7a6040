#pragma once

#include <filesystem>

#include "kinfp/fp_solver.hpp"

namespace kinfp {

// Flat binary snapshot: a magic line, one line of JSON with t and the cell
// faces of both axes, then nx * nv little-endian 64-bit floats, row-major
// with v fastest.
struct Snapshot {
  double t = 0.0;
  PhaseField field;
};

void write_snapshot(const std::filesystem::path& path, const PhaseField& f, double t);
// Throws std::runtime_error on a malformed or truncated file.
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace kinfp
