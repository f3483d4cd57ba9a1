#pragma once

#include <filesystem>

#include "vrmhd/complex.hpp"
#include "vrmhd/integrators.hpp"

namespace vrmhd {

struct SnapshotInfo {
    long step = 0;
    double time = 0.0;
};

/// Writes a JSON header (geometry, time, block table) followed by the raw
/// little-endian float64 blocks u, rho, s, B.
void snapshot_write(const std::filesystem::path& path, const DeRhamComplex& cx, const State& st, long step);

/// Reads a snapshot written for the same discretization. Throws
/// IntegrityError on truncation, corruption, version or geometry mismatch.
State snapshot_read(const std::filesystem::path& path, const DeRhamComplex& cx, SnapshotInfo* info = nullptr);

} // namespace vrmhd
