#pragma once

#include "kvnsim/em_spinor.hpp"
#include "kvnsim/phase_grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kvnsim {

enum class DType { F64, C128 };

/// Sidecar header of a flat little-endian array <name>.bin, stored as <name>.hdr:
///   name <name>
///   dtype f64le | c128le
///   shape <n0> <n1>
///   axes <label0> <label1>
///   representation <tag>
///   endianness little
///   time <t>
///   range <label> <n> <min> <max>     (one line per real-space axis)
struct SnapshotHeader {
    std::string name;
    DType dtype = DType::C128;
    std::vector<std::size_t> shape;
    std::vector<std::string> axes;
    std::string representation;
    double time = 0.0;
    std::vector<std::pair<std::string, UniformAxis>> ranges;

    std::size_t count() const;
    bool operator==(const SnapshotHeader&) const = default;
};

struct SnapshotData {
    SnapshotHeader header;
    std::vector<double> real;     // dtype f64le
    std::vector<cplx> complex;    // dtype c128le
};

/// Writes <dir>/<name>.bin and <dir>/<name>.hdr and returns both paths.
/// Throws std::runtime_error when a file cannot be written.
std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& dir, const SnapshotHeader& header,
                                                  std::span<const cplx> values);
std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& dir, const SnapshotHeader& header,
                                                  std::span<const double> values);

/// Reads a header (path to .hdr, or to .bin, or without extension) and its array.
SnapshotData read_snapshot(const std::filesystem::path& path);

/// Header describing a phase-space state; axes follow the representation.
SnapshotHeader header_for(const std::string& name, const KvnState& s, double time);
/// Header describing a real QP field such as a Wigner function.
SnapshotHeader header_for_field(const std::string& name, const PhaseGrid& grid, double time);
/// Header describing an EM spinor: shape 6 x n_z, axes component z.
SnapshotHeader header_for(const std::string& name, const EmState& s, double time);

/// Rebuilds a state from a c128le phase-space snapshot.
KvnState state_from_snapshot(const SnapshotData& snap);
/// Rebuilds the grid of a phase-space snapshot.
PhaseGrid grid_from_snapshot(const SnapshotHeader& header);
/// Rebuilds an EM state from a c128le z snapshot.
EmState em_state_from_snapshot(const SnapshotData& snap);

}  // namespace kvnsim
