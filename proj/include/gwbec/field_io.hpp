#pragma once

#include <filesystem>
#include <string>

#include "gwbec/grid.hpp"

namespace gwbec {

/// On-disk field snapshot: `<stem>.bin` holds little-endian float64 values in
/// row-major order (re/im interleaved for complex fields); `<stem>.json`
/// carries dim, points, extents, name, time and value type.
struct FieldHeader {
  std::string name;
  double time = 0.0;
  bool is_complex = false;
  std::vector<std::size_t> points;
  std::vector<double> extents;
};

void write_field(const std::filesystem::path& stem, const RealField& f, const std::string& name,
                 double time);
void write_field(const std::filesystem::path& stem, const ComplexField& f, const std::string& name,
                 double time);

FieldHeader read_field_header(const std::filesystem::path& stem);
/// Reads a snapshot back onto a fresh grid built from the sidecar.
RealField read_real_field(const std::filesystem::path& stem, FieldHeader* header = nullptr);
ComplexField read_complex_field(const std::filesystem::path& stem, FieldHeader* header = nullptr);

}  // namespace gwbec
