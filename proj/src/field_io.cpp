#include "gwbec/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "gwbec/error.hpp"

namespace gwbec {

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

void put_le(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_sidecar(const std::filesystem::path& stem, const Grid& g, const std::string& name,
                   double time, bool is_complex) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["time"] = time;
  j["type"] = is_complex ? "complex128" : "float64";
  j["byte_order"] = "little";
  j["dim"] = g.dim();
  std::vector<std::size_t> pts;
  std::vector<double> ext;
  for (int a = 0; a < g.dim(); ++a) {
    pts.push_back(g.points(a));
    ext.push_back(g.extent(a));
  }
  j["points"] = pts;
  j["extents"] = ext;
  j["layout"] = "row-major";
  std::ofstream out(with_ext(stem, ".json"));
  if (!out) fail(ErrorKind::io, "cannot write " + with_ext(stem, ".json").string());
  out << j.dump(2) << "\n";
}

std::vector<double> read_payload(const std::filesystem::path& stem, std::size_t count) {
  std::ifstream in(with_ext(stem, ".bin"), std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + with_ext(stem, ".bin").string());
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size() || in.peek() != EOF) {
    fail(ErrorKind::io, with_ext(stem, ".bin").string() + ": size does not match sidecar");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = get_le(raw.data() + 8 * i);
  return out;
}

}  // namespace

void write_field(const std::filesystem::path& stem, const RealField& f, const std::string& name,
                 double time) {
  std::ofstream out(with_ext(stem, ".bin"), std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + with_ext(stem, ".bin").string());
  for (double v : f.values()) put_le(out, v);
  write_sidecar(stem, *f.grid(), name, time, false);
}

void write_field(const std::filesystem::path& stem, const ComplexField& f, const std::string& name,
                 double time) {
  std::ofstream out(with_ext(stem, ".bin"), std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + with_ext(stem, ".bin").string());
  for (const auto& v : f.values()) {
    put_le(out, v.real());
    put_le(out, v.imag());
  }
  write_sidecar(stem, *f.grid(), name, time, true);
}

FieldHeader read_field_header(const std::filesystem::path& stem) {
  std::ifstream in(with_ext(stem, ".json"));
  if (!in) fail(ErrorKind::io, "cannot open " + with_ext(stem, ".json").string());
  FieldHeader h;
  try {
    const auto j = nlohmann::json::parse(in);
    h.name = j.at("name").get<std::string>();
    h.time = j.at("time").get<double>();
    const auto type = j.at("type").get<std::string>();
    if (type != "float64" && type != "complex128") fail(ErrorKind::io, "unknown field type " + type);
    h.is_complex = type == "complex128";
    h.points = j.at("points").get<std::vector<std::size_t>>();
    h.extents = j.at("extents").get<std::vector<double>>();
    if (j.at("dim").get<std::size_t>() != h.points.size()) fail(ErrorKind::io, "dim/points mismatch");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, with_ext(stem, ".json").string() + ": " + e.what());
  }
  return h;
}

RealField read_real_field(const std::filesystem::path& stem, FieldHeader* header) {
  auto h = read_field_header(stem);
  if (h.is_complex) fail(ErrorKind::io, stem.string() + " holds a complex field");
  auto grid = Grid::create(h.points, h.extents);
  auto values = read_payload(stem, grid->size());
  if (header) *header = h;
  return RealField(grid, std::move(values));
}

ComplexField read_complex_field(const std::filesystem::path& stem, FieldHeader* header) {
  auto h = read_field_header(stem);
  if (!h.is_complex) fail(ErrorKind::io, stem.string() + " holds a real field");
  auto grid = Grid::create(h.points, h.extents);
  auto raw = read_payload(stem, 2 * grid->size());
  std::vector<complex> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = {raw[2 * i], raw[2 * i + 1]};
  if (header) *header = h;
  return ComplexField(grid, std::move(values));
}

}  // namespace gwbec
