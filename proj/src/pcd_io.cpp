#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "laserpick/errors.hpp"
#include "laserpick/scene_io.hpp"

namespace laserpick {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_token(const std::string& tok, T& value) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

void expect_fields(const std::vector<std::string>& toks, const std::vector<std::string>& expected, std::size_t line) {
  if (toks != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : " ") + e;
    throw ParseError("expected '" + want + "'", line);
  }
}

std::size_t parse_count(const std::vector<std::string>& toks, std::size_t line) {
  std::size_t n = 0;
  if (toks.size() != 2 || !parse_token(toks[1], n)) throw ParseError("expected '" + toks[0] + " <count>'", line);
  return n;
}

}  // namespace

void write_pcd(const PointCloud& cloud, std::ostream& out) {
  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION 0.7\n"
      << "FIELDS x y z rgb\n"
      << "SIZE 4 4 4 4\n"
      << "TYPE F F F U\n"
      << "COUNT 1 1 1 1\n"
      << "WIDTH " << cloud.size() << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << cloud.size() << "\n"
      << "DATA ascii\n";
  char buf[128];
  for (const auto& p : cloud) {
    const std::uint32_t rgb = (static_cast<std::uint32_t>(p.r) << 16) | (static_cast<std::uint32_t>(p.g) << 8) | p.b;
    // %.9g round-trips any float32 exactly
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %u\n", static_cast<double>(static_cast<float>(p.x)),
                  static_cast<double>(static_cast<float>(p.y)), static_cast<double>(static_cast<float>(p.z)), rgb);
    out << buf;
  }
}

void write_pcd(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_pcd(cloud, out);
  if (!out) throw IoError("write failed for " + path.string());
}

PointCloud read_pcd(std::istream& in, Frame frame) {
  std::string raw;
  std::size_t line = 0;
  const auto next_header = [&]() -> std::vector<std::string> {
    while (std::getline(in, raw)) {
      ++line;
      if (raw.empty() || raw[0] == '#') continue;
      return split_ws(raw);
    }
    throw ParseError("unexpected end of header", line);
  };

  auto toks = next_header();
  if (toks.empty() || toks[0] != "VERSION") throw ParseError("expected VERSION", line);
  toks = next_header();
  expect_fields(toks, {"FIELDS", "x", "y", "z", "rgb"}, line);
  toks = next_header();
  expect_fields(toks, {"SIZE", "4", "4", "4", "4"}, line);
  toks = next_header();
  expect_fields(toks, {"TYPE", "F", "F", "F", "U"}, line);
  toks = next_header();
  expect_fields(toks, {"COUNT", "1", "1", "1", "1"}, line);
  toks = next_header();
  if (toks.empty() || toks[0] != "WIDTH") throw ParseError("expected WIDTH", line);
  const std::size_t width = parse_count(toks, line);
  toks = next_header();
  if (toks.empty() || toks[0] != "HEIGHT") throw ParseError("expected HEIGHT", line);
  const std::size_t height = parse_count(toks, line);
  toks = next_header();
  if (toks.empty() || toks[0] != "VIEWPOINT" || toks.size() != 8) throw ParseError("expected VIEWPOINT with 7 values", line);
  toks = next_header();
  if (toks.empty() || toks[0] != "POINTS") throw ParseError("expected POINTS", line);
  const std::size_t count = parse_count(toks, line);
  if (count != width * height) throw ParseError("POINTS does not equal WIDTH * HEIGHT", line);
  toks = next_header();
  expect_fields(toks, {"DATA", "ascii"}, line);

  std::vector<ColoredPoint> points;
  points.reserve(count);
  while (std::getline(in, raw)) {
    ++line;
    const auto fields = split_ws(raw);
    if (fields.empty()) continue;
    if (points.size() == count) throw ParseError("more data rows than POINTS " + std::to_string(count), line);
    if (fields.size() != 4) throw ParseError("expected 4 values per point", line);
    float xyz[3];
    for (int k = 0; k < 3; ++k) {
      if (!parse_token(fields[static_cast<std::size_t>(k)], xyz[k]) || !std::isfinite(xyz[k])) {
        throw ParseError("invalid coordinate '" + fields[static_cast<std::size_t>(k)] + "'", line);
      }
    }
    std::uint32_t rgb = 0;
    if (!parse_token(fields[3], rgb) || rgb > 0xFFFFFFu) throw ParseError("invalid rgb '" + fields[3] + "'", line);
    points.push_back({xyz[0], xyz[1], xyz[2], static_cast<std::uint8_t>((rgb >> 16) & 0xFF),
                      static_cast<std::uint8_t>((rgb >> 8) & 0xFF), static_cast<std::uint8_t>(rgb & 0xFF)});
  }
  if (points.size() != count) {
    throw ParseError("expected " + std::to_string(count) + " points, found " + std::to_string(points.size()), line);
  }
  return PointCloud(frame, std::move(points));
}

PointCloud read_pcd(const std::filesystem::path& path, Frame frame) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pcd(in, frame);
}

}  // namespace laserpick
