#include "cloudsort/pcd_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cloudsort/error.hpp"

namespace cloudsort {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

bool parse_double(const std::string& tok, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_long(const std::string& tok, long* out) {
  try {
    std::size_t pos = 0;
    *out = std::stol(tok, &pos);
    return pos == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

// Reads header lines in their mandated order, allowing '#' comments anywhere.
class HeaderReader {
 public:
  explicit HeaderReader(std::istream& in) : in_(in) {}

  std::vector<std::string> expect(const std::string& keyword) {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto tokens = split_tokens(line);
      if (tokens.empty()) continue;
      if (tokens[0] != keyword)
        fail(errc::malformed_header, "expected " + keyword + " line, found '" + tokens[0] + "'");
      tokens.erase(tokens.begin());
      return tokens;
    }
    fail(errc::malformed_header, "missing " + keyword + " line");
  }

 private:
  std::istream& in_;
};

}  // namespace

ColorPointCloud load_pcd(const std::string& path, PcdLoadStats* stats) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");

  HeaderReader header(in);
  header.expect("VERSION");

  const auto fields = header.expect("FIELDS");
  if (fields.size() < 3 || fields[0] != "x" || fields[1] != "y" || fields[2] != "z")
    fail(errc::field_mismatch, "FIELDS must begin with x y z");
  bool has_rgb = false;
  if (fields.size() == 4 && fields[3] == "rgb") {
    has_rgb = true;
  } else if (fields.size() != 3) {
    fail(errc::field_mismatch, "unsupported field set (only x y z [rgb])");
  }
  const std::size_t n_fields = fields.size();

  const auto sizes = header.expect("SIZE");
  const auto types = header.expect("TYPE");
  const auto counts = header.expect("COUNT");
  if (sizes.size() != n_fields || types.size() != n_fields || counts.size() != n_fields)
    fail(errc::malformed_header, "SIZE/TYPE/COUNT do not match FIELDS");
  for (std::size_t i = 0; i < n_fields; ++i) {
    if (sizes[i] != "4" || counts[i] != "1")
      fail(errc::malformed_header, "only SIZE 4 / COUNT 1 fields are supported");
    const bool ok = i < 3 ? types[i] == "F" : (types[i] == "F" || types[i] == "U");
    if (!ok) fail(errc::malformed_header, "unsupported TYPE for field " + fields[i]);
  }

  long width = 0;
  if (!parse_long(header.expect("WIDTH").at(0), &width) || width < 0)
    fail(errc::malformed_header, "bad WIDTH");
  long height = 0;
  auto height_tokens = header.expect("HEIGHT");
  if (!parse_long(height_tokens.at(0), &height) || height < 0)
    fail(errc::malformed_header, "bad HEIGHT");
  if (height > 1) fail(errc::malformed_header, "organized clouds (HEIGHT > 1) are unsupported");

  const auto viewpoint_tokens = header.expect("VIEWPOINT");
  if (viewpoint_tokens.size() != 7) fail(errc::malformed_header, "VIEWPOINT needs 7 values");
  Eigen::Vector3d viewpoint;
  for (int i = 0; i < 3; ++i) {
    if (!parse_double(viewpoint_tokens[static_cast<std::size_t>(i)], &viewpoint[i]))
      fail(errc::malformed_header, "bad VIEWPOINT value");
  }

  long n_points = 0;
  if (!parse_long(header.expect("POINTS").at(0), &n_points) || n_points < 0)
    fail(errc::malformed_header, "bad POINTS");
  if (width * height != n_points)
    fail(errc::malformed_header, "WIDTH*HEIGHT does not equal POINTS");

  const auto data_tokens = header.expect("DATA");
  if (data_tokens.empty() || data_tokens[0] != "ascii")
    fail(errc::unsupported_encoding,
         "DATA " + (data_tokens.empty() ? std::string("?") : data_tokens[0]) +
             " (only ascii is supported)");

  std::vector<ColorPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  Eigen::Index skipped = 0;
  std::string line;
  long rows = 0;
  while (rows < n_points) {
    if (!std::getline(in, line))
      fail(errc::malformed_header, "file ends after " + std::to_string(rows) + " of " +
                                       std::to_string(n_points) + " rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = split_tokens(line);
    if (tokens.empty()) continue;  // blank line between rows
    ++rows;
    if (tokens.size() != n_fields)
      fail(errc::malformed_header, "data row with " + std::to_string(tokens.size()) +
                                       " fields, expected " + std::to_string(n_fields));
    ColorPoint p;
    bool finite = true;
    for (int i = 0; i < 3; ++i) {
      double v = 0.0;
      if (!parse_double(tokens[static_cast<std::size_t>(i)], &v))
        fail(errc::malformed_header, "unparseable coordinate '" + tokens[static_cast<std::size_t>(i)] + "'");
      if (!std::isfinite(v)) finite = false;
      p.position[i] = v;
    }
    if (!finite) {
      ++skipped;
      continue;
    }
    if (has_rgb) {
      double raw = 0.0;
      if (!parse_double(tokens[3], &raw))
        fail(errc::malformed_header, "unparseable rgb '" + tokens[3] + "'");
      if (!std::isfinite(raw) || raw < 0 || raw >= 4294967296.0) {
        ++skipped;
        continue;
      }
      const std::uint32_t packed = static_cast<std::uint32_t>(std::llround(raw)) & 0xFFFFFFu;
      p.r = static_cast<std::uint8_t>((packed >> 16) & 0xFF);
      p.g = static_cast<std::uint8_t>((packed >> 8) & 0xFF);
      p.b = static_cast<std::uint8_t>(packed & 0xFF);
    }
    pts.push_back(p);
  }

  if (stats) {
    stats->declared_points = static_cast<Eigen::Index>(n_points);
    stats->skipped_nonfinite = skipped;
  }
  return from_points(pts, viewpoint);
}

void save_pcd(const ColorPointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");

  const Eigen::Index n = cloud.size();
  out << "VERSION .7\n";
  out << "FIELDS x y z rgb\n";
  out << "SIZE 4 4 4 4\n";
  out << "TYPE F F F U\n";
  out << "COUNT 1 1 1 1\n";
  out << "WIDTH " << n << "\n";
  out << "HEIGHT 1\n";
  char vp[128];
  std::snprintf(vp, sizeof(vp), "VIEWPOINT %.9g %.9g %.9g 1 0 0 0\n", cloud.sensor_viewpoint.x(),
                cloud.sensor_viewpoint.y(), cloud.sensor_viewpoint.z());
  out << vp;
  out << "POINTS " << n << "\n";
  out << "DATA ascii\n";

  char row[160];
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint32_t packed = pack_rgb(cloud.colors(0, i), cloud.colors(1, i), cloud.colors(2, i));
    std::snprintf(row, sizeof(row), "%.9g %.9g %.9g %u\n", cloud.points(0, i), cloud.points(1, i),
                  cloud.points(2, i), packed);
    out << row;
  }
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace cloudsort
