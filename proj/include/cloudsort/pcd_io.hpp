#pragma once

#include <cstdint>
#include <string>

#include "cloudsort/point_cloud.hpp"

namespace cloudsort {

struct PcdLoadStats {
  Eigen::Index declared_points = 0;   // POINTS value from the header
  Eigen::Index skipped_nonfinite = 0; // rows dropped for NaN/Inf coordinates
};

// Reads the ASCII PCD subset: ordered header lines VERSION, FIELDS (x y z
// [rgb]), SIZE, TYPE, COUNT, WIDTH, HEIGHT 1, VIEWPOINT, POINTS, DATA ascii.
// '#' comment lines may appear between header lines. The rgb column is
// accepted either as an unsigned 0x00RRGGBB integer or as a float carrying
// that integer's value. Rows with non-finite coordinates are skipped and
// counted, not fatal.
ColorPointCloud load_pcd(const std::string& path, PcdLoadStats* stats = nullptr);

// Writes the same subset; rgb is always emitted as the unsigned integer so
// the format stays lossless. Coordinates round-trip within 1e-6.
void save_pcd(const ColorPointCloud& cloud, const std::string& path);

inline std::uint32_t pack_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (static_cast<std::uint32_t>(r) << 16) | (static_cast<std::uint32_t>(g) << 8) |
         static_cast<std::uint32_t>(b);
}

}  // namespace cloudsort
