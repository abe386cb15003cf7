#include "cloudsort/point_cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

#include "cloudsort/error.hpp"

namespace cloudsort {

ColorPointCloud from_points(const std::vector<ColorPoint>& pts, const Eigen::Vector3d& viewpoint) {
  ColorPointCloud cloud;
  cloud.resize(static_cast<Eigen::Index>(pts.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.set_point(i, pts[static_cast<std::size_t>(i)]);
  cloud.sensor_viewpoint = viewpoint;
  return cloud;
}

ColorPointCloud select(const ColorPointCloud& cloud, const std::vector<int>& indices) {
  ColorPointCloud out;
  out.resize(static_cast<Eigen::Index>(indices.size()));
  out.sensor_viewpoint = cloud.sensor_viewpoint;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= cloud.size())
      fail(errc::index_out_of_range, "point index " + std::to_string(idx) + " out of range");
    out.points.col(static_cast<Eigen::Index>(i)) = cloud.points.col(idx);
    out.colors.col(static_cast<Eigen::Index>(i)) = cloud.colors.col(idx);
  }
  return out;
}

Eigen::Vector3d centroid(const ColorPointCloud& cloud) {
  if (cloud.empty()) fail(errc::empty_cloud, "centroid of an empty cloud");
  return cloud.points.rowwise().mean();
}

namespace detail {
namespace {

struct Candidate {
  double d2;
  int index;
  bool operator<(const Candidate& other) const {
    return d2 != other.d2 ? d2 < other.d2 : index < other.index;
  }
};

}  // namespace

std::vector<std::vector<int>> knn_brute_force(const Eigen::Matrix3Xd& points, int k) {
  const int n = static_cast<int>(points.cols());
  std::vector<std::vector<int>> result(static_cast<std::size_t>(n));
  std::vector<Candidate> cands(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cands[static_cast<std::size_t>(j)] = {(points.col(j) - points.col(i)).squaredNorm(), j};
    }
    std::partial_sort(cands.begin(), cands.begin() + k, cands.end());
    auto& out = result[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out.push_back(cands[static_cast<std::size_t>(j)].index);
  }
  return result;
}

std::vector<std::vector<int>> knn_grid(const Eigen::Matrix3Xd& points, int k) {
  const int n = static_cast<int>(points.cols());
  const Eigen::Vector3d lo = points.rowwise().minCoeff();
  const Eigen::Vector3d hi = points.rowwise().maxCoeff();
  const Eigen::Vector3d extent = hi - lo;

  // Cell size targets ~k points per 3x3x3 block; degenerate extents fall back
  // to a unit cell, which only costs ring iterations, never correctness.
  double volume = 1.0;
  for (int axis = 0; axis < 3; ++axis) volume *= std::max(extent[axis], 1e-9);
  double cell = std::cbrt(volume * static_cast<double>(k) / static_cast<double>(n));
  const double max_extent = extent.maxCoeff();
  if (!(cell > 0.0) || !std::isfinite(cell)) cell = 1.0;
  cell = std::max(cell, max_extent / (1 << 20));

  auto cell_of = [&](const Eigen::Vector3d& p, int axis) {
    return static_cast<std::int64_t>(std::floor((p[axis] - lo[axis]) / cell));
  };
  auto key_of = [](std::int64_t x, std::int64_t y, std::int64_t z) {
    return (x * 2097152 + y) * 2097152 + z;
  };

  std::unordered_map<std::int64_t, std::vector<int>> grid;
  grid.reserve(static_cast<std::size_t>(n));
  std::vector<std::array<std::int64_t, 3>> coord(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    coord[static_cast<std::size_t>(i)] = {cell_of(points.col(i), 0), cell_of(points.col(i), 1),
                                          cell_of(points.col(i), 2)};
    const auto& c = coord[static_cast<std::size_t>(i)];
    grid[key_of(c[0], c[1], c[2])].push_back(i);
  }

  const std::int64_t max_ring =
      static_cast<std::int64_t>(std::ceil(max_extent / cell)) + 1;

  std::vector<std::vector<int>> result(static_cast<std::size_t>(n));
  std::vector<Candidate> cands;
  for (int i = 0; i < n; ++i) {
    cands.clear();
    const auto& c = coord[static_cast<std::size_t>(i)];

    auto scan_cell = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
      auto it = grid.find(key_of(x, y, z));
      if (it == grid.end()) return;
      for (int j : it->second) cands.push_back({(points.col(j) - points.col(i)).squaredNorm(), j});
    };

    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
      if (ring == 0) {
        scan_cell(c[0], c[1], c[2]);
      } else {
        for (std::int64_t dx = -ring; dx <= ring; ++dx) {
          for (std::int64_t dy = -ring; dy <= ring; ++dy) {
            for (std::int64_t dz = -ring; dz <= ring; ++dz) {
              if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != ring) continue;
              scan_cell(c[0] + dx, c[1] + dy, c[2] + dz);
            }
          }
        }
      }
      if (static_cast<int>(cands.size()) >= k) {
        std::nth_element(cands.begin(), cands.begin() + (k - 1), cands.end());
        const double kth = cands[static_cast<std::size_t>(k - 1)].d2;
        // Points in rings > `ring` are at distance >= ring*cell from the query.
        // The strict inequality keeps boundary ties inside the candidate set so
        // tie-breaking by index matches the brute-force path exactly.
        const double safe = static_cast<double>(ring) * cell;
        if (kth < safe * safe) break;
      }
    }

    std::sort(cands.begin(), cands.end());
    auto& out = result[static_cast<std::size_t>(i)];
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out.push_back(cands[static_cast<std::size_t>(j)].index);
  }
  return result;
}

}  // namespace detail

std::vector<std::vector<int>> nearest_neighbors(const Eigen::Matrix3Xd& points, int k) {
  const int n = static_cast<int>(points.cols());
  if (k < 1) fail(errc::too_few_points, "neighbor count must be positive");
  if (n < k) fail(errc::too_few_points, "cloud of " + std::to_string(n) + " points, k=" + std::to_string(k));
  if (n < 20000) return detail::knn_brute_force(points, k);
  return detail::knn_grid(points, k);
}

}  // namespace cloudsort
