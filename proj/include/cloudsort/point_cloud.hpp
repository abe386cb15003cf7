#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace cloudsort {

// One XYZ point (meters) with an 8-bit RGB color.
struct ColorPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

// Column-major cloud storage: points.col(i) is the i-th position and
// colors.col(i) its RGB channels. sensor_viewpoint is the capture origin,
// used for normal orientation and the viewpoint histogram component.
struct ColorPointCloud {
  Eigen::Matrix3Xd points = Eigen::Matrix3Xd(3, 0);
  Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic> colors =
      Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic>(3, 0);
  Eigen::Vector3d sensor_viewpoint = Eigen::Vector3d::Zero();

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return size() == 0; }

  void resize(Eigen::Index n) {
    points.setZero(3, n);
    colors.setZero(3, n);
  }

  ColorPoint point(Eigen::Index i) const {
    return {points.col(i), colors(0, i), colors(1, i), colors(2, i)};
  }

  void set_point(Eigen::Index i, const ColorPoint& p) {
    points.col(i) = p.position;
    colors(0, i) = p.r;
    colors(1, i) = p.g;
    colors(2, i) = p.b;
  }
};

ColorPointCloud from_points(const std::vector<ColorPoint>& pts,
                            const Eigen::Vector3d& viewpoint = Eigen::Vector3d::Zero());

// Sub-cloud holding cloud's points at `indices`, in the given order; the
// sensor viewpoint is inherited. Throws IndexOutOfRange on a bad index.
ColorPointCloud select(const ColorPointCloud& cloud, const std::vector<int>& indices);

// Arithmetic mean of the positions; EmptyCloud when there are none.
Eigen::Vector3d centroid(const ColorPointCloud& cloud);

// Per-point unit normals and curvatures, index-aligned with a source cloud.
// degenerate[i] is 1 where the neighborhood was coincident and the normal is
// the (0,0,1) sentinel.
struct NormalSet {
  Eigen::Matrix3Xd normals = Eigen::Matrix3Xd(3, 0);
  Eigen::VectorXd curvatures;
  std::vector<std::uint8_t> degenerate;

  Eigen::Index size() const { return normals.cols(); }
};

// Exact k-nearest-neighbor indices per point, self included, each list sorted
// by (squared distance, index). Brute force below 20k points and grid-hashed
// above; the two produce identical results, which keeps every consumer
// deterministic regardless of cloud size.
std::vector<std::vector<int>> nearest_neighbors(const Eigen::Matrix3Xd& points, int k);

namespace detail {
std::vector<std::vector<int>> knn_brute_force(const Eigen::Matrix3Xd& points, int k);
std::vector<std::vector<int>> knn_grid(const Eigen::Matrix3Xd& points, int k);
}  // namespace detail

}  // namespace cloudsort
