#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cloudsort/point_cloud.hpp"

namespace cloudsort {

// Plane ax+by+cz+d=0 with unit (a,b,c) and the indices of the source points
// within the fitting threshold.
struct PlaneModel {
  Eigen::Vector4d coefficients = Eigen::Vector4d(0, 0, 1, 0);
  std::vector<int> inlier_indices;

  double distance(const Eigen::Vector3d& p) const {
    return std::abs(coefficients.head<3>().dot(p) + coefficients[3]);
  }
};

struct SegmentationConfig {
  Eigen::Vector3d crop_min = Eigen::Vector3d(-10, -10, -10);
  Eigen::Vector3d crop_max = Eigen::Vector3d(10, 10, 10);
  double ransac_threshold = 0.01;  // meters
  int ransac_iterations = 1000;
  double cluster_distance = 0.02;  // meters
  int cluster_min_size = 100;
  int cluster_max_size = 25000;
  std::uint32_t rng_seed = 0;

  void validate() const;
};

// Flat key=value serialization, one pair per line.
void save_segmentation_config(const SegmentationConfig& config, const std::string& path);
SegmentationConfig load_segmentation_config(const std::string& path);

// Points with min <= p <= max componentwise, order preserved.
ColorPointCloud crop_region(const ColorPointCloud& cloud, const Eigen::Vector3d& min,
                            const Eigen::Vector3d& max);

// Plane maximizing the inlier count over `iterations` random non-collinear
// 3-point samples, refit to its inliers by least squares (smallest covariance
// eigenvector) with the inlier set recomputed against the refit plane.
// Deterministic for a fixed seed.
PlaneModel ransac_plane(const ColorPointCloud& cloud, double threshold, int iterations,
                        std::uint32_t seed);

// Cloud minus the model's inliers, order preserved.
ColorPointCloud remove_plane(const ColorPointCloud& cloud, const PlaneModel& model);

// Connected components of the graph joining point pairs within `distance`,
// filtered to sizes in [min_size, max_size]. Clusters are ordered by
// decreasing size (ties: smallest contained index) with ascending indices
// inside each cluster.
std::vector<std::vector<int>> euclidean_cluster(const ColorPointCloud& cloud, double distance,
                                                int min_size, int max_size);

struct SegmentationResult {
  std::vector<ColorPointCloud> objects;
  std::vector<std::vector<int>> clusters;  // indices into the plane-removed cloud
  PlaneModel plane;
  bool plane_removed = false;
  Eigen::Index cropped_size = 0;
  Eigen::Index size_filtered_points = 0;  // points excluded by cluster size limits
};

// crop -> RANSAC plane removal -> Euclidean clustering. Plane removal is
// skipped when the best plane covers under 20% of the cropped cloud, so the
// pipeline stays total on table-less scenes.
SegmentationResult segment_scene(const ColorPointCloud& cloud, const SegmentationConfig& config);

}  // namespace cloudsort
