#include "cloudsort/segmentation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "cloudsort/error.hpp"
#include "cloudsort/rng.hpp"

namespace cloudsort {

void SegmentationConfig::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (!(crop_min[axis] < crop_max[axis]))
      fail(errc::index_out_of_range, "crop_min must be below crop_max on every axis");
  }
  if (!(ransac_threshold > 0)) fail(errc::index_out_of_range, "ransac_threshold must be > 0");
  if (ransac_iterations < 1) fail(errc::index_out_of_range, "ransac_iterations must be >= 1");
  if (!(cluster_distance > 0)) fail(errc::index_out_of_range, "cluster_distance must be > 0");
  if (cluster_min_size < 1) fail(errc::index_out_of_range, "cluster_min_size must be >= 1");
  if (cluster_max_size < cluster_min_size)
    fail(errc::index_out_of_range, "cluster_max_size must be >= cluster_min_size");
}

void save_segmentation_config(const SegmentationConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  char buf[256];
  std::snprintf(buf, sizeof(buf), "crop_min=%.9g,%.9g,%.9g\n", config.crop_min.x(),
                config.crop_min.y(), config.crop_min.z());
  out << buf;
  std::snprintf(buf, sizeof(buf), "crop_max=%.9g,%.9g,%.9g\n", config.crop_max.x(),
                config.crop_max.y(), config.crop_max.z());
  out << buf;
  std::snprintf(buf, sizeof(buf), "ransac_threshold=%.9g\n", config.ransac_threshold);
  out << buf;
  out << "ransac_iterations=" << config.ransac_iterations << "\n";
  std::snprintf(buf, sizeof(buf), "cluster_distance=%.9g\n", config.cluster_distance);
  out << buf;
  out << "cluster_min_size=" << config.cluster_min_size << "\n";
  out << "cluster_max_size=" << config.cluster_max_size << "\n";
  out << "rng_seed=" << config.rng_seed << "\n";
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

namespace {

Eigen::Vector3d parse_vec3(const std::string& value) {
  Eigen::Vector3d v;
  std::istringstream in(value);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, part, ',')) fail(errc::io_error, "expected x,y,z triple: " + value);
    v[i] = std::stod(part);
  }
  return v;
}

}  // namespace

SegmentationConfig load_segmentation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");
  SegmentationConfig config;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(errc::io_error, "expected key=value: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "crop_min") config.crop_min = parse_vec3(value);
    else if (key == "crop_max") config.crop_max = parse_vec3(value);
    else if (key == "ransac_threshold") config.ransac_threshold = std::stod(value);
    else if (key == "ransac_iterations") config.ransac_iterations = std::stoi(value);
    else if (key == "cluster_distance") config.cluster_distance = std::stod(value);
    else if (key == "cluster_min_size") config.cluster_min_size = std::stoi(value);
    else if (key == "cluster_max_size") config.cluster_max_size = std::stoi(value);
    else if (key == "rng_seed") config.rng_seed = static_cast<std::uint32_t>(std::stoul(value));
    else fail(errc::io_error, "unknown config key: " + key);
  }
  config.validate();
  return config;
}

ColorPointCloud crop_region(const ColorPointCloud& cloud, const Eigen::Vector3d& min,
                            const Eigen::Vector3d& max) {
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.points.col(i);
    if ((p.array() >= min.array()).all() && (p.array() <= max.array()).all())
      kept.push_back(static_cast<int>(i));
  }
  return select(cloud, kept);
}

namespace {

// Sample 3 distinct indices from [0, n).
std::array<int, 3> sample_triplet(std::mt19937& rng, int n) {
  int i0 = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(n)));
  int i1 = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(n - 1)));
  if (i1 >= i0) ++i1;
  int i2 = static_cast<int>(uniform_index(rng, static_cast<std::uint32_t>(n - 2)));
  const int lo = std::min(i0, i1);
  const int hi = std::max(i0, i1);
  if (i2 >= lo) ++i2;
  if (i2 >= hi) ++i2;
  return {i0, i1, i2};
}

std::vector<int> plane_inliers(const Eigen::Matrix3Xd& points, const Eigen::Vector4d& coeff,
                               double threshold) {
  std::vector<int> inliers;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (std::abs(coeff.head<3>().dot(points.col(i)) + coeff[3]) <= threshold)
      inliers.push_back(static_cast<int>(i));
  }
  return inliers;
}

// Least-squares plane through the given points: normal is the smallest
// eigenvector of their covariance.
Eigen::Vector4d fit_plane(const Eigen::Matrix3Xd& points, const std::vector<int>& indices) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int i : indices) mean += points.col(i);
  mean /= static_cast<double>(indices.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i : indices) {
    const Eigen::Vector3d d = points.col(i) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d normal = solver.eigenvectors().col(0).normalized();
  Eigen::Vector4d coeff;
  coeff.head<3>() = normal;
  coeff[3] = -normal.dot(mean);
  return coeff;
}

}  // namespace

PlaneModel ransac_plane(const ColorPointCloud& cloud, double threshold, int iterations,
                        std::uint32_t seed) {
  const int n = static_cast<int>(cloud.size());
  if (n < 3) fail(errc::too_few_points, "RANSAC needs at least 3 points");
  if (!(threshold > 0)) fail(errc::index_out_of_range, "RANSAC threshold must be > 0");

  std::mt19937 rng(seed);
  Eigen::Vector4d best_coeff;
  int best_count = -1;

  for (int iter = 0; iter < iterations; ++iter) {
    Eigen::Vector3d normal;
    Eigen::Vector3d anchor;
    bool valid = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto idx = sample_triplet(rng, n);
      const Eigen::Vector3d p0 = cloud.points.col(idx[0]);
      const Eigen::Vector3d e1 = cloud.points.col(idx[1]) - p0;
      const Eigen::Vector3d e2 = cloud.points.col(idx[2]) - p0;
      const Eigen::Vector3d cross = e1.cross(e2);
      if (cross.squaredNorm() <= 1e-24 * e1.squaredNorm() * e2.squaredNorm()) continue;
      normal = cross.normalized();
      anchor = p0;
      valid = true;
      break;
    }
    if (!valid) continue;

    Eigen::Vector4d coeff;
    coeff.head<3>() = normal;
    coeff[3] = -normal.dot(anchor);
    int count = 0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      if (std::abs(coeff.head<3>().dot(cloud.points.col(i)) + coeff[3]) <= threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_coeff = coeff;
    }
  }

  if (best_count < 0) fail(errc::no_valid_sample, "every RANSAC sample was collinear");

  PlaneModel model;
  const auto sample_inliers = plane_inliers(cloud.points, best_coeff, threshold);
  model.coefficients = fit_plane(cloud.points, sample_inliers);
  model.inlier_indices = plane_inliers(cloud.points, model.coefficients, threshold);
  return model;
}

ColorPointCloud remove_plane(const ColorPointCloud& cloud, const PlaneModel& model) {
  std::vector<std::uint8_t> is_inlier(static_cast<std::size_t>(cloud.size()), 0);
  for (int i : model.inlier_indices) {
    if (i < 0 || i >= cloud.size())
      fail(errc::index_out_of_range, "plane inlier index " + std::to_string(i));
    is_inlier[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (!is_inlier[static_cast<std::size_t>(i)]) kept.push_back(static_cast<int>(i));
  }
  return select(cloud, kept);
}

namespace {

// Exact radius adjacency through a uniform grid with cell size = distance;
// any neighbor within the radius lies in one of the 27 surrounding cells.
struct RadiusGrid {
  double cell;
  Eigen::Vector3d origin;
  std::unordered_map<std::int64_t, std::vector<int>> cells;

  RadiusGrid(const Eigen::Matrix3Xd& points, double distance) : cell(distance) {
    origin = points.cols() > 0 ? Eigen::Vector3d(points.rowwise().minCoeff()) : Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < points.cols(); ++i)
      cells[key(coord(points.col(i)))].push_back(static_cast<int>(i));
  }

  std::array<std::int64_t, 3> coord(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor((p.x() - origin.x()) / cell)),
            static_cast<std::int64_t>(std::floor((p.y() - origin.y()) / cell)),
            static_cast<std::int64_t>(std::floor((p.z() - origin.z()) / cell))};
  }

  static std::int64_t key(const std::array<std::int64_t, 3>& c) {
    return (c[0] * 2097152 + c[1]) * 2097152 + c[2];
  }
};

}  // namespace

std::vector<std::vector<int>> euclidean_cluster(const ColorPointCloud& cloud, double distance,
                                                int min_size, int max_size) {
  if (!(distance > 0)) fail(errc::index_out_of_range, "cluster distance must be > 0");
  const Eigen::Index n = cloud.size();
  std::vector<std::vector<int>> clusters;
  if (n == 0) return clusters;

  RadiusGrid grid(cloud.points, distance);
  const double d2 = distance * distance;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(n), 0);

  for (Eigen::Index seed = 0; seed < n; ++seed) {
    if (visited[static_cast<std::size_t>(seed)]) continue;
    std::vector<int> component;
    std::deque<int> queue{static_cast<int>(seed)};
    visited[static_cast<std::size_t>(seed)] = 1;
    while (!queue.empty()) {
      const int current = queue.front();
      queue.pop_front();
      component.push_back(current);
      const auto c = grid.coord(cloud.points.col(current));
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            const auto it = grid.cells.find(RadiusGrid::key({c[0] + dx, c[1] + dy, c[2] + dz}));
            if (it == grid.cells.end()) continue;
            for (int j : it->second) {
              if (visited[static_cast<std::size_t>(j)]) continue;
              if ((cloud.points.col(j) - cloud.points.col(current)).squaredNorm() <= d2) {
                visited[static_cast<std::size_t>(j)] = 1;
                queue.push_back(j);
              }
            }
          }
        }
      }
    }
    const int size = static_cast<int>(component.size());
    if (size < min_size || size > max_size) continue;
    std::sort(component.begin(), component.end());
    clusters.push_back(std::move(component));
  }

  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return clusters;
}

SegmentationResult segment_scene(const ColorPointCloud& cloud, const SegmentationConfig& config) {
  config.validate();

  SegmentationResult result;
  const ColorPointCloud cropped = crop_region(cloud, config.crop_min, config.crop_max);
  result.cropped_size = cropped.size();
  if (cropped.empty()) fail(errc::empty_after_crop, "no points inside the crop box");

  ColorPointCloud working = cropped;
  result.plane = ransac_plane(cropped, config.ransac_threshold, config.ransac_iterations,
                              config.rng_seed);
  const double inlier_fraction = static_cast<double>(result.plane.inlier_indices.size()) /
                                 static_cast<double>(cropped.size());
  if (inlier_fraction >= 0.20) {
    working = remove_plane(cropped, result.plane);
    result.plane_removed = true;
  }

  result.clusters = euclidean_cluster(working, config.cluster_distance, config.cluster_min_size,
                                      config.cluster_max_size);
  Eigen::Index clustered = 0;
  for (const auto& cluster : result.clusters) {
    result.objects.push_back(select(working, cluster));
    clustered += static_cast<Eigen::Index>(cluster.size());
  }
  result.size_filtered_points = working.size() - clustered;
  return result;
}

}  // namespace cloudsort
