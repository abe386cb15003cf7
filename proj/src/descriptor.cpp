#include "cloudsort/descriptor.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cloudsort/error.hpp"

namespace cloudsort {

namespace {

constexpr double kPi = std::numbers::pi;

int clamp_bin(int bin, int bins) { return std::clamp(bin, 0, bins - 1); }

int bin_symmetric(double value, int bins) {  // over [-1, 1]
  return clamp_bin(static_cast<int>(std::floor((value + 1.0) * 0.5 * bins)), bins);
}

int bin_unit(double value, int bins) {  // over [0, 1], last bin closed
  return clamp_bin(static_cast<int>(std::floor(value * bins)), bins);
}

int bin_angle(double theta, int bins) {  // over (-pi, pi]
  return clamp_bin(static_cast<int>(std::floor((theta + kPi) / (2.0 * kPi) * bins)), bins);
}

void normalize_block(Eigen::VectorXd& values, int offset, int length) {
  const double sum = values.segment(offset, length).sum();
  if (sum > 0.0) values.segment(offset, length) /= sum;
}

// Mean over a subset accumulated in an index-independent order (sorted by the
// summand values), so descriptors are bit-identical under point permutation.
Eigen::Vector3d canonical_mean(const Eigen::Matrix3Xd& columns, const std::vector<int>& indices) {
  std::vector<int> order(indices);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int axis = 0; axis < 3; ++axis) {
      if (columns(axis, a) != columns(axis, b)) return columns(axis, a) < columns(axis, b);
    }
    return false;
  });
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int i : order) sum += columns.col(i);
  return sum / static_cast<double>(order.size());
}

std::vector<int> all_indices(Eigen::Index n) {
  std::vector<int> indices(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return indices;
}

}  // namespace

int descriptor_length(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::kCvfh: return kCvfhLength;
    case DescriptorKind::kHsv: return kHsvLength;
    case DescriptorKind::kColorCvfh: return kColorCvfhLength;
  }
  return 0;
}

const char* descriptor_kind_name(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::kCvfh: return "cvfh";
    case DescriptorKind::kHsv: return "hsv";
    case DescriptorKind::kColorCvfh: return "colorcvfh";
  }
  return "?";
}

DescriptorKind parse_descriptor_kind(const std::string& name) {
  if (name == "cvfh") return DescriptorKind::kCvfh;
  if (name == "hsv") return DescriptorKind::kHsv;
  if (name == "colorcvfh") return DescriptorKind::kColorCvfh;
  fail(errc::io_error, "unknown descriptor kind '" + name + "'");
}

LocalFrame local_frame(const Eigen::Vector3d& p_i, const Eigen::Vector3d& p_c,
                       const Eigen::Vector3d& n_c) {
  const Eigen::Vector3d diff = p_i - p_c;
  const double norm = diff.norm();
  if (!(norm > 0.0)) fail(errc::coincident_point, "point coincides with the frame centroid");
  const Eigen::Vector3d direction = diff / norm;
  const Eigen::Vector3d cross = direction.cross(n_c);
  if (cross.squaredNorm() < 1e-18)
    fail(errc::parallel_direction, "centroid-to-point direction parallel to the centroid normal");
  LocalFrame frame;
  frame.u = n_c;
  frame.v = cross.normalized();
  frame.w = frame.u.cross(frame.v);
  return frame;
}

AngularFeatures angular_features(const Eigen::Vector3d& p_i, const Eigen::Vector3d& n_i,
                                 const Eigen::Vector3d& p_c, const Eigen::Vector3d& n_c) {
  const LocalFrame frame = local_frame(p_i, p_c, n_c);
  const double pc_norm = p_c.norm();
  if (!(pc_norm > 0.0)) fail(errc::zero_centroid, "centroid at the sensor origin");
  AngularFeatures features;
  features.cos_alpha = frame.v.dot(n_i);
  features.cos_beta = n_i.dot(p_c / pc_norm);
  features.cos_phi = frame.u.dot((p_i - p_c).normalized());
  features.theta = std::atan2(frame.w.dot(n_i), frame.u.dot(n_i));
  return features;
}

Eigen::VectorXd sdc_values(const ColorPointCloud& cloud, const Eigen::Vector3d& p_c) {
  if (cloud.empty()) fail(errc::empty_cloud, "SDC of an empty cloud");
  Eigen::VectorXd squared(cloud.size());
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    squared[i] = (p_c - cloud.points.col(i)).squaredNorm();
  const double max = squared.maxCoeff();
  if (!(max > 0.0)) fail(errc::all_coincident, "every point coincides with the centroid");
  return squared / max;
}

std::vector<SmoothRegion> smooth_region_growing(const ColorPointCloud& cloud,
                                                const NormalSet& normals,
                                                const RegionGrowingParams& params) {
  const Eigen::Index n = cloud.size();
  if (normals.size() != n)
    fail(errc::dimension_mismatch, "normal set not aligned with the cloud");
  std::vector<SmoothRegion> regions;
  if (n == 0 || n < params.adjacency_k) return regions;

  const auto neighbors = nearest_neighbors(cloud.points, params.adjacency_k);
  const double cos_threshold = std::cos(params.angle_threshold);

  std::vector<int> seed_order = all_indices(n);
  std::sort(seed_order.begin(), seed_order.end(), [&](int a, int b) {
    if (normals.curvatures[a] != normals.curvatures[b])
      return normals.curvatures[a] < normals.curvatures[b];
    return a < b;
  });

  std::vector<std::uint8_t> assigned(static_cast<std::size_t>(n), 0);
  for (int seed : seed_order) {
    if (assigned[static_cast<std::size_t>(seed)]) continue;
    if (normals.curvatures[seed] > params.curvature_threshold) continue;

    std::vector<int> members{seed};
    std::deque<int> queue{seed};
    assigned[static_cast<std::size_t>(seed)] = 1;
    while (!queue.empty()) {
      const int current = queue.front();
      queue.pop_front();
      for (int j : neighbors[static_cast<std::size_t>(current)]) {
        if (assigned[static_cast<std::size_t>(j)]) continue;
        if (normals.normals.col(current).dot(normals.normals.col(j)) < cos_threshold) continue;
        assigned[static_cast<std::size_t>(j)] = 1;
        members.push_back(j);
        if (normals.curvatures[j] <= params.curvature_threshold) queue.push_back(j);
      }
    }

    if (static_cast<int>(members.size()) < params.min_region) continue;
    std::sort(members.begin(), members.end());
    SmoothRegion region;
    region.region_centroid = canonical_mean(cloud.points, members);
    region.dominant_normal = canonical_mean(normals.normals, members);
    const double norm = region.dominant_normal.norm();
    region.dominant_normal = norm > 0.0 ? Eigen::Vector3d(region.dominant_normal / norm)
                                        : Eigen::Vector3d(normals.normals.col(members.front()));
    region.indices = std::move(members);
    regions.push_back(std::move(region));
  }

  std::sort(regions.begin(), regions.end(), [](const SmoothRegion& a, const SmoothRegion& b) {
    if (a.indices.size() != b.indices.size()) return a.indices.size() > b.indices.size();
    for (int axis = 0; axis < 3; ++axis) {
      if (a.region_centroid[axis] != b.region_centroid[axis])
        return a.region_centroid[axis] < b.region_centroid[axis];
    }
    return false;
  });
  return regions;
}

Descriptor cvfh(const ColorPointCloud& cloud, const NormalSet& normals,
                const RegionGrowingParams& params, DescriptorStats* stats) {
  const Eigen::Index n = cloud.size();
  if (n < 2) fail(errc::too_few_points, "shape histogram needs at least 2 points");
  if (normals.size() != n)
    fail(errc::dimension_mismatch, "normal set not aligned with the cloud");

  const auto regions = smooth_region_growing(cloud, normals, params);
  std::vector<int> frame_indices = regions.empty() ? all_indices(n) : regions.front().indices;

  // All geometry is taken in the sensor frame so the viewpoint component
  // measures the direction from the capture origin to the centroid.
  const Eigen::Vector3d vp = cloud.sensor_viewpoint;
  const Eigen::Vector3d centroid_world = canonical_mean(cloud.points, frame_indices);
  const Eigen::Vector3d p_c = centroid_world - vp;
  Eigen::Vector3d n_c = canonical_mean(normals.normals, frame_indices);
  const double n_c_norm = n_c.norm();
  n_c = n_c_norm > 0.0 ? Eigen::Vector3d(n_c / n_c_norm)
                       : Eigen::Vector3d(normals.normals.col(frame_indices.front()));
  if (!(p_c.norm() > 0.0)) fail(errc::zero_centroid, "region centroid at the sensor origin");

  const Eigen::VectorXd sdc = sdc_values(cloud, centroid_world);

  // Integer bin counts keep the histogram exact under point reordering.
  Eigen::VectorXd values = Eigen::VectorXd::Zero(kCvfhLength);
  const int off_alpha = 0;
  const int off_phi = kAngleBins;
  const int off_theta = 2 * kAngleBins;
  const int off_sdc = 3 * kAngleBins;
  const int off_view = 4 * kAngleBins;

  Eigen::Index skipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    values[off_sdc + bin_unit(sdc[i], kAngleBins)] += 1.0;
    try {
      const AngularFeatures f =
          angular_features(cloud.points.col(i) - vp, normals.normals.col(i), p_c, n_c);
      values[off_alpha + bin_symmetric(f.cos_alpha, kAngleBins)] += 1.0;
      values[off_phi + bin_symmetric(f.cos_phi, kAngleBins)] += 1.0;
      values[off_theta + bin_angle(f.theta, kAngleBins)] += 1.0;
      values[off_view + bin_symmetric(f.cos_beta, kViewpointBins)] += 1.0;
    } catch (const Error& e) {
      if (e.code() != errc::coincident_point && e.code() != errc::parallel_direction) throw;
      ++skipped;
    }
  }

  normalize_block(values, off_alpha, kAngleBins);
  normalize_block(values, off_phi, kAngleBins);
  normalize_block(values, off_theta, kAngleBins);
  normalize_block(values, off_sdc, kAngleBins);
  normalize_block(values, off_view, kViewpointBins);

  if (stats) stats->skipped_points = skipped;
  return {DescriptorKind::kCvfh, std::move(values)};
}

Hsv rgb_to_hsv(int r, int g, int b) {
  const double rf = r / 255.0;
  const double gf = g / 255.0;
  const double bf = b / 255.0;
  const double max = std::max({rf, gf, bf});
  const double min = std::min({rf, gf, bf});
  const double delta = max - min;

  Hsv hsv;
  hsv.v = max;
  hsv.s = max > 0.0 ? delta / max : 0.0;
  if (delta > 0.0) {
    if (max == rf) {
      hsv.h = 60.0 * ((gf - bf) / delta);
    } else if (max == gf) {
      hsv.h = 60.0 * ((bf - rf) / delta + 2.0);
    } else {
      hsv.h = 60.0 * ((rf - gf) / delta + 4.0);
    }
    if (hsv.h < 0.0) hsv.h += 360.0;
    if (hsv.h >= 360.0) hsv.h -= 360.0;
  }
  return hsv;
}

Descriptor hsv_histogram(const ColorPointCloud& cloud) {
  if (cloud.empty()) fail(errc::empty_cloud, "color histogram of an empty cloud");

  Eigen::VectorXd values = Eigen::VectorXd::Zero(kHsvLength);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Hsv hsv = rgb_to_hsv(cloud.colors(0, i), cloud.colors(1, i), cloud.colors(2, i));
    values[clamp_bin(static_cast<int>(std::floor(hsv.h / 360.0 * kHueBins)), kHueBins)] += 1.0;
    values[kHueBins + bin_unit(hsv.s, kSaturationBins)] += 1.0;
    values[kHueBins + kSaturationBins + bin_unit(hsv.v, kValueBins)] += 1.0;
  }
  normalize_block(values, 0, kHueBins);
  normalize_block(values, kHueBins, kSaturationBins);
  normalize_block(values, kHueBins + kSaturationBins, kValueBins);
  return {DescriptorKind::kHsv, std::move(values)};
}

Descriptor color_cvfh(const ColorPointCloud& cloud, const NormalSet& normals,
                      const RegionGrowingParams& params, DescriptorStats* stats) {
  const Descriptor color = hsv_histogram(cloud);
  const Descriptor shape = cvfh(cloud, normals, params, stats);
  Eigen::VectorXd values(kColorCvfhLength);
  values.head(kHsvLength) = color.values;
  values.tail(kCvfhLength) = shape.values;
  return {DescriptorKind::kColorCvfh, std::move(values)};
}

std::string format_descriptor_line(const std::string& label, const Descriptor& descriptor) {
  std::string line = label;
  line += ' ';
  line += descriptor_kind_name(descriptor.kind);
  char buf[32];
  for (Eigen::Index i = 0; i < descriptor.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.9g", descriptor.values[i]);
    line += buf;
  }
  return line;
}

std::vector<LabeledDescriptor> read_descriptor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");
  std::vector<LabeledDescriptor> result;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream tokens(line);
    LabeledDescriptor item;
    std::string kind;
    if (!(tokens >> item.label >> kind))
      fail(errc::io_error, "descriptor line needs '<label> <kind> <values...>'");
    item.descriptor.kind = parse_descriptor_kind(kind);
    const int length = descriptor_length(item.descriptor.kind);
    item.descriptor.values.resize(length);
    for (int i = 0; i < length; ++i) {
      if (!(tokens >> item.descriptor.values[i]))
        fail(errc::io_error, "descriptor line for '" + item.label + "' is shorter than " +
                                 std::to_string(length) + " values");
    }
    double extra;
    if (tokens >> extra)
      fail(errc::io_error, "descriptor line for '" + item.label + "' has trailing values");
    result.push_back(std::move(item));
  }
  return result;
}

}  // namespace cloudsort
