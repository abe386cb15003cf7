#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "cloudsort/point_cloud.hpp"

namespace cloudsort {

enum class DescriptorKind { kCvfh, kHsv, kColorCvfh };

// Histogram layout. The shape histogram concatenates three 45-bin angular
// blocks, a 45-bin shape-distribution block and a 128-bin viewpoint block;
// the color histogram concatenates 90 hue, 51 saturation and 51 value bins.
inline constexpr int kHueBins = 90;
inline constexpr int kSaturationBins = 51;
inline constexpr int kValueBins = 51;
inline constexpr int kAngleBins = 45;
inline constexpr int kViewpointBins = 128;
inline constexpr int kCvfhLength = 4 * kAngleBins + kViewpointBins;            // 308
inline constexpr int kHsvLength = kHueBins + kSaturationBins + kValueBins;     // 192
inline constexpr int kColorCvfhLength = kHsvLength + kCvfhLength;              // 500

int descriptor_length(DescriptorKind kind);
const char* descriptor_kind_name(DescriptorKind kind);  // "cvfh" | "hsv" | "colorcvfh"
DescriptorKind parse_descriptor_kind(const std::string& name);

// Fixed-length feature vector; every entry is >= 0 and each layout sub-block
// sums to 1 or is all zero.
struct Descriptor {
  DescriptorKind kind = DescriptorKind::kCvfh;
  Eigen::VectorXd values;
};

// Orthonormal per-point frame: u is the region normal, v the normalized cross
// of the centroid-to-point direction with u, w completes the triad.
struct LocalFrame {
  Eigen::Vector3d u, v, w;
};

// The four angular deviations accumulated into the shape histogram.
struct AngularFeatures {
  double cos_alpha = 0;  // v . n_i
  double cos_beta = 0;   // n_i . p_c/|p_c|
  double cos_phi = 0;    // u . (p_i-p_c)/|p_i-p_c|
  double theta = 0;      // atan2(w . n_i, u . n_i), in (-pi, pi]
};

// Throws CoincidentPoint when p_i == p_c and ParallelDirection when p_i-p_c
// is parallel to n_c (v undefined); callers skip such points.
LocalFrame local_frame(const Eigen::Vector3d& p_i, const Eigen::Vector3d& p_c,
                       const Eigen::Vector3d& n_c);

AngularFeatures angular_features(const Eigen::Vector3d& p_i, const Eigen::Vector3d& n_i,
                                 const Eigen::Vector3d& p_c, const Eigen::Vector3d& n_c);

// Per-point squared distance to p_c divided by the maximum squared distance;
// all values in [0,1] with the maximum exactly 1. AllCoincident when the
// maximum is zero.
Eigen::VectorXd sdc_values(const ColorPointCloud& cloud, const Eigen::Vector3d& p_c);

struct SmoothRegion {
  std::vector<int> indices;  // ascending
  Eigen::Vector3d dominant_normal;
  Eigen::Vector3d region_centroid;
};

struct RegionGrowingParams {
  double angle_threshold = 0.1047;   // radians, ~6 degrees
  double curvature_threshold = 0.025;
  int min_region = 50;
  int adjacency_k = 10;  // neighbor graph shared with normal estimation
};

// Seeded region growing over the k-NN graph: seeds are taken in ascending
// curvature order, a neighbor joins when its normal deviates from the
// expanding point's normal by at most angle_threshold, and points above the
// curvature threshold may join but never expand. Regions below min_region are
// dropped. Result ordered by (size desc, centroid lexicographic).
std::vector<SmoothRegion> smooth_region_growing(const ColorPointCloud& cloud,
                                                const NormalSet& normals,
                                                const RegionGrowingParams& params = {});

struct DescriptorStats {
  Eigen::Index skipped_points = 0;  // coincident/parallel points left out of the angular blocks
};

// 308-bin shape histogram [cos_alpha | cos_phi | theta | SDC | viewpoint].
// The frame centroid and normal come from the largest smooth region (whole
// cloud when none forms); features accumulate over every cloud point, with
// degenerate points skipped and counted.
Descriptor cvfh(const ColorPointCloud& cloud, const NormalSet& normals,
                const RegionGrowingParams& params = {}, DescriptorStats* stats = nullptr);

struct Hsv {
  double h = 0;  // degrees in [0, 360)
  double s = 0;  // [0, 1]
  double v = 0;  // [0, 1]
};

// Standard hexcone conversion; hue is 0 when saturation is 0.
Hsv rgb_to_hsv(int r, int g, int b);

// 192-bin color histogram [hue | saturation | value], each block normalized
// to unit sum; the last saturation/value bin is closed at 1.
Descriptor hsv_histogram(const ColorPointCloud& cloud);

// 500-bin concatenation [HSV | CVFH] with sub-block normalization preserved.
Descriptor color_cvfh(const ColorPointCloud& cloud, const NormalSet& normals,
                      const RegionGrowingParams& params = {}, DescriptorStats* stats = nullptr);

// Training-file line: "<label> <kind> <v0> ... <vN-1>", 9 significant digits.
std::string format_descriptor_line(const std::string& label, const Descriptor& descriptor);

struct LabeledDescriptor {
  std::string label;
  Descriptor descriptor;
};

std::vector<LabeledDescriptor> read_descriptor_file(const std::string& path);

}  // namespace cloudsort
