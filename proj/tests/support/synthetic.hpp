#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cloudsort/point_cloud.hpp"

namespace cloudsort::testsupport {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

double gaussian(std::mt19937& rng);
Eigen::Matrix3d random_rotation(std::mt19937& rng);

// Surface samplers, centered at the origin with a default viewpoint above.
ColorPointCloud sample_plane_patch(int n, double size, std::mt19937& rng);
ColorPointCloud sample_sphere(int n, double radius, std::mt19937& rng);
ColorPointCloud sample_cylinder(int n, double radius, double height, std::mt19937& rng);
ColorPointCloud sample_box(int n, const Eigen::Vector3d& dims, std::mt19937& rng);

// Uniform points in a cube with random colors.
ColorPointCloud random_blob(int n, double extent, std::mt19937& rng);

void paint(ColorPointCloud& cloud, std::uint8_t r, std::uint8_t g, std::uint8_t b);
void translate(ColorPointCloud& cloud, const Eigen::Vector3d& offset);
void add_position_jitter(ColorPointCloud& cloud, double sigma, std::mt19937& rng);
void add_channel_noise(ColorPointCloud& cloud, double fraction, std::mt19937& rng);

// Concatenation; viewpoint taken from the first part.
ColorPointCloud concat(const std::vector<ColorPointCloud>& parts);

// The 4-shape x 3-color benchmark family: `per_class` clouds per combination
// with the given position jitter and color channel noise.
struct SyntheticSample {
  ColorPointCloud cloud;
  std::string shape;
  std::string color;
  std::string shape_color;  // "<shape>_<color>"
};

std::vector<SyntheticSample> make_shape_color_dataset(int per_class, double jitter_sigma,
                                                      double channel_noise, std::uint32_t seed);

// Independent union-find connected components under a distance threshold,
// canonicalized as ascending-index clusters ordered by first index. No size
// filtering.
std::vector<std::vector<int>> connected_components_oracle(const Eigen::Matrix3Xd& points,
                                                          double distance);

// Bitwise equality of two Eigen expressions.
template <class A, class B>
bool exact_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

}  // namespace cloudsort::testsupport
