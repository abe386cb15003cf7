#include <doctest.h>

#include <Eigen/Geometry>
#include <fstream>
#include <random>
#include <sstream>

#include "cloudsort/error.hpp"
#include "cloudsort/normals.hpp"
#include "cloudsort/pcd_io.hpp"
#include "cloudsort/point_cloud.hpp"
#include "cloudsort/rng.hpp"
#include "support/synthetic.hpp"

using namespace cloudsort;
using namespace cloudsort::testsupport;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string pcd_header(int n, const std::string& rgb_type = "F",
                       const std::string& viewpoint = "0 0 0 1 0 0 0") {
  std::ostringstream out;
  out << "VERSION .7\n"
      << "FIELDS x y z rgb\n"
      << "SIZE 4 4 4 4\n"
      << "TYPE F F F " << rgb_type << "\n"
      << "COUNT 1 1 1 1\n"
      << "WIDTH " << n << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT " << viewpoint << "\n"
      << "POINTS " << n << "\n"
      << "DATA ascii\n";
  return out.str();
}

}  // namespace

TEST_CASE("load_pcd unpacks the packed-float rgb convention") {
  TempDir dir;
  const std::string path = dir.file("one.pcd");
  write_file(path, pcd_header(1) + "0 0 1 4.2108e+06\n");

  PcdLoadStats stats;
  const ColorPointCloud cloud = load_pcd(path, &stats);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points.col(0).isApprox(Eigen::Vector3d(0, 0, 1)));
  // 4.2108e+06 == 4210800 == 0x404070 -> (64, 64, 112), frozen independently.
  CHECK(cloud.colors(0, 0) == 64);
  CHECK(cloud.colors(1, 0) == 64);
  CHECK(cloud.colors(2, 0) == 112);
  CHECK(stats.declared_points == 1);
  CHECK(stats.skipped_nonfinite == 0);
}

TEST_CASE("load_pcd accepts the unsigned-integer rgb form") {
  TempDir dir;
  const std::string path = dir.file("uint.pcd");
  write_file(path, pcd_header(1, "U") + "1 2 3 4210800\n");
  const ColorPointCloud cloud = load_pcd(path);
  CHECK(cloud.colors(0, 0) == 64);
  CHECK(cloud.colors(1, 0) == 64);
  CHECK(cloud.colors(2, 0) == 112);
}

TEST_CASE("load_pcd handles POINTS 0") {
  TempDir dir;
  const std::string path = dir.file("empty.pcd");
  write_file(path, pcd_header(0));
  CHECK(load_pcd(path).empty());
}

TEST_CASE("load_pcd rejects binary encoding") {
  TempDir dir;
  const std::string path = dir.file("bin.pcd");
  std::string content = pcd_header(1);
  content.replace(content.find("DATA ascii"), 10, "DATA binary");
  write_file(path, content);
  CHECK_THROWS_WITH_AS(load_pcd(path), doctest::Contains("UnsupportedEncoding"), Error);
}

TEST_CASE("load_pcd rejects missing and out-of-order header lines") {
  TempDir dir;
  const std::string path = dir.file("bad.pcd");

  std::string content = pcd_header(1) + "0 0 0 0\n";
  content.erase(content.find("WIDTH 1\n"), 8);
  write_file(path, content);
  CHECK_THROWS_AS(load_pcd(path), Error);

  // duplicated VERSION where FIELDS should be
  write_file(path, "VERSION .7\nVERSION .7\n" + pcd_header(0).substr(11));
  CHECK_THROWS_WITH_AS(load_pcd(path), doctest::Contains("MalformedHeader"), Error);
}

TEST_CASE("load_pcd requires x y z fields") {
  TempDir dir;
  const std::string path = dir.file("fields.pcd");
  std::string content = pcd_header(0);
  content.replace(content.find("FIELDS x y z rgb"), 16, "FIELDS x y nope rgb");
  write_file(path, content);
  CHECK_THROWS_WITH_AS(load_pcd(path), doctest::Contains("FieldMismatch"), Error);
}

TEST_CASE("load_pcd skips NaN rows with a count") {
  TempDir dir;
  const std::string path = dir.file("nan.pcd");
  write_file(path, pcd_header(3) + "0 0 0 0\nnan nan nan 0\n1 1 1 0\n");
  PcdLoadStats stats;
  const ColorPointCloud cloud = load_pcd(path, &stats);
  CHECK(cloud.size() == 2);
  CHECK(stats.declared_points == 3);
  CHECK(stats.skipped_nonfinite == 1);
}

TEST_CASE("load_pcd reads the viewpoint translation") {
  TempDir dir;
  const std::string path = dir.file("vp.pcd");
  write_file(path, pcd_header(0, "F", "0.5 -1 2 1 0 0 0"));
  CHECK(load_pcd(path).sensor_viewpoint.isApprox(Eigen::Vector3d(0.5, -1, 2)));
}

TEST_CASE("save_pcd writes POINTS 0 for an empty cloud") {
  TempDir dir;
  const std::string path = dir.file("empty_out.pcd");
  save_pcd(ColorPointCloud{}, path);
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find("POINTS 0") != std::string::npos);
  CHECK(load_pcd(path).empty());
}

TEST_CASE("save_pcd writes rgb as the unsigned integer") {
  TempDir dir;
  const std::string path = dir.file("rgb_out.pcd");
  ColorPointCloud cloud = from_points({{{0.25, 0.5, 1.0}, 64, 64, 112}});
  save_pcd(cloud, path);
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && line != "DATA ascii") {
  }
  std::getline(in, line);
  CHECK(line == "0.25 0.5 1 4210800");
}

TEST_CASE("pcd round trip: 1000 random points") {
  TempDir dir;
  std::mt19937 rng(7);
  ColorPointCloud cloud = random_blob(1000, 2.0, rng);
  cloud.sensor_viewpoint = Eigen::Vector3d(0.1, 0.2, 0.3);
  const std::string path = dir.file("roundtrip.pcd");
  save_pcd(cloud, path);
  const ColorPointCloud loaded = load_pcd(path);
  REQUIRE(loaded.size() == cloud.size());
  CHECK((loaded.points - cloud.points).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(loaded.colors == cloud.colors);
  CHECK((loaded.sensor_viewpoint - cloud.sensor_viewpoint).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("centroid basics") {
  CHECK(centroid(from_points({{{0, 0, 0}}, {{2, 0, 0}}})).isApprox(Eigen::Vector3d(1, 0, 0)));
  const Eigen::Vector3d p(0.3, -0.4, 2.0);
  CHECK(centroid(from_points({{p}})).isApprox(p));
  CHECK_THROWS_WITH_AS(centroid(ColorPointCloud{}), doctest::Contains("EmptyCloud"), Error);
}

TEST_CASE("centroid matches naive summation within 1e-12") {
  std::mt19937 rng(11);
  const ColorPointCloud cloud = random_blob(100, 0.5, rng);
  Eigen::Vector3d naive = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < cloud.size(); ++i) naive += cloud.points.col(i);
  naive /= static_cast<double>(cloud.size());
  CHECK((centroid(cloud) - naive).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normals on a planar grid are the plane normal with zero curvature") {
  std::vector<ColorPoint> pts;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) pts.push_back({{0.01 * i, 0.01 * j, 0.0}, 0, 0, 0});
  }
  const ColorPointCloud cloud = from_points(pts, Eigen::Vector3d(0, 0, 1));
  const NormalSet normals = estimate_normals(cloud, 8);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    CHECK((normals.normals.col(i) - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(normals.curvatures[i] < 1e-9);
  }
}

TEST_CASE("normals on a sphere stay within 5 degrees of radial") {
  std::mt19937 rng(3);
  ColorPointCloud cloud = sample_sphere(3000, 1.0, rng);
  cloud.sensor_viewpoint = Eigen::Vector3d(0, 0, 10);
  const NormalSet normals = estimate_normals(cloud, 10);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (cloud.points(2, i) < 0.2) continue;  // visible hemisphere only
    const Eigen::Vector3d radial = cloud.points.col(i).normalized();
    const double cosine = std::abs(normals.normals.col(i).dot(radial));
    CHECK(cosine > std::cos(5.0 * M_PI / 180.0));
  }
}

TEST_CASE("coincident neighborhoods produce the flagged sentinel") {
  const ColorPointCloud cloud = from_points({{{1, 2, 3}}, {{1, 2, 3}}});
  const NormalSet normals = estimate_normals(cloud, 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(normals.degenerate[static_cast<std::size_t>(i)] == 1);
    CHECK(normals.normals.col(i) == Eigen::Vector3d(0, 0, 1));
    CHECK(normals.curvatures[i] == 0.0);
  }
}

TEST_CASE("estimate_normals rejects clouds smaller than k") {
  const ColorPointCloud cloud = from_points({{{0, 0, 0}}, {{1, 0, 0}}});
  CHECK_THROWS_WITH_AS(estimate_normals(cloud, 5), doctest::Contains("TooFewPoints"), Error);
}

TEST_CASE("normal invariants: unit length and viewpoint orientation") {
  std::mt19937 rng(19);
  ColorPointCloud cloud = random_blob(200, 0.3, rng);
  cloud.sensor_viewpoint = Eigen::Vector3d(0.2, -0.1, 1.5);
  const NormalSet normals = estimate_normals(cloud, 10);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs(normals.normals.col(i).norm() - 1.0) < 1e-9);
    CHECK(normals.normals.col(i).dot(cloud.sensor_viewpoint - cloud.points.col(i)) >= 0.0);
    CHECK(normals.curvatures[i] >= 0.0);
    CHECK(normals.curvatures[i] <= 1.0 / 3.0 + 1e-12);
  }
}

TEST_CASE("normals are equivariant under rigid rotation") {
  std::mt19937 rng(23);
  ColorPointCloud cloud = random_blob(150, 0.4, rng);
  cloud.sensor_viewpoint = Eigen::Vector3d(0, 0, 2);
  const NormalSet base = estimate_normals(cloud, 10);

  const Eigen::Matrix3d rotation = random_rotation(rng);
  ColorPointCloud rotated = cloud;
  rotated.points = rotation * cloud.points;
  rotated.sensor_viewpoint = rotation * cloud.sensor_viewpoint;
  const NormalSet moved = estimate_normals(rotated, 10);

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    CHECK((moved.normals.col(i) - rotation * base.normals.col(i)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("grid and brute-force k-NN agree exactly") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 200 + trial * 150;
    const ColorPointCloud cloud = random_blob(n, 0.5, rng);
    const int k = 1 + static_cast<int>(uniform_index(rng, 12));
    const auto brute = detail::knn_brute_force(cloud.points, k);
    const auto grid = detail::knn_grid(cloud.points, k);
    REQUIRE(brute.size() == grid.size());
    for (std::size_t i = 0; i < brute.size(); ++i) CHECK(brute[i] == grid[i]);
  }
}

TEST_CASE("grid k-NN handles clouds with duplicated points") {
  std::mt19937 rng(37);
  ColorPointCloud cloud = random_blob(120, 0.2, rng);
  for (Eigen::Index i = 0; i < 40; ++i) cloud.points.col(i) = cloud.points.col(i + 40);
  const auto brute = detail::knn_brute_force(cloud.points, 6);
  const auto grid = detail::knn_grid(cloud.points, 6);
  for (std::size_t i = 0; i < brute.size(); ++i) CHECK(brute[i] == grid[i]);
}

TEST_CASE("select checks index bounds") {
  const ColorPointCloud cloud = from_points({{{0, 0, 0}}});
  CHECK_THROWS_WITH_AS(select(cloud, {1}), doctest::Contains("IndexOutOfRange"), Error);
}
