#include "cloudsort/normals.hpp"

#include <Eigen/Dense>
#include <string>

#include "cloudsort/error.hpp"

namespace cloudsort {

NormalSet estimate_normals(const ColorPointCloud& cloud, int k) {
  const Eigen::Index n = cloud.size();
  if (k < 2) fail(errc::too_few_points, "normal estimation needs k >= 2");
  if (n < k)
    fail(errc::too_few_points,
         "cloud of " + std::to_string(n) + " points cannot supply k=" + std::to_string(k) +
             " neighbors");

  const auto neighbors = nearest_neighbors(cloud.points, k);

  NormalSet result;
  result.normals.resize(3, n);
  result.curvatures.resize(n);
  result.degenerate.assign(static_cast<std::size_t>(n), 0);

  Eigen::Matrix3Xd patch(3, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& idx = neighbors[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) patch.col(j) = cloud.points.col(idx[static_cast<std::size_t>(j)]);
    const Eigen::Vector3d mean = patch.rowwise().mean();
    const Eigen::Matrix3Xd centered = patch.colwise() - mean;
    const Eigen::Matrix3d cov = centered * centered.transpose() / static_cast<double>(k);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d lambda = solver.eigenvalues().cwiseMax(0.0);  // ascending
    const double total = lambda.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
      result.normals.col(i) = Eigen::Vector3d::UnitZ();
      result.curvatures[i] = 0.0;
      result.degenerate[static_cast<std::size_t>(i)] = 1;
      continue;
    }

    Eigen::Vector3d normal = solver.eigenvectors().col(0);
    if (normal.dot(cloud.sensor_viewpoint - cloud.points.col(i)) < 0.0) normal = -normal;
    result.normals.col(i) = normal.normalized();
    result.curvatures[i] = lambda[0] / total;
  }
  return result;
}

}  // namespace cloudsort
