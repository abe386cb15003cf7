#pragma once

#include "cloudsort/point_cloud.hpp"

namespace cloudsort {

// Per-point surface normal from the covariance of the k nearest neighbors
// (self included): the eigenvector of the smallest eigenvalue, oriented so
// n . (sensor_viewpoint - p) >= 0. Curvature is l0/(l0+l1+l2). A fully
// coincident neighborhood yields the flagged (0,0,1) sentinel with curvature
// 0 instead of an error, so one bad point cannot abort a scene.
NormalSet estimate_normals(const ColorPointCloud& cloud, int k = 10);

}  // namespace cloudsort
