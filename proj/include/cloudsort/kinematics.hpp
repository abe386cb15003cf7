#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace cloudsort {

// Rigid transform as a 4x4 homogeneous matrix: orthonormal rotation block
// with det +1 and bottom row (0,0,0,1).
using Pose = Eigen::Matrix4d;

bool is_rigid_transform(const Pose& pose, double tol = 1e-9);

// Standard (distal) D-H link rows: a (link length, m), d (link offset, m),
// alpha (link twist, rad) for joints 1..6. The numeric table is configuration
// data; ur5() carries the manufacturer defaults.
struct DHParameters {
  Eigen::Matrix<double, 6, 1> a;
  Eigen::Matrix<double, 6, 1> d;
  Eigen::Matrix<double, 6, 1> alpha;

  static DHParameters ur5();
};

// File format: 6 lines "a_i d_i alpha_i", '#' comments allowed.
DHParameters load_dh_table(const std::string& path);
void save_dh_table(const DHParameters& dh, const std::string& path);

// Wrap into (-pi, pi].
double wrap_angle(double angle);

struct JointConfig {
  Eigen::Matrix<double, 6, 1> theta = Eigen::Matrix<double, 6, 1>::Zero();
};

JointConfig normalized(const JointConfig& q);

// Rot_z(theta) * Trans_z(d) * Trans_x(a) * Rot_x(alpha).
Pose dh_link_transform(double a, double d, double alpha, double theta);

Pose forward_kinematics(const JointConfig& q, const DHParameters& dh = DHParameters::ur5());

// Closed-form solutions for the UR wrist structure (a1=a4=a5=a6=0, d2=d3=0,
// twists pi/2,0,0,pi/2,-pi/2,0). Every branch of shoulder {left,right} x
// wrist {flip,no-flip} x elbow {up,down} with inverse-trig arguments inside
// [-1-eps, 1+eps] (eps=1e-9, clamped at the boundary) is returned, normalized
// and verified against forward kinematics within 1e-6. An empty list means
// the target is unreachable. At a wrist singularity (theta5 ~ 0) theta6 is
// pinned to 0 per branch and the result is flagged.
struct IkSolutions {
  std::vector<JointConfig> configs;
  bool wrist_singular = false;
};

IkSolutions inverse_kinematics(const Pose& target, const DHParameters& dh = DHParameters::ur5());

// The solution minimizing the summed wrapped joint distance to `current`;
// ties keep list order. Throws NoSolutions on an empty list.
JointConfig select_solution(const std::vector<JointConfig>& solutions, const JointConfig& current);

// Grasp pose above a point: translation = centroid + standoff*approach, tool
// z-axis aligned with -approach, x-axis from world x projected off the
// approach direction (world y when parallel).
Pose grasp_target(const Eigen::Vector3d& object_centroid, const Eigen::Vector3d& approach,
                  double standoff);

}  // namespace cloudsort
