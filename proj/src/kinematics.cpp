#include "cloudsort/kinematics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "cloudsort/error.hpp"

namespace cloudsort {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampEps = 1e-9;    // slack on inverse-trig arguments
constexpr double kSingularSin = 1e-6; // |sin(theta5)| below this is wrist-singular
constexpr double kFkVerifyTol = 1e-6;
constexpr double kDistinctTol = 1e-6;

// Returns false when the argument is outside [-1-eps, 1+eps]; otherwise
// clamps into [-1, 1].
bool clamp_unit(double& value) {
  if (value > 1.0 + kClampEps || value < -1.0 - kClampEps) return false;
  value = std::clamp(value, -1.0, 1.0);
  return true;
}

}  // namespace

bool is_rigid_transform(const Pose& pose, double tol) {
  const Eigen::Matrix3d r = pose.topLeftCorner<3, 3>();
  if (((r.transpose() * r) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(r.determinant() - 1.0) > 10.0 * tol) return false;
  return pose(3, 0) == 0.0 && pose(3, 1) == 0.0 && pose(3, 2) == 0.0 && pose(3, 3) == 1.0;
}

DHParameters DHParameters::ur5() {
  DHParameters dh;
  dh.a << 0.0, -0.425, -0.39225, 0.0, 0.0, 0.0;
  dh.d << 0.089159, 0.0, 0.0, 0.10915, 0.09465, 0.0823;
  dh.alpha << kPi / 2.0, 0.0, 0.0, kPi / 2.0, -kPi / 2.0, 0.0;
  return dh;
}

DHParameters load_dh_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "' for reading");
  DHParameters dh;
  int row = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    double a, d, alpha;
    if (!(tokens >> a >> d >> alpha)) continue;  // blank or comment-only line
    if (row >= 6) fail(errc::io_error, "D-H table has more than 6 rows");
    dh.a[row] = a;
    dh.d[row] = d;
    dh.alpha[row] = alpha;
    ++row;
  }
  if (row != 6) fail(errc::io_error, "D-H table has " + std::to_string(row) + " rows, expected 6");
  return dh;
}

void save_dh_table(const DHParameters& dh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open '" + path + "' for writing");
  out << "# a_i d_i alpha_i\n";
  char buf[96];
  for (int i = 0; i < 6; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", dh.a[i], dh.d[i], dh.alpha[i]);
    out << buf;
  }
  if (!out) fail(errc::io_error, "failed writing '" + path + "'");
}

double wrap_angle(double angle) {
  double r = std::fmod(angle + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

JointConfig normalized(const JointConfig& q) {
  JointConfig out;
  for (int i = 0; i < 6; ++i) out.theta[i] = wrap_angle(q.theta[i]);
  return out;
}

Pose dh_link_transform(double a, double d, double alpha, double theta) {
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  Pose t;
  t << ct, -st * ca, st * sa, a * ct,
       st, ct * ca, -ct * sa, a * st,
       0.0, sa, ca, d,
       0.0, 0.0, 0.0, 1.0;
  return t;
}

Pose forward_kinematics(const JointConfig& q, const DHParameters& dh) {
  Pose t = Pose::Identity();
  for (int i = 0; i < 6; ++i)
    t = t * dh_link_transform(dh.a[i], dh.d[i], dh.alpha[i], q.theta[i]);
  return t;
}

IkSolutions inverse_kinematics(const Pose& target, const DHParameters& dh) {
  const double a2 = dh.a[1];
  const double a3 = dh.a[2];
  const double d4 = dh.d[3];
  const double d6 = dh.d[5];

  IkSolutions result;
  const Eigen::Vector3d p = target.block<3, 1>(0, 3);
  const Eigen::Vector3d z6 = target.block<3, 1>(0, 2);

  // Origin of frame 5; its planar radius about the base axis must reach the
  // d4 shoulder offset or no theta1 exists.
  const Eigen::Vector3d wrist = p - d6 * z6;
  const double radius = std::hypot(wrist.x(), wrist.y());
  double ratio = radius > 0.0 ? d4 / radius : 2.0;
  if (!clamp_unit(ratio)) return result;
  const double psi = std::atan2(wrist.y(), wrist.x());
  const double offset = std::acos(ratio);
  const double theta1_options[2] = {wrap_angle(psi - offset + kPi / 2.0),
                                    wrap_angle(psi + offset + kPi / 2.0)};

  auto push_if_new = [&](const JointConfig& q) {
    const Pose fk = forward_kinematics(q, dh);
    if ((fk - target).cwiseAbs().maxCoeff() >= kFkVerifyTol) return;
    for (const auto& existing : result.configs) {
      double max_diff = 0.0;
      for (int i = 0; i < 6; ++i)
        max_diff = std::max(max_diff, std::abs(wrap_angle(q.theta[i] - existing.theta[i])));
      if (max_diff <= kDistinctTol) return;
    }
    result.configs.push_back(q);
  };

  for (const double theta1 : theta1_options) {
    const Pose t01 = dh_link_transform(dh.a[0], dh.d[0], dh.alpha[0], theta1);
    const Pose t16 = t01.inverse() * target;
    const Eigen::Matrix3d r16 = t16.topLeftCorner<3, 3>();

    // With the UR twist pattern, R16 = Rz(theta2+theta3+theta4) * Ry(-theta5)
    // * Rz(theta6), so theta5/theta6 read off as ZYZ Euler angles.
    double c5 = r16(2, 2);
    if (!clamp_unit(c5)) continue;
    const double theta5_magnitude = std::acos(c5);

    for (const double theta5 : {theta5_magnitude, -theta5_magnitude}) {
      const double s5 = std::sin(theta5);
      double theta6 = 0.0;
      if (std::abs(s5) < kSingularSin) {
        // Axes 4 and 6 align: theta4+theta6 is determined but not each joint.
        // Pin theta6 = 0 and let theta4 absorb the rotation.
        result.wrist_singular = true;
      } else {
        theta6 = std::atan2(-r16(2, 1) / s5, r16(2, 0) / s5);
      }

      const Pose t45 = dh_link_transform(dh.a[4], dh.d[4], dh.alpha[4], theta5);
      const Pose t56 = dh_link_transform(dh.a[5], dh.d[5], dh.alpha[5], theta6);
      const Pose t14 = t16 * (t45 * t56).inverse();
      const double x = t14(0, 3);
      const double y = t14(1, 3);

      // Planar 2R subchain for the shoulder/elbow pair.
      double c3 = (x * x + y * y - a2 * a2 - a3 * a3) / (2.0 * a2 * a3);
      if (!clamp_unit(c3)) continue;
      const double theta3_magnitude = std::acos(c3);

      for (const double theta3 : {theta3_magnitude, -theta3_magnitude}) {
        const double s3 = std::sin(theta3);
        const double theta2 =
            std::atan2(y, x) - std::atan2(a3 * s3, a2 + a3 * std::cos(theta3));
        const Pose t12 = dh_link_transform(dh.a[1], dh.d[1], dh.alpha[1], theta2);
        const Pose t23 = dh_link_transform(dh.a[2], dh.d[2], dh.alpha[2], theta3);
        const Pose t34 = (t12 * t23).inverse() * t14;
        const double theta4 = std::atan2(t34(1, 0), t34(0, 0));

        JointConfig q;
        q.theta << theta1, theta2, theta3, theta4, theta5, theta6;
        push_if_new(normalized(q));
      }
    }
  }
  return result;
}

JointConfig select_solution(const std::vector<JointConfig>& solutions, const JointConfig& current) {
  if (solutions.empty()) fail(errc::no_solutions, "no joint solutions to select from");
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < solutions.size(); ++k) {
    double distance = 0.0;
    for (int i = 0; i < 6; ++i)
      distance += std::abs(wrap_angle(solutions[k].theta[i] - current.theta[i]));
    if (distance < best_distance) {
      best_distance = distance;
      best = k;
    }
  }
  return solutions[best];
}

Pose grasp_target(const Eigen::Vector3d& object_centroid, const Eigen::Vector3d& approach,
                  double standoff) {
  const Eigen::Vector3d tool_z = -approach;
  Eigen::Vector3d x_seed = Eigen::Vector3d::UnitX();
  Eigen::Vector3d tool_x = x_seed - x_seed.dot(approach) * approach;
  if (tool_x.squaredNorm() < 1e-12) {
    x_seed = Eigen::Vector3d::UnitY();
    tool_x = x_seed - x_seed.dot(approach) * approach;
  }
  tool_x.normalize();
  const Eigen::Vector3d tool_y = tool_z.cross(tool_x);

  Pose pose = Pose::Identity();
  pose.block<3, 1>(0, 0) = tool_x;
  pose.block<3, 1>(0, 1) = tool_y;
  pose.block<3, 1>(0, 2) = tool_z;
  pose.block<3, 1>(0, 3) = object_centroid + standoff * approach;
  return pose;
}

}  // namespace cloudsort
