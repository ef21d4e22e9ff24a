#ifndef LIDARSEM_SE3_HPP
#define LIDARSEM_SE3_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lidarsem {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Rigid transform. Doubles as the Pose type for odometry and as the
// per-point motion tau of the flow field.
struct SE3 {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  SE3() = default;
  SE3(const Mat3& R_, const Vec3& t_) : R(R_), t(t_) {}

  Vec3 operator*(const Vec3& p) const { return R * p + t; }
  SE3 operator*(const SE3& o) const { return SE3(R * o.R, R * o.t + t); }

  SE3 inverse() const {
    Mat3 Rt = R.transpose();
    return SE3(Rt, -(Rt * t));
  }

  static SE3 identity() { return SE3(); }
};

using Pose = SE3;

Mat3 skew(const Vec3& v);

// Rotation vector (axis * angle) <-> rotation matrix.
Mat3 so3_exp(const Vec3& w);
Vec3 so3_log(const Mat3& R);

// 6-vector convention: [translation; rotation-vector].
SE3 se3_exp(const Vec6& xi);
Vec6 se3_log(const SE3& T);

// Nearest rotation matrix (polar decomposition via SVD).
Mat3 orthonormalize(const Mat3& M);

// ||R^T R - I||_F, drift measure used by the parsers and solvers.
double rotation_drift(const Mat3& R);

bool is_rigid(const SE3& T, double tol = 1e-9);

}  // namespace lidarsem

#endif
