#include "lidarsem/se3.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace lidarsem {

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

Mat3 so3_exp(const Vec3& w) {
  double theta = w.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + skew(w);
  }
  Mat3 K = skew(w / theta);
  return Mat3::Identity() + std::sin(theta) * K + (1.0 - std::cos(theta)) * K * K;
}

Vec3 so3_log(const Mat3& R) {
  double cos_theta = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  double theta = std::acos(cos_theta);
  Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-9) {
    return 0.5 * axis;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the off-diagonal formula degenerates; recover axis from R + I.
    Mat3 A = 0.5 * (R + Mat3::Identity());
    Vec3 sq = A.diagonal();
    int k = 0;
    sq.maxCoeff(&k);
    Vec3 a = A.col(k) / std::sqrt(std::max(sq[k], 1e-18));
    a.normalize();
    // Fix sign against the skew part.
    if (axis.dot(a) < 0) a = -a;
    return theta * a;
  }
  return theta / (2.0 * std::sin(theta)) * axis;
}

namespace {

Mat3 left_jacobian(const Vec3& w) {
  double theta = w.norm();
  Mat3 K = skew(w);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * K + (1.0 / 6.0) * K * K;
  }
  double t2 = theta * theta;
  return Mat3::Identity() + (1.0 - std::cos(theta)) / t2 * K +
         (theta - std::sin(theta)) / (t2 * theta) * K * K;
}

}  // namespace

SE3 se3_exp(const Vec6& xi) {
  Vec3 rho = xi.head<3>();
  Vec3 w = xi.tail<3>();
  SE3 T;
  T.R = so3_exp(w);
  T.t = left_jacobian(w) * rho;
  return T;
}

Vec6 se3_log(const SE3& T) {
  Vec3 w = so3_log(T.R);
  Mat3 J = left_jacobian(w);
  Vec6 xi;
  xi.head<3>() = J.partialPivLu().solve(T.t);
  xi.tail<3>() = w;
  return xi;
}

Mat3 orthonormalize(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0) {
    Mat3 D = Mat3::Identity();
    D(2, 2) = -1;
    R = svd.matrixU() * D * svd.matrixV().transpose();
  }
  return R;
}

double rotation_drift(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

bool is_rigid(const SE3& T, double tol) {
  return rotation_drift(T.R) <= tol && std::abs(T.R.determinant() - 1.0) <= tol &&
         T.t.allFinite();
}

}  // namespace lidarsem
