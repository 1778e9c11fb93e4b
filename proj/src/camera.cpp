#include "camlight/camera.hpp"

#include <cmath>

#include "camlight/errors.hpp"

namespace camlight {

CameraIntrinsics CameraIntrinsics::default_for(int width, int height) {
  CameraIntrinsics k;
  k.fx = 0.58 * width;
  k.fy = 0.58 * width;
  k.cx = width / 2.0;
  k.cy = height / 2.0;
  k.width = width;
  k.height = height;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ValidationError("intrinsics: focal lengths must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw ValidationError("intrinsics: principal point must be finite");
  if (width < 1 || height < 1) throw ValidationError("intrinsics: image size must be at least 1x1");
}

CameraPose CameraPose::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  CameraPose pose;
  pose.rotation = q.normalized().toRotationMatrix();
  pose.translation = t;
  return pose;
}

CameraPose CameraPose::inverse() const {
  CameraPose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

CameraPose CameraPose::operator*(const CameraPose& other) const {
  CameraPose out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

double CameraPose::orthonormality_residual() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff();
}

double CameraPose::determinant_deviation() const { return std::abs(rotation.determinant() - 1.0); }

}  // namespace camlight
