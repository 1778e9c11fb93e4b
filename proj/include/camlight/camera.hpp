#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace camlight {

// Pinhole intrinsics in pixels. (u, v) is the pixel column/row whose center
// sits at integer coordinates.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // fx = fy = 0.58 * width, principal point at the image center. This is a
  // convention; real footage should pass calibrated values.
  static CameraIntrinsics default_for(int width, int height);

  // Throws ValidationError on non-positive focal lengths or image size.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

// World-to-camera rigid transform: x_cam = rotation * x_world + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static CameraPose identity() { return {}; }
  static CameraPose from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  CameraPose inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p))
  CameraPose operator*(const CameraPose& other) const;

  // max |R^T R - I| entry and |det R - 1|.
  double orthonormality_residual() const;
  double determinant_deviation() const;

  bool operator==(const CameraPose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

}  // namespace camlight
