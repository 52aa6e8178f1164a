#include "parallax/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace parallax {

Mat3 CameraIntrinsics::matrix() const {
  Mat3 K;
  K << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return K;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 Kinv;
  Kinv << 1.0 / fx, 0.0, -cx / fx,
          0.0, 1.0 / fy, -cy / fy,
          0.0, 0.0, 1.0;
  return Kinv;
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const {
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  // Pixel centers are integers, so the scaling pivots on (-0.5, -0.5).
  return CameraIntrinsics{fx * sx,
                          fy * sy,
                          (cx + 0.5) * sx - 0.5,
                          (cy + 0.5) * sy - 0.5,
                          new_width,
                          new_height};
}

void validate(const CameraIntrinsics& K) {
  if (!(K.fx > 0.0) || !(K.fy > 0.0)) {
    fail(ErrorCode::InvalidArgument, "intrinsics: focal lengths must be positive");
  }
  if (K.width <= 0 || K.height <= 0) {
    fail(ErrorCode::InvalidArgument, "intrinsics: image size must be positive");
  }
  if (!(K.cx >= 0.0 && K.cx < K.width && K.cy >= 0.0 && K.cy < K.height)) {
    fail(ErrorCode::InvalidArgument,
         "intrinsics: principal point outside the image");
  }
}

RigidMotion RigidMotion::inverse() const {
  const Mat3 Rt = R.transpose();
  return RigidMotion{Rt, -Rt * T};
}

RigidMotion RigidMotion::compose(const RigidMotion& first) const {
  return RigidMotion{R * first.R, R * first.T + T};
}

RigidMotion RigidMotion::from_euler_deg(double roll, double pitch, double yaw,
                                        const Vec3& T) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  // roll about z (optical axis), pitch about x, yaw about y.
  const Mat3 R = (Eigen::AngleAxisd(yaw * kDeg, Vec3::UnitY()) *
                  Eigen::AngleAxisd(pitch * kDeg, Vec3::UnitX()) *
                  Eigen::AngleAxisd(roll * kDeg, Vec3::UnitZ()))
                     .toRotationMatrix();
  return RigidMotion{R, T};
}

void validate(const RigidMotion& motion) {
  if (!motion.R.allFinite() || !motion.T.allFinite()) {
    fail(ErrorCode::InvalidArgument, "motion: non-finite entries");
  }
  const double ortho = (motion.R.transpose() * motion.R - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9 || std::abs(motion.R.determinant() - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "motion: R is not a rotation");
  }
}

void validate(const PlaneParams& plane) {
  if (!plane.N.allFinite() || std::abs(plane.N.norm() - 1.0) > 1e-12) {
    fail(ErrorCode::DegeneratePlane, "plane: normal must be a unit vector");
  }
  if (!(plane.h_c > 0.0) || !std::isfinite(plane.h_c)) {
    fail(ErrorCode::DegeneratePlane, "plane: camera height must be positive");
  }
}

PlaneParams transform_plane(const PlaneParams& plane, const RigidMotion& motion) {
  // N.P_s = h_c with P_s = R^T (P_t - T)  =>  (R N).P_t = h_c + (R N).T
  const Vec3 N = motion.R * plane.N;
  return PlaneParams{N, plane.h_c + N.dot(motion.T)};
}

Mat3 Homography::normalized() const {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  H.cwiseAbs().maxCoeff(&r, &c);
  return H / H(r, c);
}

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    fail(ErrorCode::InvalidArgument, "image: bad dimensions or channel count");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

float Image::gray(int x, int y) const {
  if (channels_ == 1) return at(x, y);
  return (at(x, y, 0) + at(x, y, 1) + at(x, y, 2)) / 3.0f;
}

Image Image::to_gray() const {
  Image out(width_, height_, 1);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) out.at(x, y) = gray(x, y);
  }
  return out;
}

}  // namespace parallax
