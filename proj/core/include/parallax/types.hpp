#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "parallax/field.hpp"

namespace parallax {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics with zero skew. Pixel centers sit at integer
/// coordinates, x is the column and y the row.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Mat3 matrix() const;
  Mat3 inverse_matrix() const;

  /// Same camera resampled to a new image size (focal lengths and principal
  /// point scale with the size ratio).
  CameraIntrinsics resized(int new_width, int new_height) const;
};

/// Throws InvalidArgument unless fx, fy > 0 and the principal point lies
/// inside the image.
void validate(const CameraIntrinsics& K);

/// Source-to-target rigid transform: P_target = R * P_source + T.
struct RigidMotion {
  Mat3 R = Mat3::Identity();
  Vec3 T = Vec3::Zero();

  Vec3 apply(const Vec3& P) const { return R * P + T; }
  RigidMotion inverse() const;
  /// (*this) after `first`.
  RigidMotion compose(const RigidMotion& first) const;

  static RigidMotion from_euler_deg(double roll, double pitch, double yaw,
                                    const Vec3& T);
};

/// Throws InvalidArgument unless R is orthonormal with det +1 to 1e-9.
void validate(const RigidMotion& motion);

/// Reference plane {P : N.P = h_c} in some camera frame. With the camera
/// convention (x right, y down, z forward) a road below the camera has
/// N close to (0, 1, 0).
struct PlaneParams {
  Vec3 N = Vec3::UnitY();
  double h_c = 1.0;
};

/// Throws DegeneratePlane unless |N| = 1 to 1e-12 and h_c > 0.
void validate(const PlaneParams& plane);

/// Expresses a plane given in the source frame in the target frame of
/// `motion`.
PlaneParams transform_plane(const PlaneParams& plane, const RigidMotion& motion);

/// Plane-induced homography, stored unnormalized.
struct Homography {
  Mat3 H = Mat3::Identity();

  Eigen::RowVector3d third_row() const { return H.row(2); }
  /// Copy scaled so the largest-magnitude entry is +-1.
  Mat3 normalized() const;
};

struct Epipole {
  Vec2 e = Vec2::Zero();
  bool defined = false;
};

/// H x W raster of float intensities in [0, 1], 1 or 3 interleaved channels.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  /// Channel mean at (x, y).
  float gray(int x, int y) const;

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  Image to_gray() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<float> data_;
};

struct GammaTag;
struct DepthTag;
struct HeightTag;
struct FlowTag;

using GammaMap = Field<double, GammaTag>;
using DepthMap = Field<double, DepthTag>;
using HeightMap = Field<double, HeightTag>;
/// Per-pixel 2-vector displacement on the target grid. Every stored flow
/// follows one convention: u = p - q where p is the target pixel and q the
/// location it corresponds to on the other side (warped source, raw source).
using FlowField = Field<Vec2, FlowTag>;

}  // namespace parallax
