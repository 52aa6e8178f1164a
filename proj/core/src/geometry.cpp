#include "parallax/geometry.hpp"

#include <cmath>
#include <string>

namespace parallax {

Vec2 project(const CameraIntrinsics& K, const Vec3& P) {
  if (!(P.z() > 0.0)) {
    fail(ErrorCode::NonPositiveDepth, "project: point behind the camera");
  }
  return Vec2(K.fx * P.x() / P.z() + K.cx, K.fy * P.y() / P.z() + K.cy);
}

Vec3 backproject(const CameraIntrinsics& K, const Vec2& p, double Z) {
  if (!(Z > 0.0)) {
    fail(ErrorCode::NonPositiveDepth, "backproject: depth must be positive");
  }
  return Vec3(Z * (p.x() - K.cx) / K.fx, Z * (p.y() - K.cy) / K.fy, Z);
}

double height_of_point(const PlaneParams& plane, const Vec3& P) {
  return plane.h_c - plane.N.dot(P);
}

double gamma_of(double h, double Z) {
  if (!(Z > 0.0)) {
    fail(ErrorCode::NonPositiveDepth, "gamma_of: depth must be positive");
  }
  return h / Z;
}

Homography homography_from_motion(const CameraIntrinsics& K,
                                  const RigidMotion& motion,
                                  const PlaneParams& plane) {
  if (!(plane.h_c > 0.0)) {
    fail(ErrorCode::DegeneratePlane, "homography: camera height must be positive");
  }
  const Mat3 A = motion.R + motion.T * plane.N.transpose() / plane.h_c;
  return Homography{K.matrix() * A * K.inverse_matrix()};
}

Vec2 apply_homography(const Homography& H, const Vec2& p) {
  const Vec3 q = H.H * Vec3(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) < kEpsDivide) {
    fail(ErrorCode::MapsToInfinity, "apply_homography: point maps to infinity");
  }
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

Homography inverse(const Homography& H) {
  const Mat3 n = H.normalized();
  if (std::abs(n.determinant()) <= 1e-12) {
    fail(ErrorCode::SingularHomography, "homography is singular");
  }
  return Homography{H.H.inverse()};
}

Vec2 homography_displacement(const Vec2& p, const Homography& H) {
  return apply_homography(H, p) - p;
}

Epipole epipole(const CameraIntrinsics& K, const RigidMotion& motion) {
  const Vec3 t = K.matrix() * motion.T;
  if (std::abs(motion.T.z()) > kEpsTz) {
    return Epipole{Vec2(t.x() / motion.T.z(), t.y() / motion.T.z()), true};
  }
  return Epipole{};
}

namespace {

// Precomputed per-motion constants so the dense map does not redo them.
struct FlowModel {
  Epipole e;
  Vec2 t_xy;
  double Tz;
  double h_c;

  FlowModel(const RigidMotion& motion, const PlaneParams& plane,
            const CameraIntrinsics& K)
      : e(epipole(K, motion)), Tz(motion.T.z()), h_c(plane.h_c) {
    const Vec3 t = K.matrix() * motion.T;
    t_xy = Vec2(t.x(), t.y());
    if (!(h_c > 0.0)) {
      fail(ErrorCode::DegeneratePlane, "residual flow: camera height must be positive");
    }
  }

  Vec2 flow(const Vec2& p, double gamma) const {
    if (!e.defined) {
      return (gamma / h_c) * t_xy;
    }
    const double k = gamma * Tz / h_c;
    if (std::abs(1.0 - k) < kEpsSingular) {
      fail(ErrorCode::ParallaxSingularity, "residual flow: 1 - gamma T_z / h_c vanishes");
    }
    return (-k / (1.0 - k)) * (p - e.e);
  }
};

}  // namespace

Vec2 residual_flow_at(const Vec2& p, double gamma, const RigidMotion& motion,
                      const PlaneParams& plane, const CameraIntrinsics& K) {
  return FlowModel(motion, plane, K).flow(p, gamma);
}

FlowField residual_flow_map(const GammaMap& gamma, const RigidMotion& motion,
                            const PlaneParams& plane,
                            const CameraIntrinsics& K) {
  if (gamma.width() != K.width || gamma.height() != K.height) {
    fail(ErrorCode::GridMismatch, "residual_flow_map: gamma grid does not match intrinsics");
  }
  const FlowModel model(motion, plane, K);
  FlowField out(gamma.width(), gamma.height());
  for (int y = 0; y < gamma.height(); ++y) {
    for (int x = 0; x < gamma.width(); ++x) {
      if (!gamma.valid(x, y)) continue;
      try {
        out.set(x, y, model.flow(Vec2(x, y), gamma(x, y)));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::ParallaxSingularity) throw;
      }
    }
  }
  return out;
}

DepthMap depth_from_gamma(const GammaMap& gamma, const PlaneParams& plane,
                          const CameraIntrinsics& K) {
  if (gamma.width() != K.width || gamma.height() != K.height) {
    fail(ErrorCode::GridMismatch, "depth_from_gamma: gamma grid does not match intrinsics");
  }
  const Mat3 Kinv = K.inverse_matrix();
  // N . K^-1 (x, y, 1) is affine in (x, y).
  const Vec3 a = Kinv.transpose() * plane.N;
  DepthMap out(gamma.width(), gamma.height());
  for (int y = 0; y < gamma.height(); ++y) {
    for (int x = 0; x < gamma.width(); ++x) {
      if (!gamma.valid(x, y)) continue;
      const double den = gamma(x, y) + (a.x() * x + a.y() * y + a.z());
      if (!(den > kEpsHorizon)) continue;
      const double Z = plane.h_c / den;
      if (Z > 0.0 && std::isfinite(Z)) out.set(x, y, Z);
    }
  }
  return out;
}

HeightMap height_from_gamma(const GammaMap& gamma, const DepthMap& depth) {
  require_same_shape(gamma, depth, "height_from_gamma");
  HeightMap out(gamma.width(), gamma.height());
  for (int y = 0; y < gamma.height(); ++y) {
    for (int x = 0; x < gamma.width(); ++x) {
      if (gamma.valid(x, y) && depth.valid(x, y)) {
        out.set(x, y, gamma(x, y) * depth(x, y));
      }
    }
  }
  return out;
}

double depth_ratio(const Homography& H, const Vec2& p_source, double h,
                   double Z_source, const RigidMotion& motion,
                   const PlaneParams& plane) {
  if (!(Z_source > 0.0)) {
    fail(ErrorCode::NonPositiveDepth, "depth_ratio: source depth must be positive");
  }
  return H.third_row().dot(Vec3(p_source.x(), p_source.y(), 1.0)) +
         h * motion.T.z() / (plane.h_c * Z_source);
}

}  // namespace parallax
