#pragma once

#include "parallax/types.hpp"

/// Closed-form planar-parallax relations between two views of a reference
/// plane.
///
/// Frames: `RigidMotion` maps source-camera points to target-camera points.
/// The plane passed to homography_from_motion, residual_flow_at/_map and the
/// depth-ratio relation is expressed in the source frame (the frame the
/// homography is induced from). depth_from_gamma works in the frame of the
/// grid it reconstructs, which is the target frame for every map in this
/// library; use transform_plane() to move the plane there.
///
/// gamma = h / Z, with h the height of a point above the plane (frame
/// independent) and Z its target-frame depth.
namespace parallax {

inline constexpr double kEpsTz = 1e-9;        ///< epipole definedness, meters
inline constexpr double kEpsSingular = 1e-9;  ///< |1 - k| parallax singularity
inline constexpr double kEpsHorizon = 1e-9;   ///< depth denominator
inline constexpr double kEpsDivide = 1e-12;   ///< perspective division

Vec2 project(const CameraIntrinsics& K, const Vec3& P);
Vec3 backproject(const CameraIntrinsics& K, const Vec2& p, double Z);

/// h = h_c - N.P
double height_of_point(const PlaneParams& plane, const Vec3& P);
double gamma_of(double h, double Z);

/// H = K (R + T N^T / h_c) K^-1, mapping source pixels of plane points to
/// their target pixels.
Homography homography_from_motion(const CameraIntrinsics& K,
                                  const RigidMotion& motion,
                                  const PlaneParams& plane);

Vec2 apply_homography(const Homography& H, const Vec2& p);
Homography inverse(const Homography& H);

/// H(p) - p. For a source pixel p_s this is p^w - p_s, the homography part
/// of the stored flow convention.
Vec2 homography_displacement(const Vec2& p, const Homography& H);

/// e = t / T_z with t = K T; undefined when |T_z| <= kEpsTz.
Epipole epipole(const CameraIntrinsics& K, const RigidMotion& motion);

/// Residual flow u = p - p^w at target pixel p for a given gamma.
///   T_z != 0:  u = -k / (1 - k) (p - e),  k = gamma T_z / h_c
///   T_z == 0:  u = (gamma / h_c) (t_x, t_y)
/// Throws ParallaxSingularity when |1 - k| < kEpsSingular.
Vec2 residual_flow_at(const Vec2& p, double gamma, const RigidMotion& motion,
                      const PlaneParams& plane, const CameraIntrinsics& K);

/// Dense residual flow on the gamma grid; singular cells come back invalid.
FlowField residual_flow_map(const GammaMap& gamma, const RigidMotion& motion,
                            const PlaneParams& plane,
                            const CameraIntrinsics& K);

/// Z = h_c / (gamma + N . K^-1 (p, 1)). `plane` must be in the grid's frame.
/// Cells with denominator <= kEpsHorizon or Z <= 0 are invalid.
DepthMap depth_from_gamma(const GammaMap& gamma, const PlaneParams& plane,
                          const CameraIntrinsics& K);

/// h = gamma Z on jointly valid cells.
HeightMap height_from_gamma(const GammaMap& gamma, const DepthMap& depth);

/// Z_target / Z_source predicted from the source pixel, the point height and
/// the source depth: H_3 . p' + h T_z / (h_c Z'). Uses the unnormalized
/// homography.
double depth_ratio(const Homography& H, const Vec2& p_source, double h,
                   double Z_source, const RigidMotion& motion,
                   const PlaneParams& plane);

}  // namespace parallax
