#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parallax/types.hpp"

namespace parallax {

struct PointCloud {
  std::vector<Vec3> points;
  /// Optional per-point road flag; empty when unlabeled.
  std::vector<std::uint8_t> labels;

  bool has_labels() const noexcept { return !labels.empty(); }
  std::size_t size() const noexcept { return points.size(); }
};

struct RansacConfig {
  int iterations = 500;
  double inlier_threshold = 0.03;  ///< point-to-plane distance, meters
  std::size_t min_inliers = 3;
  std::uint64_t seed = 0;
};

struct PlaneFit {
  PlaneParams plane;
  std::vector<std::uint8_t> inliers;
  std::size_t inlier_count = 0;
  double inlier_rms = 0.0;  ///< RMS distance of the inliers to `plane`
};

/// Least-squares plane through the masked points: the normal is the
/// eigenvector of the smallest eigenvalue of the centered covariance.
/// Oriented so that h_c = N . centroid > 0.
PlaneParams refine_plane(const PointCloud& cloud,
                         const std::vector<std::uint8_t>& inliers);

/// RANSAC over 3-point minimal samples, then refine_plane on the consensus.
/// Iteration i draws from a generator seeded with seed ^ i, so the result is
/// a pure function of (cloud, cfg).
PlaneFit ransac_plane(const PointCloud& cloud, const RansacConfig& cfg);

/// Angle between two plane normals in degrees (sign-insensitive).
double normal_angle_deg(const Vec3& a, const Vec3& b);

}  // namespace parallax
