#include "parallax/plane_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace parallax {

namespace {

constexpr double kMinTriangleArea = 1e-9;  // m^2
constexpr int kMaxDrawsPerIteration = 64;

void check_cloud(const PointCloud& cloud) {
  if (cloud.size() < 3) {
    fail(ErrorCode::DegenerateInput, "plane fit: need at least 3 points");
  }
  if (cloud.has_labels() && cloud.labels.size() != cloud.size()) {
    fail(ErrorCode::InvalidArgument, "plane fit: label count differs from point count");
  }
  for (const auto& P : cloud.points) {
    if (!P.allFinite()) {
      fail(ErrorCode::DegenerateInput, "plane fit: non-finite point");
    }
  }
}

struct Hypothesis {
  Vec3 N;
  double d;  // N.P = d
};

struct Score {
  std::size_t count = 0;
  double rms = std::numeric_limits<double>::infinity();
  int iteration = -1;

  // Larger count wins, then smaller RMS, then the earlier iteration.
  bool better_than(const Score& o) const {
    if (count != o.count) return count > o.count;
    if (rms != o.rms) return rms < o.rms;
    return iteration < o.iteration;
  }
};

std::optional<Hypothesis> draw_hypothesis(const PointCloud& cloud,
                                          std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  for (int attempt = 0; attempt < kMaxDrawsPerIteration; ++attempt) {
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    const std::size_t k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Vec3& a = cloud.points[i];
    const Vec3 n = (cloud.points[j] - a).cross(cloud.points[k] - a);
    const double twice_area = n.norm();
    if (0.5 * twice_area < kMinTriangleArea) continue;
    const Vec3 N = n / twice_area;
    return Hypothesis{N, N.dot(a)};
  }
  return std::nullopt;
}

}  // namespace

PlaneParams refine_plane(const PointCloud& cloud,
                         const std::vector<std::uint8_t>& inliers) {
  if (inliers.size() != cloud.size()) {
    fail(ErrorCode::InvalidArgument, "refine_plane: mask size differs from cloud size");
  }
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!inliers[i]) continue;
    sum += cloud.points[i];
    ++n;
  }
  if (n < 3) {
    fail(ErrorCode::DegenerateInput, "refine_plane: need at least 3 inliers");
  }
  const Vec3 centroid = sum / static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!inliers[i]) continue;
    const Vec3 d = cloud.points[i] - centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 lambda = eig.eigenvalues();  // ascending
  // Rank < 2 means the inliers are collinear or coincident.
  if (!(lambda(1) > 1e-12 * std::max(lambda(2), 1e-300)) || lambda(2) <= 0.0) {
    fail(ErrorCode::DegenerateInput, "refine_plane: inliers are collinear or identical");
  }
  Vec3 N = eig.eigenvectors().col(0).normalized();
  double h = N.dot(centroid);
  if (h < 0.0) {
    N = -N;
    h = -h;
  }
  if (!(h > 1e-12 * std::max(1.0, centroid.norm()))) {
    fail(ErrorCode::DegenerateInput, "refine_plane: plane passes through the camera");
  }
  return PlaneParams{N, h};
}

PlaneFit ransac_plane(const PointCloud& cloud, const RansacConfig& cfg) {
  check_cloud(cloud);
  if (cfg.iterations < 1) {
    fail(ErrorCode::InvalidArgument, "ransac: iterations must be >= 1");
  }
  if (!(cfg.inlier_threshold > 0.0)) {
    fail(ErrorCode::InvalidArgument, "ransac: inlier threshold must be positive");
  }

  Score best;
  std::optional<Hypothesis> best_hyp;
  for (int it = 0; it < cfg.iterations; ++it) {
    std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(it));
    const auto hyp = draw_hypothesis(cloud, rng);
    if (!hyp) continue;

    Score s;
    s.iteration = it;
    double sq = 0.0;
    for (const auto& P : cloud.points) {
      const double r = std::abs(hyp->N.dot(P) - hyp->d);
      if (r <= cfg.inlier_threshold) {
        ++s.count;
        sq += r * r;
      }
    }
    s.rms = s.count ? std::sqrt(sq / static_cast<double>(s.count)) : 0.0;
    if (!best_hyp || s.better_than(best)) {
      best = s;
      best_hyp = hyp;
    }
  }
  if (!best_hyp) {
    fail(ErrorCode::DegenerateInput, "ransac: every sample was collinear");
  }
  if (best.count < std::max<std::size_t>(cfg.min_inliers, 3)) {
    fail(ErrorCode::NoConsensus, "ransac: best hypothesis has " +
                                     std::to_string(best.count) + " inliers");
  }

  PlaneFit fit;
  fit.inliers.assign(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    fit.inliers[i] =
        std::abs(best_hyp->N.dot(cloud.points[i]) - best_hyp->d) <= cfg.inlier_threshold;
  }
  fit.plane = refine_plane(cloud, fit.inliers);
  fit.inlier_count = best.count;

  double sq = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!fit.inliers[i]) continue;
    const double r = fit.plane.N.dot(cloud.points[i]) - fit.plane.h_c;
    sq += r * r;
  }
  fit.inlier_rms = std::sqrt(sq / static_cast<double>(fit.inlier_count));
  return fit;
}

double normal_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  const double s = a.normalized().cross(b.normalized()).norm();
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

}  // namespace parallax
