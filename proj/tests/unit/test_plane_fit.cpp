#include <bit>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "parallax/plane_fit.hpp"
#include "unit/helpers.hpp"

using namespace parallax;

namespace {

PointCloud road_cloud(std::uint64_t seed, std::size_t n, double sigma, double outlier_share) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(-10, 10), z(2, 40), u(0, 1);
  std::uniform_real_distribution<double> ox(-10, 10), oy(-3, 1.4), oz(2, 40);
  std::normal_distribution<double> noise(0.0, sigma);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    if (u(rng) < outlier_share) {
      c.points.emplace_back(ox(rng), oy(rng), oz(rng));
    } else {
      c.points.emplace_back(x(rng), 1.5 + (sigma > 0 ? noise(rng) : 0.0), z(rng));
    }
  }
  return c;
}

double rms(const PointCloud& c, const std::vector<std::uint8_t>& in, const PlaneParams& p) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!in[i]) continue;
    const double d = p.N.dot(c.points[i]) - p.h_c;
    s += d * d;
    ++n;
  }
  return std::sqrt(s / static_cast<double>(n));
}

}  // namespace

TEST(RansacPlane, ExactPlane) {
  const PointCloud c = road_cloud(1, 1000, 0.0, 0.0);
  const PlaneFit fit = ransac_plane(c, RansacConfig{});
  EXPECT_LT((fit.plane.N - Vec3::UnitY()).norm(), 1e-12);
  EXPECT_NEAR(fit.plane.h_c, 1.5, 1e-12);
  EXPECT_EQ(fit.inlier_count, 1000u);
}

TEST(RansacPlane, NoisyWithOutliers) {
  RansacConfig cfg;
  cfg.inlier_threshold = 0.03;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const PointCloud c = road_cloud(100 + seed, 2000, 0.01, 0.4);
    const PlaneFit fit = ransac_plane(c, cfg);
    EXPECT_LT(normal_angle_deg(fit.plane.N, Vec3::UnitY()), 0.5) << seed;
    EXPECT_LT(std::abs(fit.plane.h_c - 1.5), 0.01) << seed;
  }
}

TEST(RansacPlane, DegenerateInputs) {
  PointCloud two;
  two.points = {Vec3(0, 1, 2), Vec3(1, 1, 3)};
  EXPECT_EQ(code_of([&] { ransac_plane(two, RansacConfig{}); }), ErrorCode::DegenerateInput);
  PointCloud line;
  for (int i = 0; i < 20; ++i) line.points.emplace_back(i, 1.5, 2.0 * i);
  EXPECT_EQ(code_of([&] { ransac_plane(line, RansacConfig{}); }), ErrorCode::DegenerateInput);
}

TEST(RansacPlane, NoConsensus) {
  PointCloud c = road_cloud(5, 200, 0.0, 0.0);
  RansacConfig cfg;
  cfg.min_inliers = 201;
  EXPECT_EQ(code_of([&] { ransac_plane(c, cfg); }), ErrorCode::NoConsensus);
}

TEST(RansacPlane, DeterministicBits) {
  const PointCloud c = road_cloud(9, 3000, 0.02, 0.3);
  RansacConfig cfg;
  cfg.seed = 77;
  const PlaneFit a = ransac_plane(c, cfg);
  const PlaneFit b = ransac_plane(c, cfg);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.plane.N(i)), std::bit_cast<std::uint64_t>(b.plane.N(i)));
  }
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.plane.h_c), std::bit_cast<std::uint64_t>(b.plane.h_c));
  EXPECT_EQ(a.inliers, b.inliers);
}

TEST(RansacPlane, ScaleConsistency) {
  const PointCloud c = road_cloud(3, 500, 0.0, 0.0);
  PointCloud scaled = c;
  for (auto& p : scaled.points) p *= 3.5;
  RansacConfig cfg;
  const PlaneFit a = ransac_plane(c, cfg);
  cfg.inlier_threshold *= 3.5;
  const PlaneFit b = ransac_plane(scaled, cfg);
  EXPECT_LT((a.plane.N - b.plane.N).norm(), 1e-12);
  EXPECT_NEAR(b.plane.h_c, 3.5 * a.plane.h_c, 1e-12 * 3.5 * a.plane.h_c + 1e-12);
}

TEST(RansacPlane, UnitNormalPositiveHeight) {
  PointCloud c;
  // Plane above the camera: Y = -2, so the oriented normal is -y.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 300; ++i) c.points.emplace_back(u(rng), -2.0, u(rng) + 10);
  const PlaneFit fit = ransac_plane(c, RansacConfig{});
  EXPECT_NEAR(fit.plane.N.norm(), 1.0, 1e-12);
  EXPECT_GT(fit.plane.h_c, 0.0);
  EXPECT_LT((fit.plane.N + Vec3::UnitY()).norm(), 1e-12);
}

TEST(RefinePlane, ExactRecovery) {
  PointCloud c;
  const Vec3 N = Vec3(0.1, 1.0, -0.05).normalized();
  const Vec3 a = N.cross(Vec3::UnitX()).normalized();
  const Vec3 b = N.cross(a);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 400; ++i) c.points.push_back(1.7 * N + u(rng) * a + u(rng) * b);
  const PlaneParams p = refine_plane(c, std::vector<std::uint8_t>(c.size(), 1));
  EXPECT_LT((p.N - N).norm(), 1e-12);
  EXPECT_NEAR(p.h_c, 1.7, 1e-12);
}

TEST(RefinePlane, IdenticalPointsAreDegenerate) {
  PointCloud c;
  c.points.assign(10, Vec3(1, 2, 3));
  EXPECT_EQ(code_of([&] { refine_plane(c, std::vector<std::uint8_t>(10, 1)); }),
            ErrorCode::DegenerateInput);
}

TEST(RefinePlane, NeverWorseThanMinimalSample) {
  const PointCloud c = road_cloud(21, 600, 0.02, 0.0);
  std::vector<std::uint8_t> all(c.size(), 1);
  // Minimal-sample plane through the first three points.
  const Vec3 n = (c.points[1] - c.points[0]).cross(c.points[2] - c.points[0]).normalized();
  PlaneParams minimal{n, n.dot(c.points[0])};
  if (minimal.h_c < 0) minimal = PlaneParams{-n, -minimal.h_c};
  const PlaneParams refined = refine_plane(c, all);
  EXPECT_LE(rms(c, all, refined), rms(c, all, minimal));
}
