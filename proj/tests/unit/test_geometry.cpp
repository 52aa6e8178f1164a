#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "unit/helpers.hpp"
#include "parallax/geometry.hpp"

using namespace parallax;

namespace {

CameraIntrinsics unit_camera() { return CameraIntrinsics{1, 1, 0, 0, 1, 1}; }
CameraIntrinsics k100() { return CameraIntrinsics{100, 100, 50, 60, 200, 200}; }

RigidMotion translation(const Vec3& T) { return RigidMotion{Mat3::Identity(), T}; }

}  // namespace

TEST(Project, OpticalAxisMapsToPrincipalPoint) {
  EXPECT_EQ(project(unit_camera(), Vec3(0, 0, 5)), Vec2(0, 0));
}

TEST(Project, DirectArithmetic) {
  const Vec2 p = project(k100(), Vec3(1, 2, 10));
  EXPECT_DOUBLE_EQ(p.x(), 60.0);
  EXPECT_DOUBLE_EQ(p.y(), 80.0);
}

TEST(Project, RejectsNonPositiveDepth) {
  EXPECT_EQ(code_of([] { project(k100(), Vec3(1, 1, 0)); }), ErrorCode::NonPositiveDepth);
  EXPECT_EQ(code_of([] { project(k100(), Vec3(1, 1, -2)); }), ErrorCode::NonPositiveDepth);
}

TEST(Backproject, Examples) {
  EXPECT_EQ(backproject(unit_camera(), Vec2(0, 0), 5), Vec3(0, 0, 5));
  const Vec3 P = backproject(k100(), Vec2(60, 80), 10);
  EXPECT_NEAR((P - Vec3(1, 2, 10)).norm(), 0.0, 1e-14);
  EXPECT_EQ(code_of([] { backproject(k100(), Vec2(1, 1), 0.0); }), ErrorCode::NonPositiveDepth);
}

TEST(Backproject, InversePairWithProject) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50), z(0.1, 200);
  for (int i = 0; i < 1000; ++i) {
    const CameraIntrinsics K = oracle::random_camera(rng);
    const Vec3 P(u(rng), u(rng), z(rng));
    const Vec3 back = backproject(K, project(K, P), P.z());
    EXPECT_LT((back - P).norm() / std::max(1.0, P.norm()), 1e-12);
    const Vec2 p(u(rng) * 10, u(rng) * 10);
    EXPECT_LT((project(K, backproject(K, p, P.z())) - p).norm(), 1e-12 * std::max(1.0, p.norm()));
  }
}

TEST(HeightOfPoint, Examples) {
  const PlaneParams plane{Vec3::UnitY(), 1.5};
  EXPECT_EQ(height_of_point(plane, Vec3(0, 1.5, 10)), 0.0);
  EXPECT_EQ(height_of_point(plane, Vec3(0, 0, 0)), 1.5);
  EXPECT_DOUBLE_EQ(height_of_point(plane, Vec3(3, 1.0, 20)), 0.5);
}

TEST(GammaOf, Examples) {
  EXPECT_EQ(gamma_of(0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(gamma_of(0.5, 10.0), 0.05);
  EXPECT_DOUBLE_EQ(gamma_of(-0.2, 4.0), -0.05);
  EXPECT_EQ(code_of([] { gamma_of(1.0, 0.0); }), ErrorCode::NonPositiveDepth);
}

TEST(HomographyFromMotion, IdentityMotion) {
  std::mt19937_64 rng(2);
  const CameraIntrinsics K = oracle::random_camera(rng);
  const Homography H = homography_from_motion(K, RigidMotion{}, oracle::random_road_plane(rng));
  EXPECT_LT((H.H - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HomographyFromMotion, LateralTranslationMatchesProjectionOracle) {
  const CameraIntrinsics K = unit_camera();
  const PlaneParams plane{Vec3::UnitY(), 1.0};
  const RigidMotion m = translation(Vec3(1, 0, 0));
  const Homography H = homography_from_motion(K, m, plane);
  Mat3 expected;
  expected << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  EXPECT_LT((H.H - expected).cwiseAbs().maxCoeff(), 1e-15);

  // Oracle: plane points (x, 1, z) projected in both cameras.
  std::vector<Vec2> from, to;
  for (double x : {-2.0, 0.5, 3.0}) {
    for (double z : {2.0, 5.0, 11.0}) {
      const Vec3 P(x, 1.0, z);
      from.push_back(oracle::pinhole(K, P));
      to.push_back(oracle::pinhole(K, P + m.T));
    }
  }
  EXPECT_LT((oracle::dlt(from, to) - oracle::normalize(H.H)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(HomographyFromMotion, ForwardTranslationMatchesProjectionOracle) {
  const CameraIntrinsics K = unit_camera();
  const PlaneParams plane{Vec3::UnitY(), 2.0};
  const RigidMotion m = translation(Vec3(0, 0, -1));
  const Homography H = homography_from_motion(K, m, plane);
  Mat3 expected;
  expected << 1, 0, 0, 0, 1, 0, 0, -0.5, 1;
  EXPECT_LT((H.H - expected).cwiseAbs().maxCoeff(), 1e-15);

  // Plane point (0, 2, 10): p' = (0, 0.2) and target (0, 2, 9) projects to (0, 2/9).
  const Vec2 target = oracle::pinhole(K, Vec3(0, 2, 10) + m.T);
  const Vec2 mapped = apply_homography(H, Vec2(0, 0.2));
  EXPECT_NEAR((mapped - target).norm(), 0.0, 1e-15);
  EXPECT_NEAR(mapped.y(), 0.2222222222222222, 1e-15);
}

TEST(HomographyFromMotion, RejectsNonPositiveHeight) {
  const PlaneParams bad{Vec3::UnitY(), 0.0};
  EXPECT_EQ(code_of([&] { homography_from_motion(k100(), RigidMotion{}, bad); }),
            ErrorCode::DegeneratePlane);
}

TEST(HomographyFromMotion, RandomPlanesAgreeWithDlt) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const CameraIntrinsics K = oracle::random_camera(rng);
    const PlaneParams plane = oracle::random_road_plane(rng);
    const RigidMotion m = oracle::random_motion(rng, 3.0, 1.0);
    std::vector<Vec2> from, to;
    std::uniform_real_distribution<double> px(0, K.width - 1);
    std::uniform_real_distribution<double> py(K.height * 0.6, K.height - 1);
    while (from.size() < 30) {
      const Vec2 p(px(rng), py(rng));
      const auto P = oracle::plane_point(K, plane, p);
      if (!P) continue;
      const Vec3 Pt = m.R * *P + m.T;
      if (Pt.z() <= 0.1) continue;
      from.push_back(p);
      to.push_back(oracle::pinhole(K, Pt));
    }
    const Homography H = homography_from_motion(K, m, plane);
    EXPECT_LT((oracle::dlt(from, to) - oracle::normalize(H.H)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(ApplyHomography, Examples) {
  EXPECT_EQ(apply_homography(Homography{}, Vec2(3.25, -7.5)), Vec2(3.25, -7.5));
  Mat3 shear;
  shear << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  EXPECT_EQ(apply_homography(Homography{shear}, Vec2(2, 3)), Vec2(5, 3));
  Mat3 fwd;
  fwd << 1, 0, 0, 0, 1, 0, 0, -0.5, 1;
  EXPECT_NEAR(apply_homography(Homography{fwd}, Vec2(0, 0.2)).y(), 0.2 / 0.9, 1e-15);
}

TEST(ApplyHomography, MapsToInfinity) {
  Mat3 fwd;
  fwd << 1, 0, 0, 0, 1, 0, 0, -0.5, 1;
  EXPECT_EQ(code_of([&] { apply_homography(Homography{fwd}, Vec2(0, 2)); }),
            ErrorCode::MapsToInfinity);
}

TEST(InverseHomography, SingularIsRejected) {
  Mat3 s = Mat3::Zero();
  s(0, 0) = 1;
  s(1, 1) = 1;
  EXPECT_EQ(code_of([&] { inverse(Homography{s}); }), ErrorCode::SingularHomography);
}

TEST(HomographyDisplacement, Examples) {
  EXPECT_EQ(homography_displacement(Vec2(4, 5), Homography{}), Vec2(0, 0));
  Mat3 shear;
  shear << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  EXPECT_EQ(homography_displacement(Vec2(2, 3), Homography{shear}), Vec2(3, 0));
}

TEST(Epipole, Examples) {
  const Epipole a = epipole(unit_camera(), translation(Vec3(0, 0, -1)));
  ASSERT_TRUE(a.defined);
  EXPECT_EQ(a.e, Vec2(0, 0));
  const Epipole b = epipole(k100(), translation(Vec3(0, 0, -1)));
  ASSERT_TRUE(b.defined);
  EXPECT_DOUBLE_EQ(b.e.x(), 50.0);
  EXPECT_DOUBLE_EQ(b.e.y(), 60.0);
  EXPECT_FALSE(epipole(k100(), translation(Vec3(0.3, 0, 0))).defined);
  EXPECT_FALSE(epipole(k100(), translation(Vec3(0.3, 0, 1e-10))).defined);
  EXPECT_TRUE(epipole(k100(), translation(Vec3(0.3, 0, 2e-9))).defined);
}

TEST(ResidualFlowAt, ZeroGammaAndEpipoleAreFixed) {
  const CameraIntrinsics K = k100();
  const RigidMotion m = translation(Vec3(0.1, 0.05, -1));
  const PlaneParams plane{Vec3::UnitY(), 2};
  EXPECT_EQ(residual_flow_at(Vec2(13, 170), 0.0, m, plane, K), Vec2(0, 0));
  const Epipole e = epipole(K, m);
  EXPECT_LT(residual_flow_at(e.e, 0.2, m, plane, K).norm(), 1e-12);
}

TEST(ResidualFlowAt, ForwardMotionExample) {
  const CameraIntrinsics K = k100();
  const RigidMotion m = translation(Vec3(0, 0, -1));
  const PlaneParams plane{Vec3::UnitY(), 2};
  const Vec2 e(50, 60);
  const Vec2 u = residual_flow_at(e + Vec2(10, 10), 0.1, m, plane, K);
  EXPECT_NEAR(u.x(), 0.47619047619047616, 1e-14);
  EXPECT_NEAR(u.y(), 0.47619047619047616, 1e-14);
}

TEST(ResidualFlowAt, MatchesTwoViewProjection) {
  // A point with h / Z_t = 0.1: the flow must be p - H(p_s).
  const CameraIntrinsics K = k100();
  const RigidMotion m = translation(Vec3(0, 0, -1));
  const PlaneParams plane{Vec3::UnitY(), 2};
  const Vec2 p(60, 70);
  const double Zt = 8.0;
  const Vec3 Pt = Zt * oracle::ray(K, p);
  const Vec3 Ps = Pt - m.T;
  const double h = plane.h_c - plane.N.dot(Ps);
  const Vec2 ps = oracle::pinhole(K, Ps);
  const Mat3 H = K.matrix() * (m.R + m.T * plane.N.transpose() / plane.h_c) * K.inverse_matrix();
  const Vec2 pw = (H * ps.homogeneous()).hnormalized();
  const Vec2 u = residual_flow_at(p, h / Zt, m, plane, K);
  EXPECT_LT((u - (p - pw)).norm(), 1e-12);
}

TEST(ResidualFlowAt, LateralBranchMatchesTwoViewProjection) {
  // K = I, T = (1, 0, 0): the point (0, 0.5, 10) has h = 0.5, gamma = 0.05.
  const CameraIntrinsics K = unit_camera();
  const RigidMotion m = translation(Vec3(1, 0, 0));
  const PlaneParams plane{Vec3::UnitY(), 1.0};
  const Vec3 Ps(0, 0.5, 10);
  const Vec3 Pt = Ps + m.T;
  const Vec2 p = oracle::pinhole(K, Pt);
  Mat3 H;
  H << 1, 1, 0, 0, 1, 0, 0, 0, 1;
  const Vec2 pw = (H * oracle::pinhole(K, Ps).homogeneous()).hnormalized();
  const Vec2 u = residual_flow_at(p, 0.05, m, plane, K);
  EXPECT_NEAR(u.x(), 0.05, 1e-15);
  EXPECT_NEAR(u.y(), 0.0, 1e-15);
  EXPECT_LT((u - (p - pw)).norm(), 1e-15);
}

TEST(ResidualFlowAt, BranchContinuity) {
  const CameraIntrinsics K = k100();
  const PlaneParams plane{Vec3::UnitY(), 1.5};
  for (double gamma : {-0.05, 0.01, 0.2}) {
    const Vec2 p(120, 150);
    const Vec2 a = residual_flow_at(p, gamma, translation(Vec3(0.4, -0.1, 1e-8)), plane, K);
    const Vec2 b = residual_flow_at(p, gamma, translation(Vec3(0.4, -0.1, 0.0)), plane, K);
    const Vec2 c = residual_flow_at(p, gamma, translation(Vec3(0.4, -0.1, -1e-8)), plane, K);
    EXPECT_LT((a - b).norm(), 1e-6);
    EXPECT_LT((c - b).norm(), 1e-6);
  }
}

TEST(ResidualFlowAt, Singularity) {
  const RigidMotion m = translation(Vec3(0, 0, 1));
  const PlaneParams plane{Vec3::UnitY(), 1.0};
  EXPECT_EQ(code_of([&] { residual_flow_at(Vec2(5, 5), 1.0, m, plane, k100()); }),
            ErrorCode::ParallaxSingularity);
}

TEST(ResidualFlowMap, ZeroGammaGivesZeroFlow) {
  const CameraIntrinsics K{100, 100, 10, 8, 20, 16};
  GammaMap g(20, 16, true);
  const FlowField f =
      residual_flow_map(g, translation(Vec3(0.1, 0, -1)), PlaneParams{Vec3::UnitY(), 1.5}, K);
  EXPECT_EQ(f.valid_count(), f.size());
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 20; ++x) EXPECT_EQ(f(x, y), Vec2(0, 0));
  }
}

TEST(ResidualFlowMap, MaskPropagation) {
  const CameraIntrinsics K{100, 100, 10, 8, 20, 16};
  GammaMap g(20, 16);
  g.set(7, 3, 0.1);
  const FlowField f =
      residual_flow_map(g, translation(Vec3(0.1, 0, -1)), PlaneParams{Vec3::UnitY(), 1.5}, K);
  EXPECT_EQ(f.valid_count(), 1u);
  EXPECT_TRUE(f.valid(7, 3));
}

TEST(ResidualFlowMap, SingularCellsAreMasked) {
  const CameraIntrinsics K{100, 100, 10, 8, 20, 16};
  GammaMap g(20, 16, true);
  g(4, 4) = 1.0;  // k = 1 for T_z = h_c
  const FlowField f =
      residual_flow_map(g, translation(Vec3(0, 0, 1.0)), PlaneParams{Vec3::UnitY(), 1.0}, K);
  EXPECT_FALSE(f.valid(4, 4));
  EXPECT_EQ(f.valid_count(), f.size() - 1);
}

TEST(ResidualFlowMap, RejectsWrongGrid) {
  GammaMap g(5, 5, true);
  EXPECT_EQ(code_of([&] {
              residual_flow_map(g, RigidMotion{}, PlaneParams{}, CameraIntrinsics{1, 1, 0, 0, 6, 5});
            }),
            ErrorCode::GridMismatch);
}

TEST(DepthFromGamma, Examples) {
  const CameraIntrinsics K{1, 1, 0, 0, 1, 1};
  const PlaneParams plane{Vec3::UnitY(), 1.5};
  // Evaluate the single-pixel formula at arbitrary p through a shifted principal point.
  auto depth_at = [&](double px, double py, double gamma) {
    CameraIntrinsics k = K;
    k.cx = -px;  // pixel (0, 0) now has K^-1 p = (px, py, 1)
    k.cy = -py;
    GammaMap g(1, 1);
    g.set(0, 0, gamma);
    return depth_from_gamma(g, plane, k);
  };
  const DepthMap a = depth_at(0.0, 0.15, 0.0);
  ASSERT_TRUE(a.valid(0, 0));
  EXPECT_NEAR(a(0, 0), 10.0, 1e-12);
  EXPECT_FALSE(depth_at(0.0, 0.0, 0.0).valid(0, 0));
  const DepthMap c = depth_at(0.0, 0.1, 0.05);
  ASSERT_TRUE(c.valid(0, 0));
  EXPECT_NEAR(c(0, 0), 10.0, 1e-12);
  GammaMap g(1, 1);
  g.set(0, 0, 0.05);
  EXPECT_NEAR(height_from_gamma(g, c)(0, 0), 0.5, 1e-12);
}

TEST(DepthFromGamma, NegativeDenominatorIsInvalid) {
  const CameraIntrinsics K{100, 100, 50, 50, 100, 100};
  GammaMap g(100, 100, true);
  const DepthMap d = depth_from_gamma(g, PlaneParams{Vec3::UnitY(), 1.5}, K);
  for (int x = 0; x < 100; ++x) {
    EXPECT_FALSE(d.valid(x, 10));  // above the horizon
    EXPECT_TRUE(d.valid(x, 90));
  }
}

TEST(HeightFromGamma, ZeroGammaAndGridMismatch) {
  GammaMap g(4, 3, true);
  DepthMap d(4, 3, true);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) d(x, y) = 3.0 + x;
  }
  const HeightMap h = height_from_gamma(g, d);
  for (double v : h.values().data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(code_of([] { height_from_gamma(GammaMap(4, 3), DepthMap(3, 4)); }),
            ErrorCode::GridMismatch);
}

TEST(DepthFromGamma, GammaRoundTrip) {
  std::mt19937_64 rng(5);
  const CameraIntrinsics K{300, 300, 159.5, 95.5, 320, 192};
  const PlaneParams plane = oracle::random_road_plane(rng);
  GammaMap g(320, 192, true);
  std::uniform_real_distribution<double> u(-0.05, 0.3);
  for (double& v : g.values().data()) v = u(rng);
  const DepthMap d = depth_from_gamma(g, plane, K);
  const HeightMap h = height_from_gamma(g, d);
  std::size_t checked = 0;
  for (int y = 0; y < 192; ++y) {
    for (int x = 0; x < 320; ++x) {
      if (!d.valid(x, y)) continue;
      EXPECT_NEAR(gamma_of(h(x, y), d(x, y)), g(x, y), 1e-12);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10000u);
}

TEST(DepthRatio, MatchesDirectDepths) {
  std::mt19937_64 rng(6);
  const CameraIntrinsics K = oracle::random_camera(rng);
  const PlaneParams plane = oracle::random_road_plane(rng);
  const RigidMotion m = oracle::random_motion(rng, 2.0, 1.0);
  const Homography H = homography_from_motion(K, m, plane);
  std::uniform_real_distribution<double> xy(-5, 5), z(3, 60);
  for (int i = 0; i < 200; ++i) {
    const Vec3 Ps(xy(rng), xy(rng), z(rng));
    const Vec3 Pt = m.R * Ps + m.T;
    const double h = plane.h_c - plane.N.dot(Ps);
    const double r = depth_ratio(H, oracle::pinhole(K, Ps), h, Ps.z(), m, plane);
    EXPECT_NEAR(r, Pt.z() / Ps.z(), 1e-9);
  }
}

TEST(TransformPlane, PointsStayOnPlane) {
  std::mt19937_64 rng(8);
  const PlaneParams plane = oracle::random_road_plane(rng);
  const RigidMotion m = oracle::random_motion(rng, 5.0, 1.0);
  const PlaneParams t = transform_plane(plane, m);
  EXPECT_NEAR(t.N.norm(), 1.0, 1e-12);
  const auto P = oracle::plane_point(CameraIntrinsics{100, 100, 0, 0, 1, 1}, plane, Vec2(3, 40));
  ASSERT_TRUE(P.has_value());
  EXPECT_NEAR(t.N.dot(m.R * *P + m.T), t.h_c, 1e-12);
}
