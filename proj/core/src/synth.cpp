#include "parallax/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace parallax::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSkyValue = 0.85;
constexpr double kMinCosine = 0.05;
constexpr double kPrefilterScale = 1.0;
constexpr double kCheckerCell = 0.6;  // meters
constexpr double kNoiseSpacing = 4.0;  // meters
constexpr int kSinusoids = 5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double hash_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                 std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c * 0x85157af5ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double lattice(std::uint64_t seed, int texture, long long i, long long j) {
  return hash_unit(seed, static_cast<std::uint64_t>(texture) + 1000,
                   static_cast<std::uint64_t>(i) * 73856093ULL,
                   static_cast<std::uint64_t>(j) * 19349663ULL) *
             2.0 -
         1.0;
}

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(std::uint64_t seed, int texture, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto i = static_cast<long long>(fu);
  const auto j = static_cast<long long>(fv);
  const double su = quintic(u - fu);
  const double sv = quintic(v - fv);
  const double a = lattice(seed, texture, i, j);
  const double b = lattice(seed, texture, i + 1, j);
  const double c = lattice(seed, texture, i, j + 1);
  const double d = lattice(seed, texture, i + 1, j + 1);
  return (a + su * (b - a)) + sv * ((c + su * (d - c)) - (a + su * (b - a)));
}

// Frequency response of a Gaussian prefilter with standard deviation sigma.
double attenuation(double sigma, double wavelength) {
  const double r = sigma / wavelength;
  return std::exp(-2.0 * kPi * kPi * r * r);
}

// In-surface coordinates for a point with the given outward normal.
Eigen::Vector2d surface_coords(const Vec3& P, const Vec3& normal) {
  Vec3 ref = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
  const Vec3 e1 = (ref - ref.dot(normal) * normal).normalized();
  const Vec3 e2 = normal.cross(e1);
  return {P.dot(e1), P.dot(e2)};
}

std::array<double, 3> tint(const SceneSpec& scene, int texture) {
  if (texture == 0) return {1.0, 1.0, 1.0};
  return {0.7 + 0.3 * hash_unit(scene.seed, texture, 11),
          0.7 + 0.3 * hash_unit(scene.seed, texture, 12),
          0.7 + 0.3 * hash_unit(scene.seed, texture, 13)};
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int id = kSky;
  Vec3 normal = Vec3::Zero();
};

struct Ray {
  Vec3 origin;
  Vec3 dir;  // camera-frame z component is 1, so t is the depth
};

void intersect_plane(const PlaneParams& plane, const Ray& ray, Hit& hit) {
  const double den = plane.N.dot(ray.dir);
  if (std::abs(den) < 1e-300) return;
  const double t = (plane.h_c - plane.N.dot(ray.origin)) / den;
  if (t > 0.0 && t < hit.t) {
    hit.t = t;
    hit.id = kPlaneId;
    // Face the camera: the camera is on the N.P < h_c side.
    hit.normal = -plane.N;
  }
}

void intersect_box(const Box& box, int id, const Ray& ray, Hit& hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  double side = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = box.center(a) - 0.5 * box.size(a);
    const double hi = box.center(a) + 0.5 * box.size(a);
    const double d = ray.dir(a);
    const double o = ray.origin(a);
    if (d == 0.0) {
      if (o < lo || o > hi) return;
      continue;
    }
    double t0 = (lo - o) / d;
    double t1 = (hi - o) / d;
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > t_near) {
      t_near = t0;
      axis = a;
      side = s;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return;
  }
  if (axis < 0 || !(t_near > 0.0) || t_near >= hit.t) return;
  hit.t = t_near;
  hit.id = id;
  hit.normal = Vec3::Zero();
  hit.normal(axis) = side;
}

Hit cast(const SceneSpec& scene, const Ray& ray) {
  Hit hit;
  intersect_plane(scene.plane, ray, hit);
  for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
    intersect_box(scene.boxes[i], static_cast<int>(i) + 1, ray, hit);
  }
  return hit;
}

struct CameraPose {
  Mat3 R_cam_to_world;
  Vec3 origin;
};

CameraPose pose(const SceneSpec& scene, View which) {
  if (which == View::Source) return {Mat3::Identity(), Vec3::Zero()};
  const Mat3 Rt = scene.motion.R.transpose();
  return {Rt, -Rt * scene.motion.T};
}

Ray pixel_ray(const SceneSpec& scene, const CameraPose& cam, double x, double y) {
  const Vec3 d((x - scene.K.cx) / scene.K.fx, (y - scene.K.cy) / scene.K.fy, 1.0);
  return Ray{cam.origin, cam.R_cam_to_world * d};
}

int texture_of(const SceneSpec& scene, int id) {
  if (id == kPlaneId) return scene.plane_texture;
  return scene.boxes[static_cast<std::size_t>(id - 1)].texture;
}

}  // namespace

void validate(const SceneSpec& scene) {
  validate(scene.K);
  validate(scene.plane);
  validate(scene.motion);
  const PlaneParams target = transform_plane(scene.plane, scene.motion);
  if (!(target.h_c > 0.0)) {
    fail(ErrorCode::InvalidArgument, "scene: target camera is not above the plane");
  }
  const Vec3 target_origin = -scene.motion.R.transpose() * scene.motion.T;
  for (const auto& box : scene.boxes) {
    if (!(box.size.array() > 0.0).all() || !box.center.allFinite()) {
      fail(ErrorCode::InvalidArgument, "scene: box size must be positive");
    }
    for (int corner = 0; corner < 8; ++corner) {
      Vec3 c = box.center;
      for (int a = 0; a < 3; ++a) {
        c(a) += ((corner >> a) & 1 ? 0.5 : -0.5) * box.size(a);
      }
      if (height_of_point(scene.plane, c) < -1e-12) {
        fail(ErrorCode::InvalidArgument, "scene: box extends below the plane");
      }
    }
    for (const Vec3& o : {Vec3(Vec3::Zero()), target_origin}) {
      const Vec3 rel = (o - box.center).cwiseAbs();
      if ((rel.array() <= 0.5 * box.size.array()).all()) {
        fail(ErrorCode::InvalidArgument, "scene: a camera sits inside a box");
      }
    }
  }
}

double texture_value(const SceneSpec& scene, int texture, const Vec3& P,
                     const Vec3& normal, double focal) {
  const double dist = P.norm();
  const double cosine = std::max(std::abs(normal.dot(P)) / dist, kMinCosine);
  const double sigma = kPrefilterScale * dist / (focal * cosine);
  const Eigen::Vector2d uv = surface_coords(P, normal);
  const std::uint64_t seed = scene.seed;
  const auto tex = static_cast<std::uint64_t>(texture);

  double v = 0.42 + 0.16 * hash_unit(seed, tex, 1);

  const double checker = std::sin(kPi * uv.x() / kCheckerCell) *
                         std::sin(kPi * uv.y() / kCheckerCell);
  const double modulation =
      0.6 + 0.4 * attenuation(sigma, kNoiseSpacing) *
                value_noise(seed, texture, uv.x() / kNoiseSpacing,
                            uv.y() / kNoiseSpacing);
  v += 0.15 * attenuation(sigma, kCheckerCell * std::numbers::sqrt2) * modulation *
       checker;

  for (int j = 0; j < kSinusoids; ++j) {
    const double wavelength = 0.25 * std::pow(10.0, j / 4.0);
    const double theta = 2.0 * kPi * hash_unit(seed, tex, 100 + j);
    const double phase = 2.0 * kPi * hash_unit(seed, tex, 200 + j);
    const double arg = (std::cos(theta) * uv.x() + std::sin(theta) * uv.y()) /
                       wavelength;
    v += 0.05 * attenuation(sigma, wavelength) * std::sin(2.0 * kPi * arg + phase);
  }
  return std::clamp(v, 0.0, 1.0);
}

RenderedFrame render(const SceneSpec& scene, View which) {
  validate(scene);
  const int W = scene.K.width;
  const int H = scene.K.height;
  const CameraPose cam = pose(scene, which);
  const double focal = std::min(scene.K.fx, scene.K.fy);

  RenderedFrame frame{Image(W, H, 3), DepthMap(W, H), Grid<int>(W, H, kSky)};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Ray ray = pixel_ray(scene, cam, x, y);
      const Hit hit = cast(scene, ray);
      if (hit.id == kSky) {
        for (int c = 0; c < 3; ++c) frame.image.at(x, y, c) = static_cast<float>(kSkyValue);
        continue;
      }
      const Vec3 P = ray.origin + hit.t * ray.dir;
      const int tex = texture_of(scene, hit.id);
      const double v = texture_value(scene, tex, P, hit.normal, focal);
      const auto tn = tint(scene, tex);
      for (int c = 0; c < 3; ++c) {
        frame.image.at(x, y, c) = static_cast<float>(std::clamp(v * tn[c], 0.0, 1.0));
      }
      frame.depth.set(x, y, hit.t);
      frame.hit_id(x, y) = hit.id;
    }
  }
  return frame;
}

GroundTruth ground_truth(const SceneSpec& scene, int cloud_stride) {
  validate(scene);
  if (cloud_stride < 1) {
    fail(ErrorCode::InvalidArgument, "ground_truth: cloud stride must be >= 1");
  }
  const CameraIntrinsics& K = scene.K;
  const int W = K.width;
  const int Hh = K.height;
  const CameraPose target_cam = pose(scene, View::Target);
  const CameraPose source_cam = pose(scene, View::Source);
  const Mat3 Rt = scene.motion.R.transpose();

  GroundTruth gt{GammaMap(W, Hh),
                 DepthMap(W, Hh),
                 HeightMap(W, Hh),
                 FlowField(W, Hh),
                 FlowField(W, Hh),
                 homography_from_motion(K, scene.motion, scene.plane),
                 transform_plane(scene.plane, scene.motion),
                 Mask(W, Hh, 0),
                 PointCloud{}};

  for (int y = 0; y < Hh; ++y) {
    for (int x = 0; x < W; ++x) {
      const Ray ray = pixel_ray(scene, target_cam, x, y);
      const Hit hit = cast(scene, ray);
      if (hit.id == kSky) continue;
      const double Z = hit.t;
      const Vec2 p(x, y);
      // Source-frame point from the target depth.
      const Vec3 P_t = backproject(K, p, Z);
      const Vec3 P_s = Rt * (P_t - scene.motion.T);
      const double h = hit.id == kPlaneId ? 0.0 : height_of_point(scene.plane, P_s);

      gt.depth.set(x, y, Z);
      gt.height.set(x, y, h);
      gt.gamma.set(x, y, h / Z);
      gt.road(x, y) = hit.id == kPlaneId;

      if (!(P_s.z() > 0.0)) continue;
      const Vec2 p_s = project(K, P_s);
      if (!(p_s.x() >= 0.0 && p_s.x() <= W - 1 && p_s.y() >= 0.0 && p_s.y() <= Hh - 1)) {
        continue;
      }
      const Hit seen = cast(scene, pixel_ray(scene, source_cam, p_s.x(), p_s.y()));
      if (seen.id == kSky ||
          std::abs(seen.t - P_s.z()) > 1e-7 * std::max(1.0, P_s.z())) {
        continue;
      }
      const Vec3 q = gt.H.H * Vec3(p_s.x(), p_s.y(), 1.0);
      if (std::abs(q.z()) < kEpsDivide) continue;
      const Vec2 p_w(q.x() / q.z(), q.y() / q.z());
      gt.u_opt.set(x, y, p - p_s);
      gt.u_res.set(x, y, p - p_w);
    }
  }

  const RenderedFrame source = render(scene, View::Source);
  for (int y = 0; y < Hh; y += cloud_stride) {
    for (int x = 0; x < W; x += cloud_stride) {
      if (!source.depth.valid(x, y)) continue;
      gt.cloud.points.push_back(backproject(K, Vec2(x, y), source.depth(x, y)));
      gt.cloud.labels.push_back(source.hit_id(x, y) == kPlaneId ? 1 : 0);
    }
  }
  return gt;
}

SceneSpec standard_scene(int width, int height, std::uint64_t seed) {
  SceneSpec s = plane_only_scene(width, height, seed);
  s.label = "standard";
  // Bottoms rest on the road (y = 1.5 in the source frame, y pointing down).
  auto on_road = [](double x, double z, Vec3 size, int texture) {
    return Box{Vec3(x, 1.5 - 0.5 * size.y(), z), size, texture};
  };
  s.boxes = {
      on_road(1.0, 9.0, Vec3(0.8, 0.2, 0.8), 1),
      on_road(-3.0, 12.0, Vec3(1.8, 1.5, 4.0), 2),
      on_road(2.8, 20.0, Vec3(1.6, 1.8, 3.5), 3),
      on_road(-1.5, 25.0, Vec3(0.6, 0.4, 0.6), 4),
      on_road(-4.5, 35.0, Vec3(2.0, 4.0, 6.0), 5),
      on_road(4.0, 45.0, Vec3(2.5, 2.5, 5.0), 6),
      on_road(-1.0, 65.0, Vec3(1.8, 1.2, 3.0), 7),
      on_road(6.0, 70.0, Vec3(3.0, 5.0, 8.0), 8),
  };
  return s;
}

SceneSpec plane_only_scene(int width, int height, std::uint64_t seed) {
  const CameraIntrinsics base{280.0, 280.0, 159.5, 95.5, 320, 192};
  SceneSpec s;
  s.K = (width == base.width && height == base.height) ? base
                                                       : base.resized(width, height);
  s.plane = PlaneParams{Vec3::UnitY(), 1.5};
  s.motion = RigidMotion::from_euler_deg(0.0, 0.2, 0.3, Vec3(0.05, 0.0, -1.2));
  s.plane_texture = 0;
  s.seed = seed;
  s.label = "plane";
  return s;
}

}  // namespace parallax::synth
