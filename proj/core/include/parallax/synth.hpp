#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parallax/geometry.hpp"
#include "parallax/plane_fit.hpp"
#include "parallax/types.hpp"

/// Plane-plus-boxes world with closed-form ray intersections. Everything it
/// produces is exact, so the rest of the library is tested against it.
///
/// World coordinates are the source camera frame. Surfaces carry a
/// procedural texture defined in world space: a smooth checkerboard whose
/// amplitude is modulated by hashed value noise, plus hashed sinusoids. Each
/// component is attenuated by a Gaussian prefilter sized to the source
/// camera's pixel footprint at the surface point, so both views see the same
/// band-limited texture.
namespace parallax::synth {

/// Axis-aligned box in the source camera frame.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  int texture = 1;
};

struct SceneSpec {
  CameraIntrinsics K;
  PlaneParams plane;   ///< source frame
  RigidMotion motion;  ///< source -> target
  std::vector<Box> boxes;
  int plane_texture = 0;
  std::uint64_t seed = 0;
  std::string label = "synthetic";
};

/// Throws InvalidArgument for boxes dipping below the plane, a camera inside
/// a box, or invalid calibration.
void validate(const SceneSpec& scene);

enum class View { Source, Target };

inline constexpr int kSky = -1;
inline constexpr int kPlaneId = 0;  ///< boxes are 1 + index

struct RenderedFrame {
  Image image;      ///< 3 channels
  DepthMap depth;   ///< valid exactly where a surface is hit
  Grid<int> hit_id; ///< kSky, kPlaneId or 1 + box index
};

RenderedFrame render(const SceneSpec& scene, View which);

struct GroundTruth {
  GammaMap gamma;
  DepthMap depth;
  HeightMap height;
  FlowField u_opt;  ///< p - p_s
  FlowField u_res;  ///< p - p^w
  Homography H;     ///< source -> target, induced by scene.plane
  PlaneParams target_plane;
  Mask road;        ///< target pixels that see the plane
  PointCloud cloud; ///< source-frame samples of visible surfaces
};

/// All maps on the target grid. Depth, gamma and height are valid where the
/// target ray hits a surface; flows additionally require the point to be
/// visible and in bounds in the source view.
GroundTruth ground_truth(const SceneSpec& scene, int cloud_stride = 4);

/// Road scene with boxes from 9 m to 70 m, mild pitch/yaw and forward
/// motion. The default size is 320 x 192.
SceneSpec standard_scene(int width = 320, int height = 192, std::uint64_t seed = 0);

SceneSpec plane_only_scene(int width = 320, int height = 192, std::uint64_t seed = 0);

/// Texture intensity (before tinting) at a world point on a surface with the
/// given normal. Exposed for tests.
double texture_value(const SceneSpec& scene, int texture, const Vec3& P,
                     const Vec3& normal, double focal);

}  // namespace parallax::synth
