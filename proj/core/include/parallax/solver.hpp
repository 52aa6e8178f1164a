#pragma once

#include <cstddef>

#include "parallax/geometry.hpp"
#include "parallax/types.hpp"

namespace parallax {

/// Pixels closer than this to the epipole are unobservable (flow vanishes
/// linearly in |p - e|).
inline constexpr double kEpipoleExclusion = 2.0;

struct GammaSolution {
  double gamma = 0.0;
  double orthogonal_residual = 0.0;  ///< |component of u orthogonal to p - e|
};

/// Inverts u = -k/(1-k) (p - e) by projecting u onto d = p - e:
/// s = u.d / d.d, k = s / (s - 1), gamma = k h_c / T_z.
/// Throws EpipoleDegeneracy when |d| < kEpipoleExclusion and SingularRatio
/// when |s - 1| < kEpsSingular.
GammaSolution solve_gamma_at(const Vec2& u, const Vec2& p, const Epipole& e,
                             double Tz, double h_c);

/// T_z = 0 branch: u = (gamma / h_c) t_xy, so gamma = h_c (u . t_xy) / |t_xy|^2.
/// Throws ZeroTranslation when t_xy vanishes.
double solve_gamma_tz0(const Vec2& u, const Vec3& t, double h_c);

struct ResidualTag;
using ResidualMap = Field<double, ResidualTag>;

struct SolverReport {
  GammaMap gamma;
  ResidualMap orthogonal_residual;  ///< px, on solved cells
  std::size_t degenerate_epipole = 0;
  std::size_t singular = 0;
  std::size_t solved = 0;
  std::size_t valid_input = 0;
};

/// Per-pixel inversion of the residual-flow model, branching on epipole
/// definedness. `plane` is the source-frame plane used to produce the flow.
SolverReport solve_gamma_map(const FlowField& flow, const RigidMotion& motion,
                             const PlaneParams& plane, const CameraIntrinsics& K);

struct BlockMatchConfig {
  int patch = 7;
  int radius = 8;
  double contrast_threshold = 0.01;  ///< per-pixel mean SAD, intensities in [0,1]
};

/// SAD block matching of the target against the homography-warped source.
/// Returns the stored flow convention u = p - p^w with
/// I_t[p] ~ I_s^w[p - u]. Integer argmin refined by a one-step parabola per
/// axis; cells whose search window leaves the image, touches an invalid
/// source cell, or whose cost surface is flatter than the contrast threshold
/// are invalid. Throws PatchTooLarge when the patch is even, non-positive or
/// larger than the image.
FlowField block_match_flow(const Image& warped_source, const Image& target,
                           const BlockMatchConfig& cfg = {},
                           const Mask* warped_valid = nullptr);

}  // namespace parallax
