#pragma once

#include <array>

#include "parallax/geometry.hpp"
#include "parallax/types.hpp"

namespace parallax {

struct Sample {
  std::array<float, 3> value{};  ///< first `channels` entries are meaningful
  bool valid = false;
};

/// Bilinear interpolation at p. Invalid when any neighbor carrying nonzero
/// weight lies outside the image; integer coordinates read the pixel exactly.
Sample bilinear_sample(const Image& image, const Vec2& p);

struct WarpResult {
  Image image;
  Mask valid;
};

/// Backward warp onto the source grid's shape: out[p] = I_s(H^-1 p).
WarpResult warp_by_homography(const Image& source, const Homography& H_s_to_t);

/// I_t'[p] = I_s^w(p - u[p]); with u = p - p^w the sample lands on p^w.
/// `warped_valid`, when given, also invalidates samples that touch invalid
/// cells of the warped image.
WarpResult reconstruct_target(const Image& warped_source, const FlowField& flow,
                              const Mask* warped_valid = nullptr);

/// Masked mean of the channel-mean absolute difference.
double masked_mean_abs_diff(const Image& a, const Image& b, const Mask& mask);

Mask mask_and(const Mask& a, const Mask& b);

}  // namespace parallax
