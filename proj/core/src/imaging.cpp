#include "parallax/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace parallax {

namespace {

// Returns false when p is outside the footprint of pixel centers.
bool neighbors(int size, double v, int& i0, int& i1, double& w1) {
  if (!std::isfinite(v)) return false;
  const double f = std::floor(v);
  if (f < 0.0 || f > size - 1) return false;
  i0 = static_cast<int>(f);
  w1 = v - f;
  if (w1 == 0.0) {
    i1 = i0;
    return true;
  }
  i1 = i0 + 1;
  return i1 <= size - 1;
}

bool touches_invalid(const Mask& m, int x0, int x1, int y0, int y1) {
  return !m(x0, y0) || !m(x1, y0) || !m(x0, y1) || !m(x1, y1);
}

}  // namespace

Sample bilinear_sample(const Image& image, const Vec2& p) {
  Sample s;
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double wx = 0.0, wy = 0.0;
  if (!neighbors(image.width(), p.x(), x0, x1, wx) ||
      !neighbors(image.height(), p.y(), y0, y1, wy)) {
    return s;
  }
  for (int c = 0; c < image.channels(); ++c) {
    const double a = image.at(x0, y0, c);
    const double b = image.at(x1, y0, c);
    const double d = image.at(x0, y1, c);
    const double e = image.at(x1, y1, c);
    const double top = a + wx * (b - a);
    const double bottom = d + wx * (e - d);
    double v = top + wy * (bottom - top);
    const double lo = std::min({a, b, d, e});
    const double hi = std::max({a, b, d, e});
    v = std::clamp(v, lo, hi);
    s.value[c] = static_cast<float>(v);
  }
  s.valid = true;
  return s;
}

WarpResult warp_by_homography(const Image& source, const Homography& H_s_to_t) {
  const Homography Hinv = inverse(H_s_to_t);
  WarpResult out{Image(source.width(), source.height(), source.channels()),
                 Mask(source.width(), source.height(), 0)};
  for (int y = 0; y < source.height(); ++y) {
    for (int x = 0; x < source.width(); ++x) {
      const Vec3 q = Hinv.H * Vec3(x, y, 1.0);
      if (std::abs(q.z()) < kEpsDivide) continue;
      const Sample s = bilinear_sample(source, Vec2(q.x() / q.z(), q.y() / q.z()));
      if (!s.valid) continue;
      for (int c = 0; c < source.channels(); ++c) out.image.at(x, y, c) = s.value[c];
      out.valid(x, y) = 1;
    }
  }
  return out;
}

WarpResult reconstruct_target(const Image& warped_source, const FlowField& flow,
                              const Mask* warped_valid) {
  require_same_shape(warped_source, flow, "reconstruct_target");
  if (warped_valid) require_same_shape(warped_source, *warped_valid, "reconstruct_target");
  WarpResult out{Image(warped_source.width(), warped_source.height(),
                       warped_source.channels()),
                 Mask(warped_source.width(), warped_source.height(), 0)};
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.valid(x, y)) continue;
      const Vec2 q = Vec2(x, y) - flow(x, y);
      const Sample s = bilinear_sample(warped_source, q);
      if (!s.valid) continue;
      if (warped_valid) {
        int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
        double w;
        neighbors(warped_source.width(), q.x(), x0, x1, w);
        neighbors(warped_source.height(), q.y(), y0, y1, w);
        if (touches_invalid(*warped_valid, x0, x1, y0, y1)) continue;
      }
      for (int c = 0; c < warped_source.channels(); ++c) {
        out.image.at(x, y, c) = s.value[c];
      }
      out.valid(x, y) = 1;
    }
  }
  return out;
}

double masked_mean_abs_diff(const Image& a, const Image& b, const Mask& mask) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::GridMismatch, "masked_mean_abs_diff: images differ in shape");
  }
  require_same_shape(a, mask, "masked_mean_abs_diff");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!mask(x, y)) continue;
      double d = 0.0;
      for (int c = 0; c < a.channels(); ++c) {
        d += std::abs(static_cast<double>(a.at(x, y, c)) - b.at(x, y, c));
      }
      sum += d / a.channels();
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "masked_mean_abs_diff: empty mask");
  return sum / static_cast<double>(n);
}

Mask mask_and(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_and");
  Mask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] && b.data()[i];
  }
  return out;
}

}  // namespace parallax
