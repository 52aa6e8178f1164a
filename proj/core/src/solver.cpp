#include "parallax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace parallax {

GammaSolution solve_gamma_at(const Vec2& u, const Vec2& p, const Epipole& e,
                             double Tz, double h_c) {
  if (!e.defined) {
    fail(ErrorCode::InvalidArgument, "solve_gamma_at: epipole undefined, use the T_z = 0 branch");
  }
  const Vec2 d = p - e.e;
  const double dd = d.squaredNorm();
  if (dd < kEpipoleExclusion * kEpipoleExclusion) {
    fail(ErrorCode::EpipoleDegeneracy, "solve_gamma_at: pixel within the epipole exclusion radius");
  }
  const double s = u.dot(d) / dd;
  if (std::abs(s - 1.0) < kEpsSingular) {
    fail(ErrorCode::SingularRatio, "solve_gamma_at: flow ratio is 1");
  }
  const double k = s / (s - 1.0);
  const Vec2 ortho = u - s * d;
  return GammaSolution{k * h_c / Tz, ortho.norm()};
}

double solve_gamma_tz0(const Vec2& u, const Vec3& t, double h_c) {
  const Vec2 txy(t.x(), t.y());
  const double n2 = txy.squaredNorm();
  if (!(n2 > 0.0)) {
    fail(ErrorCode::ZeroTranslation, "solve_gamma_tz0: no in-image translation");
  }
  return h_c * u.dot(txy) / n2;
}

SolverReport solve_gamma_map(const FlowField& flow, const RigidMotion& motion,
                             const PlaneParams& plane, const CameraIntrinsics& K) {
  if (flow.width() != K.width || flow.height() != K.height) {
    fail(ErrorCode::GridMismatch, "solve_gamma_map: flow grid does not match intrinsics");
  }
  if (!(plane.h_c > 0.0)) {
    fail(ErrorCode::DegeneratePlane, "solve_gamma_map: camera height must be positive");
  }
  const Epipole e = epipole(K, motion);
  const Vec3 t = K.matrix() * motion.T;
  const Vec2 txy(t.x(), t.y());
  const double Tz = motion.T.z();

  SolverReport report{GammaMap(flow.width(), flow.height()),
                      ResidualMap(flow.width(), flow.height())};
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.valid(x, y)) continue;
      ++report.valid_input;
      const Vec2& u = flow(x, y);
      if (!e.defined) {
        const double n2 = txy.squaredNorm();
        if (!(n2 > 0.0)) {
          ++report.degenerate_epipole;
          continue;
        }
        const double s = u.dot(txy) / n2;
        report.gamma.set(x, y, plane.h_c * s);
        report.orthogonal_residual.set(x, y, (u - s * txy).norm());
        ++report.solved;
        continue;
      }
      const Vec2 d = Vec2(x, y) - e.e;
      const double dd = d.squaredNorm();
      if (dd < kEpipoleExclusion * kEpipoleExclusion) {
        ++report.degenerate_epipole;
        continue;
      }
      const double s = u.dot(d) / dd;
      if (std::abs(s - 1.0) < kEpsSingular) {
        ++report.singular;
        continue;
      }
      const double k = s / (s - 1.0);
      report.gamma.set(x, y, k * plane.h_c / Tz);
      report.orthogonal_residual.set(x, y, (u - s * d).norm());
      ++report.solved;
    }
  }
  return report;
}

namespace {

// Summed-area table with a zero border row/column.
class Integral {
 public:
  Integral(int w, int h) : w_(w), h_(h), data_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

  template <typename F>
  void build(F&& value) {
    for (int y = 0; y < h_; ++y) {
      double row = 0.0;
      for (int x = 0; x < w_; ++x) {
        row += value(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }
  // Sum over [x0, x1] x [y0, y1], inclusive.
  double sum(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_;
  int h_;
  std::vector<double> data_;
};

double patch_sad(const Image& tgt, const Image& src, int x, int y, int dx, int dy,
                 int half) {
  double s = 0.0;
  for (int j = -half; j <= half; ++j) {
    for (int i = -half; i <= half; ++i) {
      s += std::abs(static_cast<double>(tgt.at(x + i, y + j)) -
                    src.at(x + i + dx, y + j + dy));
    }
  }
  return s;
}

double parabola_offset(double cm, double c0, double cp) {
  const double den = cm - 2.0 * c0 + cp;
  if (!(den > 0.0)) return 0.0;
  return std::clamp(0.5 * (cm - cp) / den, -0.5, 0.5);
}

}  // namespace

FlowField block_match_flow(const Image& warped_source, const Image& target,
                           const BlockMatchConfig& cfg, const Mask* warped_valid) {
  if (warped_source.width() != target.width() ||
      warped_source.height() != target.height()) {
    fail(ErrorCode::GridMismatch, "block_match_flow: images differ in size");
  }
  if (warped_valid) require_same_shape(warped_source, *warped_valid, "block_match_flow");
  const int W = target.width();
  const int H = target.height();
  if (cfg.patch < 1 || cfg.patch % 2 == 0 || cfg.patch > W || cfg.patch > H) {
    fail(ErrorCode::PatchTooLarge, "block_match_flow: patch must be odd and fit the image");
  }
  if (cfg.radius < 0) {
    fail(ErrorCode::InvalidArgument, "block_match_flow: negative search radius");
  }
  const int half = cfg.patch / 2;
  const int r = cfg.radius;
  const double area = static_cast<double>(cfg.patch) * cfg.patch;
  const Image src = warped_source.to_gray();
  const Image tgt = target.to_gray();

  const std::size_t n = static_cast<std::size_t>(W) * H;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n, inf);
  std::vector<int> best_dx(n, 0), best_dy(n, 0);
  std::vector<double> cost_sum(n, 0.0);
  std::vector<int> cost_count(n, 0);

  Integral ad(W, H);
  Integral bad(W, H);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      auto source_ok = [&](int x, int y) {
        const int sx = x + dx;
        const int sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= W || sy >= H) return false;
        return !warped_valid || (*warped_valid)(sx, sy) != 0;
      };
      ad.build([&](int x, int y) {
        return source_ok(x, y)
                   ? std::abs(static_cast<double>(tgt.at(x, y)) - src.at(x + dx, y + dy))
                   : 0.0;
      });
      bad.build([&](int x, int y) { return source_ok(x, y) ? 0.0 : 1.0; });
      const int d2 = dx * dx + dy * dy;
      for (int y = half; y < H - half; ++y) {
        for (int x = half; x < W - half; ++x) {
          if (bad.sum(x - half, y - half, x + half, y + half) > 0.0) continue;
          const double c = ad.sum(x - half, y - half, x + half, y + half);
          const std::size_t i = static_cast<std::size_t>(y) * W + x;
          cost_sum[i] += c;
          ++cost_count[i];
          const int bd2 = best_dx[i] * best_dx[i] + best_dy[i] * best_dy[i];
          if (c < best[i] || (c == best[i] && d2 < bd2)) {
            best[i] = c;
            best_dx[i] = dx;
            best_dy[i] = dy;
          }
        }
      }
    }
  }

  const int window = (2 * r + 1) * (2 * r + 1);
  FlowField flow(W, H);
  for (int y = half; y < H - half; ++y) {
    for (int x = half; x < W - half; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (cost_count[i] < window) continue;
      const double mean = cost_sum[i] / cost_count[i];
      if ((mean - best[i]) / area < cfg.contrast_threshold) continue;

      const int dx = best_dx[i];
      const int dy = best_dy[i];
      const double c0 = patch_sad(tgt, src, x, y, dx, dy, half);
      double ox = 0.0;
      double oy = 0.0;
      // A zero-cost match is exact; the parabola only models noisy minima.
      if (c0 > 0.0) {
        if (std::abs(dx) < r) {
          ox = parabola_offset(patch_sad(tgt, src, x, y, dx - 1, dy, half), c0,
                               patch_sad(tgt, src, x, y, dx + 1, dy, half));
        }
        if (std::abs(dy) < r) {
          oy = parabola_offset(patch_sad(tgt, src, x, y, dx, dy - 1, half), c0,
                               patch_sad(tgt, src, x, y, dx, dy + 1, half));
        }
      }
      flow.set(x, y, Vec2(-(dx + ox), -(dy + oy)));
    }
  }
  return flow;
}

}  // namespace parallax
