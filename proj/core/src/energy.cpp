#include "parallax/energy.hpp"

#include <cmath>

namespace parallax {

void validate(const EnergyWeights& w) {
  const double all[] = {w.lambda_s, w.lambda_p, w.lambda_sm, w.alpha, w.beta};
  for (double v : all) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "energy weights must be finite");
  }
  if (w.lambda_s < 0.0 || w.lambda_p < 0.0 || w.lambda_sm < 0.0) {
    fail(ErrorCode::InvalidArgument, "energy weights must be nonnegative");
  }
  if (w.alpha < 0.0 || w.alpha > 1.0) {
    fail(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (w.beta < 0.0) fail(ErrorCode::InvalidArgument, "beta must be nonnegative");
}

SsimMap ssim_map(const Image& a, const Image& b, const Mask* mask) {
  if (!a.same_shape(b)) fail(ErrorCode::GridMismatch, "ssim_map: images differ in shape");
  if (mask) require_same_shape(a, *mask, "ssim_map");
  const int W = a.width();
  const int H = a.height();
  auto usable = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < W && y < H && (!mask || (*mask)(x, y));
  };

  SsimMap out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!usable(x, y)) continue;
      double acc = 0.0;
      for (int c = 0; c < a.channels(); ++c) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        int n = 0;
        for (int j = -1; j <= 1; ++j) {
          for (int i = -1; i <= 1; ++i) {
            if (!usable(x + i, y + j)) continue;
            const double va = a.at(x + i, y + j, c);
            const double vb = b.at(x + i, y + j, c);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
            sab += va * vb;
            ++n;
          }
        }
        const double mu_a = sa / n;
        const double mu_b = sb / n;
        const double var_a = saa / n - mu_a * mu_a;
        const double var_b = sbb / n - mu_b * mu_b;
        const double cov = sab / n - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + kSsimC1) * (2.0 * cov + kSsimC2);
        const double den = (mu_a * mu_a + mu_b * mu_b + kSsimC1) * (var_a + var_b + kSsimC2);
        acc += num / den;
      }
      out.set(x, y, acc / a.channels());
    }
  }
  return out;
}

double photometric_energy(const Image& target, const Image& reconstructed,
                          const Mask& mask, double alpha) {
  if (!target.same_shape(reconstructed)) {
    fail(ErrorCode::GridMismatch, "photometric_energy: images differ in shape");
  }
  require_same_shape(target, mask, "photometric_energy");
  const SsimMap ssim = ssim_map(target, reconstructed, &mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!mask(x, y)) continue;
      double l1 = 0.0;
      for (int c = 0; c < target.channels(); ++c) {
        l1 += std::abs(static_cast<double>(target.at(x, y, c)) - reconstructed.at(x, y, c));
      }
      l1 /= target.channels();
      sum += alpha * (1.0 - ssim(x, y)) / 2.0 + (1.0 - alpha) * l1;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "photometric_energy: empty mask");
  return sum / static_cast<double>(n);
}

double sparse_gamma_energy(const GammaMap& gamma, const GammaMap& gamma_gt) {
  require_same_shape(gamma, gamma_gt, "sparse_gamma_energy");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < gamma.height(); ++y) {
    for (int x = 0; x < gamma.width(); ++x) {
      if (!gamma.valid(x, y) || !gamma_gt.valid(x, y)) continue;
      sum += std::abs(gamma(x, y) - gamma_gt(x, y));
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "sparse_gamma_energy: no jointly valid cells");
  return sum;
}

double smoothness_energy(const FlowField& flow, const Image& target, double beta) {
  require_same_shape(flow, target, "smoothness_energy");
  const int W = flow.width();
  const int H = flow.height();
  double sum = 0.0;
  const int steps[2][2] = {{1, 0}, {0, 1}};
  for (const auto& d : steps) {
    const int dx = d[0];
    const int dy = d[1];
    for (int y = dy; y < H - dy; ++y) {
      for (int x = dx; x < W - dx; ++x) {
        if (!flow.valid(x - dx, y - dy) || !flow.valid(x, y) || !flow.valid(x + dx, y + dy)) {
          continue;
        }
        const Vec2 second = flow(x + dx, y + dy) - 2.0 * flow(x, y) + flow(x - dx, y - dy);
        const double grad =
            0.5 * (static_cast<double>(target.gray(x + dx, y + dy)) - target.gray(x - dx, y - dy));
        sum += second.squaredNorm() * std::exp(-beta * std::abs(grad));
      }
    }
  }
  return sum;
}

double total_energy(const EnergyParts& parts, const EnergyWeights& w) {
  return w.lambda_s * parts.sparse + w.lambda_p * parts.photometric +
         w.lambda_sm * parts.smoothness;
}

}  // namespace parallax
