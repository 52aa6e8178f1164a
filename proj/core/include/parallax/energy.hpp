#pragma once

#include "parallax/types.hpp"

namespace parallax {

struct EnergyWeights {
  double lambda_s = 1.0;
  double lambda_p = 1.0;
  double lambda_sm = 0.1;
  double alpha = 0.85;  ///< SSIM share of the photometric term
  double beta = 1.0;    ///< edge weight of the smoothness term
};

void validate(const EnergyWeights& w);

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

struct SsimTag;
using SsimMap = Field<double, SsimTag>;

/// Per-pixel SSIM over a 3x3 box window (population statistics), computed
/// per channel and averaged. The window is truncated at the image border and,
/// when `mask` is given, to valid cells; cells outside the mask are invalid.
SsimMap ssim_map(const Image& a, const Image& b, const Mask* mask = nullptr);

/// Mean over the mask of alpha (1 - SSIM) / 2 + (1 - alpha) |a - b|, with the
/// L1 term averaged over channels. Throws EmptyMask.
double photometric_energy(const Image& target, const Image& reconstructed,
                          const Mask& mask, double alpha);

/// Sum (not mean) of |gamma - gamma*| over jointly valid cells.
double sparse_gamma_energy(const GammaMap& gamma, const GammaMap& gamma_gt);

/// Sum over horizontal and vertical directions of
/// |u(p+d) - 2u(p) + u(p-d)|^2 exp(-beta |I(p+d) - I(p-d)| / 2), with I the
/// channel-mean intensity. A stencil contributes only when all three flow
/// cells are valid, so border pixels of each direction drop out.
double smoothness_energy(const FlowField& flow, const Image& target, double beta);

struct EnergyParts {
  double sparse = 0.0;
  double photometric = 0.0;
  double smoothness = 0.0;
};

double total_energy(const EnergyParts& parts, const EnergyWeights& w);

}  // namespace parallax
