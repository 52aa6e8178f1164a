#include "parallax/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallax/error.hpp"

namespace parallax {

FeatureMap::FeatureMap(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height < 0 || width < 0) {
    fail(ErrorCode::ShapeMismatch, "feature map: bad dimensions");
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

void validate(const AttentionParams& p) {
  const auto C = p.w_query.cols();
  const auto Cq = p.w_query.rows();
  if (C == 0 || Cq == 0 || p.w_key.cols() != C || p.w_value.cols() != C ||
      p.w_key.rows() != Cq) {
    fail(ErrorCode::ShapeMismatch, "attention: projection shapes disagree");
  }
  if (p.field < 1 || p.field % 2 == 0) {
    fail(ErrorCode::ShapeMismatch, "attention: field size must be odd and positive");
  }
  if (p.dilation < 1) fail(ErrorCode::ShapeMismatch, "attention: dilation must be positive");
  const std::size_t expected =
      static_cast<std::size_t>(p.field) * p.field * p.w_value.rows();
  if (p.relative.size() != expected) {
    fail(ErrorCode::ShapeMismatch, "attention: relative embedding table has " +
                                       std::to_string(p.relative.size()) +
                                       " entries, expected " + std::to_string(expected));
  }
}

namespace {

// Applies a 1x1 projection: out(:, y, x) = W * in(:, y, x). Returns H*W
// column vectors stored as a (C' x H*W) matrix.
Eigen::MatrixXf project(const Eigen::MatrixXf& W, const FeatureMap& in) {
  const Eigen::Index n = static_cast<Eigen::Index>(in.height()) * in.width();
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      X(in.data().data(), in.channels(), n);
  return W * X;
}

}  // namespace

FeatureMap cross_attention_forward(const FeatureMap& source, const FeatureMap& target,
                                   const AttentionParams& params,
                                   AttentionDiagnostics* diagnostics) {
  validate(params);
  if (!source.same_shape(target)) {
    fail(ErrorCode::ShapeMismatch, "attention: source and target shapes differ");
  }
  if (source.channels() != params.in_channels()) {
    fail(ErrorCode::ShapeMismatch, "attention: input channels do not match the projections");
  }
  const int H = source.height();
  const int W = source.width();
  const int k = params.field;
  const int half = k / 2;
  const int dil = params.dilation;
  const int Cv = params.out_channels();

  const Eigen::MatrixXf Q = project(params.w_query, source);
  const Eigen::MatrixXf K = project(params.w_key, target);
  const Eigen::MatrixXf V = project(params.w_value, target);

  FeatureMap out(Cv, H, W);
  if (diagnostics) {
    diagnostics->weights.assign(static_cast<std::size_t>(H) * W * k * k, 0.0f);
  }
  std::vector<double> logits(static_cast<std::size_t>(k) * k);
  std::vector<double> acc(Cv);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Eigen::Index o = static_cast<Eigen::Index>(y) * W + x;
      double max_logit = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
          const int py = y + (j - half) * dil;
          const int px = x + (i - half) * dil;
          double& l = logits[static_cast<std::size_t>(j) * k + i];
          if (px < 0 || py < 0 || px >= W || py >= H) {
            l = -std::numeric_limits<double>::infinity();
            continue;
          }
          const Eigen::Index p = static_cast<Eigen::Index>(py) * W + px;
          l = static_cast<double>(Q.col(o).dot(K.col(p)));
          max_logit = std::max(max_logit, l);
        }
      }
      double z = 0.0;
      for (double& l : logits) {
        l = std::isinf(l) ? 0.0 : std::exp(l - max_logit);
        z += l;
      }
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
          const std::size_t f = static_cast<std::size_t>(j) * k + i;
          if (logits[f] == 0.0) continue;
          const double w = logits[f] / z;
          const int py = y + (j - half) * dil;
          const int px = x + (i - half) * dil;
          const Eigen::Index p = static_cast<Eigen::Index>(py) * W + px;
          const float* r = &params.relative[f * Cv];
          for (int c = 0; c < Cv; ++c) {
            acc[c] += w * (static_cast<double>(V(c, p)) + r[c]);
          }
          if (diagnostics) {
            diagnostics->weights[(static_cast<std::size_t>(o) * k + j) * k + i] =
                static_cast<float>(w);
          }
        }
      }
      for (int c = 0; c < Cv; ++c) out.at(c, y, x) = static_cast<float>(acc[c]);
    }
  }
  return out;
}

}  // namespace parallax
