#pragma once

#include <vector>

#include <Eigen/Core>

namespace parallax {

/// C x H x W feature tensor, channel-major (data[(c * H + y) * W + x]).
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width, float fill = 0.0f);

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::vector<float>& data() noexcept { return data_; }
  const std::vector<float>& data() const noexcept { return data_; }

  bool same_shape(const FeatureMap& o) const noexcept {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

 private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Fixed weights for the local cross-attention operator. The projections are
/// the 1x1 convolutions (C' x C matrices, no bias). `relative` holds one
/// C'-vector per field offset, indexed [(j * field + i) * C' + c] for row
/// offset j and column offset i in [0, field).
struct AttentionParams {
  Eigen::MatrixXf w_query;
  Eigen::MatrixXf w_key;
  Eigen::MatrixXf w_value;
  std::vector<float> relative;
  int field = 19;
  int dilation = 2;

  int in_channels() const { return static_cast<int>(w_query.cols()); }
  int out_channels() const { return static_cast<int>(w_value.rows()); }
};

/// Throws ShapeMismatch on inconsistent projection sizes, an even or
/// non-positive field, a non-positive dilation or a wrong-sized table.
void validate(const AttentionParams& params);

/// Softmax weights per output location, indexed
/// [((y * W + x) * field + j) * field + i]; zero for neighbors outside the
/// image.
struct AttentionDiagnostics {
  std::vector<float> weights;
};

/// y_o = sum_{p in field(o)} softmax_p(q_o . k_p) (v_p + r_{o,p}), with q from
/// `source`, k and v from `target`. The field is the dilated field x field
/// neighborhood centered on o; neighbors outside the image are dropped from
/// the softmax support.
FeatureMap cross_attention_forward(const FeatureMap& source, const FeatureMap& target,
                                   const AttentionParams& params,
                                   AttentionDiagnostics* diagnostics = nullptr);

}  // namespace parallax
