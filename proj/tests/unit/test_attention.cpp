#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "parallax/attention.hpp"
#include "unit/helpers.hpp"

using namespace parallax;

namespace {

FeatureMap random_features(int c, int h, int w, std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  FeatureMap f(c, h, w);
  for (auto& v : f.data()) v = n(rng);
  return f;
}

AttentionParams random_params(int c, int cq, int cv, int field, int dilation,
                              std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 0.5f);
  AttentionParams p;
  p.w_query = Eigen::MatrixXf::NullaryExpr(cq, c, [&] { return n(rng); });
  p.w_key = Eigen::MatrixXf::NullaryExpr(cq, c, [&] { return n(rng); });
  p.w_value = Eigen::MatrixXf::NullaryExpr(cv, c, [&] { return n(rng); });
  p.relative.resize(static_cast<std::size_t>(field) * field * cv);
  for (auto& v : p.relative) v = n(rng);
  p.field = field;
  p.dilation = dilation;
  return p;
}

FeatureMap crop(const FeatureMap& f, int x0, int y0, int w, int h) {
  FeatureMap out(f.channels(), h, w);
  for (int c = 0; c < f.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = f.at(c, y + y0, x + x0);
    }
  }
  return out;
}

}  // namespace

TEST(CrossAttention, SingletonFieldIsValuePlusCenter) {
  std::mt19937_64 rng(1);
  const FeatureMap s = random_features(4, 6, 7, rng);
  const FeatureMap t = random_features(4, 6, 7, rng);
  const AttentionParams p = random_params(4, 3, 5, 1, 1, rng);
  const FeatureMap y = cross_attention_forward(s, t, p);
  for (int c = 0; c < 5; ++c) {
    for (int r = 0; r < 6; ++r) {
      for (int x = 0; x < 7; ++x) {
        float v = 0.0f;
        for (int i = 0; i < 4; ++i) v += p.w_value(c, i) * t.at(i, r, x);
        EXPECT_NEAR(y.at(c, r, x), v + p.relative[c], 1e-5);
      }
    }
  }
}

TEST(CrossAttention, ConstantValueIsReproduced) {
  std::mt19937_64 rng(2);
  const FeatureMap s = random_features(3, 10, 12, rng);
  FeatureMap t = random_features(3, 10, 12, rng);
  AttentionParams p = random_params(3, 4, 2, 5, 2, rng);
  // Channel 0 of the target is constant 1 and the value projection reads only it.
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) t.at(0, y, x) = 1.0f;
  }
  p.w_value.setZero();
  p.w_value(0, 0) = 0.75f;
  p.w_value(1, 0) = -2.0f;
  std::fill(p.relative.begin(), p.relative.end(), 0.0f);
  const FeatureMap y = cross_attention_forward(s, t, p);
  for (int r = 0; r < 10; ++r) {
    for (int x = 0; x < 12; ++x) {
      EXPECT_NEAR(y.at(0, r, x), 0.75f, 1e-6);
      EXPECT_NEAR(y.at(1, r, x), -2.0f, 1e-6);
    }
  }
}

TEST(CrossAttention, LocalityOutsideDilatedField) {
  std::mt19937_64 rng(3);
  const int H = 48, W = 48;
  const FeatureMap s = random_features(3, H, W, rng);
  const FeatureMap t = random_features(3, H, W, rng);
  const AttentionParams p = random_params(3, 4, 3, 19, 2, rng);
  const FeatureMap base = cross_attention_forward(s, t, p);
  const int ox = 24, oy = 24;
  std::uniform_int_distribution<int> coord(0, 47);
  int probes = 0;
  while (probes < 6) {
    const int px = coord(rng), py = coord(rng);
    const int dx = px - ox, dy = py - oy;
    const bool inside = dx % 2 == 0 && dy % 2 == 0 && std::abs(dx) <= 18 && std::abs(dy) <= 18;
    if (inside) continue;
    FeatureMap t2 = t;
    for (int c = 0; c < 3; ++c) t2.at(c, py, px) += 5.0f;
    const FeatureMap y = cross_attention_forward(s, t2, p);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(y.at(c, oy, ox), base.at(c, oy, ox));
    ++probes;
  }
  // A perturbation inside the field does change the output.
  FeatureMap t3 = t;
  for (int c = 0; c < 3; ++c) t3.at(c, oy + 18, ox - 18) += 5.0f;
  const FeatureMap y3 = cross_attention_forward(s, t3, p);
  EXPECT_NE(y3.at(0, oy, ox), base.at(0, oy, ox));
}

TEST(CrossAttention, WeightsAreAProbability) {
  std::mt19937_64 rng(4);
  const int H = 9, W = 11, k = 5;
  const FeatureMap s = random_features(2, H, W, rng);
  const FeatureMap t = random_features(2, H, W, rng);
  const AttentionParams p = random_params(2, 3, 2, k, 2, rng);
  AttentionDiagnostics diag;
  cross_attention_forward(s, t, p, &diag);
  ASSERT_EQ(diag.weights.size(), static_cast<std::size_t>(H * W * k * k));
  for (int o = 0; o < H * W; ++o) {
    double sum = 0.0;
    for (int f = 0; f < k * k; ++f) {
      const float w = diag.weights[static_cast<std::size_t>(o) * k * k + f];
      EXPECT_GE(w, 0.0f);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  // Corner pixel: neighbors left of and above it carry no weight.
  EXPECT_EQ(diag.weights[0], 0.0f);
}

TEST(CrossAttention, LogitShiftInvariance) {
  std::mt19937_64 rng(5);
  const int C = 3, H = 8, W = 8;
  FeatureMap s = random_features(C + 1, H, W, rng);
  FeatureMap t = random_features(C + 1, H, W, rng);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) s.at(C, y, x) = t.at(C, y, x) = 1.0f;
  }
  AttentionParams p = random_params(C + 1, 3, 2, 3, 1, rng);
  p.w_query.col(C).setZero();
  p.w_key.col(C).setZero();
  p.w_value.col(C).setZero();
  const FeatureMap base = cross_attention_forward(s, t, p);
  // One more query/key row adds q . k = 1 * 3.7 to every logit.
  AttentionParams shifted = p;
  shifted.w_query.conservativeResize(4, Eigen::NoChange);
  shifted.w_key.conservativeResize(4, Eigen::NoChange);
  shifted.w_query.row(3).setZero();
  shifted.w_key.row(3).setZero();
  shifted.w_query(3, C) = 1.0f;
  shifted.w_key(3, C) = 3.7f;
  const FeatureMap y = cross_attention_forward(s, t, shifted);
  for (std::size_t i = 0; i < y.data().size(); ++i) {
    EXPECT_NEAR(y.data()[i], base.data()[i], 1e-6);
  }
}

TEST(CrossAttention, TranslationEquivariance) {
  std::mt19937_64 rng(6);
  const FeatureMap s = random_features(3, 30, 30, rng);
  const FeatureMap t = random_features(3, 30, 30, rng);
  const AttentionParams p = random_params(3, 4, 3, 5, 2, rng);
  const int w = 24, h = 24, sx = 3, sy = 2, reach = 4;
  const FeatureMap a = cross_attention_forward(crop(s, 0, 0, w, h), crop(t, 0, 0, w, h), p);
  const FeatureMap b = cross_attention_forward(crop(s, sx, sy, w, h), crop(t, sx, sy, w, h), p);
  int checked = 0;
  for (int y = reach; y < h - reach - sy; ++y) {
    for (int x = reach; x < w - reach - sx; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(b.at(c, y, x), a.at(c, y + sy, x + sx), 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(CrossAttention, ShapeMismatch) {
  std::mt19937_64 rng(7);
  const FeatureMap s = random_features(3, 5, 5, rng);
  AttentionParams p = random_params(3, 2, 2, 3, 1, rng);
  EXPECT_EQ(code_of([&] { cross_attention_forward(s, random_features(3, 5, 6, rng), p); }),
            ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { cross_attention_forward(random_features(2, 5, 5, rng),
                                                  random_features(2, 5, 5, rng), p); }),
            ErrorCode::ShapeMismatch);
  AttentionParams even = p;
  even.field = 4;
  EXPECT_EQ(code_of([&] { validate(even); }), ErrorCode::ShapeMismatch);
  AttentionParams table = p;
  table.relative.pop_back();
  EXPECT_EQ(code_of([&] { validate(table); }), ErrorCode::ShapeMismatch);
}
