#include <random>

#include <benchmark/benchmark.h>

#include "parallax/attention.hpp"
#include "parallax/energy.hpp"
#include "parallax/geometry.hpp"
#include "parallax/imaging.hpp"
#include "parallax/plane_fit.hpp"
#include "parallax/solver.hpp"
#include "parallax/synth.hpp"

using namespace parallax;

namespace {

const synth::SceneSpec& scene() {
  static const synth::SceneSpec s = synth::standard_scene();
  return s;
}

const synth::GroundTruth& truth() {
  static const synth::GroundTruth gt = synth::ground_truth(scene());
  return gt;
}

void BM_Render(benchmark::State& state) {
  const auto s = synth::standard_scene(static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(0) * 3 / 5));
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::render(s, synth::View::Target));
  }
}
BENCHMARK(BM_Render)->Arg(320)->Arg(960)->Unit(benchmark::kMillisecond);

void BM_GroundTruth(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(synth::ground_truth(scene()));
}
BENCHMARK(BM_GroundTruth)->Unit(benchmark::kMillisecond);

void BM_ResidualFlowMap(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(residual_flow_map(truth().gamma, s.motion, s.plane, s.K));
  }
}
BENCHMARK(BM_ResidualFlowMap)->Unit(benchmark::kMicrosecond);

void BM_SolveGammaMap(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_gamma_map(truth().u_res, s.motion, s.plane, s.K));
  }
}
BENCHMARK(BM_SolveGammaMap)->Unit(benchmark::kMicrosecond);

void BM_WarpByHomography(benchmark::State& state) {
  const Image src = synth::render(scene(), synth::View::Source).image;
  for (auto _ : state) benchmark::DoNotOptimize(warp_by_homography(src, truth().H));
}
BENCHMARK(BM_WarpByHomography)->Unit(benchmark::kMicrosecond);

void BM_BlockMatch(benchmark::State& state) {
  const Image src = synth::render(scene(), synth::View::Source).image;
  const Image tgt = synth::render(scene(), synth::View::Target).image;
  const WarpResult w = warp_by_homography(src, truth().H);
  BlockMatchConfig cfg;
  cfg.radius = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(block_match_flow(w.image, tgt, cfg, &w.valid));
}
BENCHMARK(BM_BlockMatch)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const Image a = synth::render(scene(), synth::View::Source).image;
  const Image b = synth::render(scene(), synth::View::Target).image;
  for (auto _ : state) benchmark::DoNotOptimize(ssim_map(a, b));
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);

void BM_Ransac(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  PointCloud cloud;
  for (int i = 0; i < 10000; ++i) {
    cloud.points.emplace_back(u(rng), i % 5 < 3 ? 1.5 : u(rng), 20.0 + u(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ransac_plane(cloud, {}));
}
BENCHMARK(BM_Ransac)->Unit(benchmark::kMillisecond);

void BM_CrossAttention(benchmark::State& state) {
  const int C = 16;
  const int size = static_cast<int>(state.range(0));
  std::mt19937 rng(3);
  std::normal_distribution<float> n(0.0f, 0.3f);
  FeatureMap fs(C, size, size), ft(C, size, size);
  for (auto& v : fs.data()) v = n(rng);
  for (auto& v : ft.data()) v = n(rng);
  AttentionParams p;
  p.w_query = Eigen::MatrixXf::NullaryExpr(C, C, [&] { return n(rng); });
  p.w_key = Eigen::MatrixXf::NullaryExpr(C, C, [&] { return n(rng); });
  p.w_value = Eigen::MatrixXf::NullaryExpr(C, C, [&] { return n(rng); });
  p.relative.resize(static_cast<std::size_t>(p.field) * p.field * C);
  for (auto& v : p.relative) v = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cross_attention_forward(fs, ft, p));
}
BENCHMARK(BM_CrossAttention)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
