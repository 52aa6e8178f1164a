#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "parallax/attention.hpp"
#include "parallax/plane_fit.hpp"
#include "parallax/synth.hpp"
#include "parallax/types.hpp"

/// File formats and the dataset directory layout.
///
/// Float maps are PFM: "Pf" (1 channel) or "PF" (3 channels), written
/// little-endian (scale -1.0) with rows bottom-to-top. Values are float32 on
/// disk; invalid cells are stored as NaN and any non-finite value reads back
/// as invalid. Flow fields use 3-channel PFM with a zero third channel.
///
/// Images are binary PPM (P6, 3 channels) or PGM (P5, 1 channel) with
/// maxval 255, quantized by round(v * 255). Masks are PGM with 0/255.
namespace parallax::io {

namespace fs = std::filesystem;

struct FloatMapData {
  Grid<double> values;
  Mask valid;
};

void write_float_map(const fs::path& path, const Grid<double>& values, const Mask& valid);
/// Throws MissingFile, MalformedHeader, or SizeMismatch when the file holds a
/// 3-channel map.
FloatMapData read_float_map(const fs::path& path);

template <typename Tag>
void write_float_map(const fs::path& path, const Field<double, Tag>& map) {
  write_float_map(path, map.values(), map.mask());
}

template <typename Map>
Map read_map(const fs::path& path) {
  FloatMapData d = read_float_map(path);
  Map m;
  m.values() = std::move(d.values);
  m.mask() = std::move(d.valid);
  return m;
}

void write_flow(const fs::path& path, const FlowField& flow);
/// A cell is valid when both components are finite.
FlowField read_flow(const fs::path& path);

void write_image(const fs::path& path, const Image& image);
/// P6 or P5 with maxval 255; anything else is MalformedHeader.
Image read_image(const fs::path& path);

void write_mask(const fs::path& path, const Mask& mask);
Mask read_mask(const fs::path& path);

/// ASCII PLY with float x, y, z and, when labeled, a uchar road property.
void write_point_cloud(const fs::path& path, const PointCloud& cloud);
/// Reads ASCII PLY vertices; unknown vertex properties are skipped.
PointCloud read_point_cloud(const fs::path& path);

/// Raw tensor: "RAWT\n", then "ndim d0 d1 ...\n", then little-endian float32
/// data in row-major order.
struct RawTensor {
  std::vector<int> shape;
  std::vector<float> data;
};

void write_raw_tensor(const fs::path& path, const RawTensor& tensor);
RawTensor read_raw_tensor(const fs::path& path);

/// Directory with w_q.rawt, w_k.rawt, w_v.rawt (C' x C), rel.rawt
/// (field x field x C') and attention.json {"field", "dilation"}.
void write_attention_params(const fs::path& dir, const AttentionParams& params);
AttentionParams read_attention_params(const fs::path& dir);

/// Scene description JSON. "motion" may be given either as {"R": [9
/// row-major], "T": [3]} or as {"roll_deg", "pitch_deg", "yaw_deg", "T"};
/// a document may also name a preset ({"preset": "standard" | "plane_only",
/// "width", "height", "seed"}).
void write_scene(const fs::path& path, const synth::SceneSpec& scene);
synth::SceneSpec read_scene(const fs::path& path);
synth::SceneSpec parse_scene(const std::string& json_text);

void write_calib(const fs::path& path, const CameraIntrinsics& K);
CameraIntrinsics read_calib(const fs::path& path);

/// Everything in a dataset directory. Plane and motion are the source-frame
/// plane and the source-to-target motion.
struct DatasetSample {
  CameraIntrinsics K;
  RigidMotion motion;
  PlaneParams plane;
  Homography H;
  std::uint64_t seed = 0;
  std::string label;
  Image source;
  Image target;
  GammaMap gamma;
  DepthMap depth;
  HeightMap height;
  FlowField u_res;
  FlowField u_opt;
  Mask road;
  PointCloud cloud;
};

struct PairInfo {
  RigidMotion motion;
  PlaneParams plane;
  Homography H;
  std::uint64_t seed = 0;
  std::string label;
};

void write_pair(const fs::path& path, const PairInfo& pair);
PairInfo read_pair(const fs::path& path);

DatasetSample make_sample(const synth::SceneSpec& scene);

/// Writes calib.json, pair.json, source.ppm, target.ppm, gt_gamma.pfm,
/// gt_depth.pfm, gt_height.pfm, gt_flow.pfm (residual flow),
/// gt_opt_flow.pfm, gt_depth_mask.pgm, gt_flow_mask.pgm, road_mask.pgm and
/// points.ply.
void write_sample(const fs::path& dir, const DatasetSample& sample);

/// Throws MissingFile for absent files and IncongruentGrids when a grid does
/// not match the calibrated size or a map disagrees with its mask.
DatasetSample read_sample(const fs::path& dir);

/// Reads a whole file; throws MissingFile or IoFailure.
std::string read_text(const fs::path& path);
/// Writes bytes exactly; throws IoFailure.
void write_text(const fs::path& path, const std::string& text);

}  // namespace parallax::io
