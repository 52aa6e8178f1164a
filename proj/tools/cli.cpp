#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "parallax/dataio.hpp"
#include "parallax/energy.hpp"
#include "parallax/geometry.hpp"
#include "parallax/imaging.hpp"
#include "parallax/metrics.hpp"
#include "parallax/plane_fit.hpp"
#include "parallax/solver.hpp"
#include "parallax/synth.hpp"

namespace parallax::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Size {
  int width = 320;
  int height = 192;
};

Size parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  Size out;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t a = 0, b = 0;
    out.width = std::stoi(s.substr(0, x), &a);
    out.height = std::stoi(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw UsageError("--size expects WxH, got '" + s + "'");
  }
  if (out.width < 8 || out.height < 8) throw UsageError("--size must be at least 8x8");
  return out;
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t n = 0;
      v.push_back(std::stod(item, &n));
      if (n != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects a comma-separated list of numbers");
    }
  }
  return v;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

PlaneParams read_plane(const fs::path& path) {
  const json j = json::parse(io::read_text(path), nullptr, false);
  if (j.is_discarded() || !j.contains("N") || !j.contains("h_c")) {
    fail(ErrorCode::MalformedHeader, path.string() + ": expected {\"N\": [..], \"h_c\": ..}");
  }
  const auto n = j.at("N").get<std::vector<double>>();
  if (n.size() != 3) fail(ErrorCode::MalformedHeader, path.string() + ": N needs 3 numbers");
  PlaneParams p{Vec3(n[0], n[1], n[2]), j.at("h_c").get<double>()};
  validate(p);
  return p;
}

// Blue (low) to red (high) over the valid range.
Image colorize(const Grid<double>& values, const Mask& valid) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!valid.data()[i]) continue;
    lo = std::min(lo, values.data()[i]);
    hi = std::max(hi, values.data()[i]);
  }
  Image img(values.width(), values.height(), 3);
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) {
      if (!valid(x, y)) continue;
      const double t = hi > lo ? (values(x, y) - lo) / (hi - lo) : 0.5;
      img.at(x, y, 0) = static_cast<float>(t);
      img.at(x, y, 1) = static_cast<float>(1.0 - std::abs(2.0 * t - 1.0));
      img.at(x, y, 2) = static_cast<float>(1.0 - t);
    }
  }
  return img;
}

void add_noise(FlowField& flow, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.valid(x, y)) continue;
      const double dx = n(rng);
      const double dy = n(rng);
      flow(x, y) += Vec2(dx, dy);
    }
  }
}

struct Options {
  // shared
  std::uint64_t seed = 0;
  std::string out;
  std::string sample;
  // gen
  std::string scene;
  std::string preset = "standard";
  std::string size;
  // fit-plane
  std::string points;
  std::string reference;
  int ransac_iters = RansacConfig{}.iterations;
  double ransac_thresh = RansacConfig{}.inlier_threshold;
  // warp / solve
  std::string plane;
  std::string flow = "bm";
  double flow_noise = 0.0;
  BlockMatchConfig bm;
  std::string source, target, calib, pair;
  // recon / energy
  std::string gamma;
  // eval
  std::string pred;
  std::string gt;
  std::string buckets_h = "0.1,0.3,0.5,1.0";
  std::string buckets_d = "30,50,80";
  // energy weights
  EnergyWeights w;
};

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  void operator()(const std::string& msg) const { err_ << "parallax: " << msg << "\n"; }

 private:
  std::ostream& err_;
};

json cmd_gen(const Options& o, const Log& log) {
  synth::SceneSpec scene;
  if (!o.scene.empty()) {
    scene = io::read_scene(o.scene);
    if (!o.size.empty()) {
      throw UsageError("--size applies to presets; a scene file carries its own camera");
    }
  } else {
    const Size sz = o.size.empty() ? Size{} : parse_size(o.size);
    if (o.preset == "standard") {
      scene = synth::standard_scene(sz.width, sz.height, o.seed);
    } else if (o.preset == "plane_only") {
      scene = synth::plane_only_scene(sz.width, sz.height, o.seed);
    } else {
      throw UsageError("--preset must be standard or plane_only");
    }
  }
  log("rendering " + std::to_string(scene.K.width) + "x" + std::to_string(scene.K.height) +
      " scene '" + scene.label + "'");
  const io::DatasetSample s = io::make_sample(scene);
  io::write_sample(o.out, s);
  std::size_t road = 0;
  for (auto b : s.road.data()) road += b != 0;
  return {{"width", s.K.width},
          {"height", s.K.height},
          {"label", s.label},
          {"seed", s.seed},
          {"boxes", scene.boxes.size()},
          {"valid_depth", s.depth.valid_count()},
          {"valid_flow", s.u_res.valid_count()},
          {"road_pixels", road},
          {"points", s.cloud.size()}};
}

json cmd_fit_plane(const Options& o, const Log& log) {
  const PointCloud cloud = io::read_point_cloud(o.points);
  log("fitting a plane to " + std::to_string(cloud.size()) + " points");
  RansacConfig cfg;
  cfg.iterations = o.ransac_iters;
  cfg.inlier_threshold = o.ransac_thresh;
  cfg.seed = o.seed;
  const PlaneFit fit = ransac_plane(cloud, cfg);
  json j = {{"N", vec_json(fit.plane.N)},
            {"h_c", fit.plane.h_c},
            {"points", cloud.size()},
            {"inliers", fit.inlier_count},
            {"inlier_rms", fit.inlier_rms}};
  if (!o.reference.empty()) {
    const io::PairInfo ref = io::read_pair(o.reference);
    j["reference"] = {{"angle_deg", normal_angle_deg(fit.plane.N, ref.plane.N)},
                      {"h_c_error", std::abs(fit.plane.h_c - ref.plane.h_c)}};
  }
  if (!o.out.empty()) {
    io::write_text(o.out, j.dump(2) + "\n");
  }
  return j;
}

// Inputs shared by warp, solve and energy.
struct PairInputs {
  CameraIntrinsics K;
  io::PairInfo pair;
  Image source;
  Image target;
  std::optional<io::DatasetSample> sample;
};

PairInputs load_pair_inputs(const Options& o) {
  PairInputs in;
  if (!o.sample.empty()) {
    io::DatasetSample s = io::read_sample(o.sample);
    in.K = s.K;
    in.pair = {s.motion, s.plane, s.H, s.seed, s.label};
    in.source = s.source;
    in.target = s.target;
    in.sample = std::move(s);
  } else {
    if (o.source.empty() || o.target.empty() || o.calib.empty() || o.pair.empty()) {
      throw UsageError("give --sample DIR or all of --source, --target, --calib, --pair");
    }
    in.K = io::read_calib(o.calib);
    in.pair = io::read_pair(o.pair);
    in.source = io::read_image(o.source);
    in.target = io::read_image(o.target);
    if (in.source.width() != in.K.width || in.source.height() != in.K.height ||
        !in.source.same_shape(in.target)) {
      fail(ErrorCode::IncongruentGrids, "images do not match the calibration");
    }
  }
  if (!o.plane.empty()) in.pair.plane = read_plane(o.plane);
  return in;
}

json cmd_warp(const Options& o, const Log& log) {
  validate(o.w);
  const PairInputs in = load_pair_inputs(o);
  const Homography H = homography_from_motion(in.K, in.pair.motion, in.pair.plane);
  log("warping source by the road homography");
  const WarpResult w = warp_by_homography(in.source, H);
  json j = {{"valid_pixels", std::count(w.valid.data().begin(), w.valid.data().end(), 1)},
            {"photometric", photometric_energy(in.target, w.image, w.valid, o.w.alpha)},
            {"mean_abs_diff", masked_mean_abs_diff(in.target, w.image, w.valid)}};
  if (in.sample) {
    const Mask road = mask_and(w.valid, in.sample->road);
    j["road_mean_abs_diff"] = masked_mean_abs_diff(in.target, w.image, road);
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    io::write_image(fs::path(o.out) / "warped.ppm", w.image);
    io::write_mask(fs::path(o.out) / "warped_mask.pgm", w.valid);
  }
  return j;
}

json cmd_solve(const Options& o, const Log& log) {
  const PairInputs in = load_pair_inputs(o);
  const RigidMotion& motion = in.pair.motion;
  const PlaneParams& plane = in.pair.plane;
  FlowField flow;
  std::string flow_source = o.flow;
  if (o.flow == "gt") {
    if (!in.sample) throw UsageError("--flow gt needs --sample");
    flow = in.sample->u_res;
  } else if (o.flow == "bm") {
    const Homography H = homography_from_motion(in.K, motion, plane);
    const WarpResult w = warp_by_homography(in.source, H);
    log("block matching (patch " + std::to_string(o.bm.patch) + ", radius " +
        std::to_string(o.bm.radius) + ")");
    flow = block_match_flow(w.image, in.target, o.bm, &w.valid);
  } else if (o.flow.rfind("file:", 0) == 0) {
    flow_source = "file";
    flow = io::read_flow(o.flow.substr(5));
    if (flow.width() != in.K.width || flow.height() != in.K.height) {
      fail(ErrorCode::IncongruentGrids, "flow file does not match the calibration");
    }
  } else {
    throw UsageError("--flow must be bm, gt or file:<path>");
  }
  add_noise(flow, o.flow_noise, o.seed);

  const SolverReport r = solve_gamma_map(flow, motion, plane, in.K);
  const DepthMap depth = depth_from_gamma(r.gamma, transform_plane(plane, motion), in.K);
  const HeightMap height = height_from_gamma(r.gamma, depth);
  log("solved " + std::to_string(r.solved) + " of " + std::to_string(r.valid_input) +
      " flow cells");

  const fs::path dir(o.out);
  fs::create_directories(dir);
  io::write_flow(dir / "flow.pfm", flow);
  io::write_float_map(dir / "gamma.pfm", r.gamma);
  io::write_float_map(dir / "depth.pfm", depth);
  io::write_float_map(dir / "height.pfm", height);
  const json j = {{"flow", flow_source},
                  {"flow_noise", o.flow_noise},
                  {"valid_input", r.valid_input},
                  {"solved", r.solved},
                  {"degenerate_epipole", r.degenerate_epipole},
                  {"singular", r.singular},
                  {"valid_depth", depth.valid_count()}};
  io::write_text(dir / "solver.json", j.dump(2) + "\n");
  return j;
}

json cmd_recon(const Options& o, const Log& log) {
  fs::path gamma_path = o.gamma;
  CameraIntrinsics K;
  io::PairInfo pair;
  if (!o.sample.empty()) {
    const fs::path s(o.sample);
    K = io::read_calib(s / "calib.json");
    pair = io::read_pair(s / "pair.json");
    if (gamma_path.empty()) gamma_path = s / "gt_gamma.pfm";
  } else {
    if (o.calib.empty() || o.pair.empty() || gamma_path.empty()) {
      throw UsageError("give --sample DIR or all of --gamma, --calib, --pair");
    }
    K = io::read_calib(o.calib);
    pair = io::read_pair(o.pair);
  }
  if (!o.plane.empty()) pair.plane = read_plane(o.plane);
  const GammaMap gamma = io::read_map<GammaMap>(gamma_path);
  if (gamma.width() != K.width || gamma.height() != K.height) {
    fail(ErrorCode::IncongruentGrids, "gamma map does not match the calibration");
  }
  log("recovering depth and height from " + gamma_path.string());
  const DepthMap depth = depth_from_gamma(gamma, transform_plane(pair.plane, pair.motion), K);
  const HeightMap height = height_from_gamma(gamma, depth);

  PointCloud cloud;
  double max_abs_height = 0.0;
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      if (!depth.valid(x, y)) continue;
      cloud.points.push_back(backproject(K, Vec2(x, y), depth(x, y)));
      if (height.valid(x, y)) max_abs_height = std::max(max_abs_height, std::abs(height(x, y)));
    }
  }
  const fs::path dir(o.out);
  fs::create_directories(dir);
  io::write_float_map(dir / "depth.pfm", depth);
  io::write_float_map(dir / "height.pfm", height);
  io::write_point_cloud(dir / "points.ply", cloud);
  io::write_image(dir / "gamma.ppm", colorize(gamma.values(), gamma.mask()));
  io::write_image(dir / "depth.ppm", colorize(depth.values(), depth.mask()));
  io::write_image(dir / "height.ppm", colorize(height.values(), height.mask()));
  return {{"valid_gamma", gamma.valid_count()},
          {"valid_depth", depth.valid_count()},
          {"valid_height", height.valid_count()},
          {"points", cloud.size()},
          {"max_abs_height", max_abs_height}};
}

json cmd_eval(const Options& o, const Log& log) {
  BucketSpec b;
  b.height = parse_list(o.buckets_h, "--buckets-h");
  b.depth = parse_list(o.buckets_d, "--buckets-d");
  try {
    validate(b);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const fs::path gt_dir(o.gt);
  const fs::path pred_dir(o.pred);
  MapBundle gt{io::read_map<GammaMap>(gt_dir / "gt_gamma.pfm"),
               io::read_map<DepthMap>(gt_dir / "gt_depth.pfm"),
               io::read_map<HeightMap>(gt_dir / "gt_height.pfm")};
  MapBundle pred{io::read_map<GammaMap>(pred_dir / "gamma.pfm"),
                 io::read_map<DepthMap>(pred_dir / "depth.pfm"),
                 io::read_map<HeightMap>(pred_dir / "height.pfm")};
  for (const auto* m : {&gt.gamma.mask(), &gt.height.mask(), &pred.gamma.mask(),
                        &pred.depth.mask(), &pred.height.mask()}) {
    if (m->width() != gt.depth.width() || m->height() != gt.depth.height()) {
      fail(ErrorCode::IncongruentGrids, "prediction and ground truth grids differ");
    }
  }
  std::string label;
  if (fs::exists(gt_dir / "pair.json")) label = io::read_pair(gt_dir / "pair.json").label;
  log("evaluating " + pred_dir.string() + " against " + gt_dir.string());
  const MetricReport r = evaluate_pair(pred, gt, b, label);
  const std::string report = to_json(r);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    io::write_text(dir / "metrics.json", report);
    io::write_text(dir / "metrics.csv", to_csv(r));
  }
  return json::parse(report);
}

json cmd_energy(const Options& o, const Log& log) {
  validate(o.w);
  const PairInputs in = load_pair_inputs(o);
  if (!in.sample) throw UsageError("energy needs --sample");
  const GammaMap gamma = o.gamma.empty() ? in.sample->gamma : io::read_map<GammaMap>(o.gamma);
  if (gamma.width() != in.K.width || gamma.height() != in.K.height) {
    fail(ErrorCode::IncongruentGrids, "gamma map does not match the calibration");
  }
  const PlaneParams& plane = in.pair.plane;
  const Homography H = homography_from_motion(in.K, in.pair.motion, plane);
  const WarpResult w = warp_by_homography(in.source, H);
  const FlowField u = residual_flow_map(gamma, in.pair.motion, plane, in.K);
  const WarpResult recon = reconstruct_target(w.image, u, &w.valid);
  log("evaluating energies on " + std::to_string(recon.valid.size()) + " cells");

  EnergyParts parts;
  parts.sparse = sparse_gamma_energy(gamma, in.sample->gamma);
  parts.photometric = photometric_energy(in.target, recon.image, recon.valid, o.w.alpha);
  parts.smoothness = smoothness_energy(u, in.target, o.w.beta);
  return {{"E_s", parts.sparse},
          {"E_p", parts.photometric},
          {"E_sm", parts.smoothness},
          {"E_total", total_energy(parts, o.w)},
          {"E_p_homography_only", photometric_energy(in.target, w.image, w.valid, o.w.alpha)},
          {"weights",
           {{"lambda_s", o.w.lambda_s},
            {"lambda_p", o.w.lambda_p},
            {"lambda_sm", o.w.lambda_sm},
            {"alpha", o.w.alpha},
            {"beta", o.w.beta}}}};
}

void add_weights(CLI::App* c, Options& o) {
  c->add_option("--alpha", o.w.alpha, "SSIM share of the photometric term")->capture_default_str();
  c->add_option("--beta", o.w.beta, "edge weight of the smoothness term")->capture_default_str();
  c->add_option("--lambda-s", o.w.lambda_s, "weight of the sparse gamma term")->capture_default_str();
  c->add_option("--lambda-p", o.w.lambda_p, "weight of the photometric term")->capture_default_str();
  c->add_option("--lambda-sm", o.w.lambda_sm, "weight of the smoothness term")->capture_default_str();
}

void add_pair_inputs(CLI::App* c, Options& o) {
  c->add_option("--sample", o.sample, "dataset directory")->check(CLI::ExistingDirectory);
  c->add_option("--source", o.source, "source image (PPM/PGM)")->check(CLI::ExistingFile);
  c->add_option("--target", o.target, "target image (PPM/PGM)")->check(CLI::ExistingFile);
  c->add_option("--calib", o.calib, "calib.json")->check(CLI::ExistingFile);
  c->add_option("--pair", o.pair, "pair.json")->check(CLI::ExistingFile);
  c->add_option("--plane", o.plane, "plane JSON (source frame) overriding pair.json")
      ->check(CLI::ExistingFile);
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Planar-parallax geometry toolkit", "parallax"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();

  auto* gen = app.add_subcommand("gen", "render a synthetic scene into a dataset directory");
  gen->add_option("--scene", o.scene, "scene JSON")->check(CLI::ExistingFile);
  gen->add_option("--preset", o.preset, "standard or plane_only")->capture_default_str();
  gen->add_option("--size", o.size, "image size WxH for presets (default 320x192)");
  gen->add_option("--out", o.out, "output directory")->required();

  auto* fit = app.add_subcommand("fit-plane", "RANSAC plane fit of a PLY point cloud");
  fit->add_option("points", o.points, "input PLY")->required()->check(CLI::ExistingFile);
  fit->add_option("--ransac-iters", o.ransac_iters)->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--ransac-thresh", o.ransac_thresh, "inlier distance (m)")
      ->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_option("--reference", o.reference, "pair.json to compare against")
      ->check(CLI::ExistingFile);
  fit->add_option("--out", o.out, "plane JSON output");

  auto* warp = app.add_subcommand("warp", "align the source to the target by the road homography");
  add_pair_inputs(warp, o);
  add_weights(warp, o);
  warp->add_option("--out", o.out, "directory for warped.ppm and warped_mask.pgm");

  auto* solve = app.add_subcommand("solve", "recover gamma, depth and height from residual flow");
  add_pair_inputs(solve, o);
  solve->add_option("--flow", o.flow, "bm, gt or file:<path>")->capture_default_str();
  solve->add_option("--flow-noise", o.flow_noise, "Gaussian flow noise sigma (px)")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  solve->add_option("--patch", o.bm.patch, "block-match patch size")->capture_default_str();
  solve->add_option("--radius", o.bm.radius, "block-match search radius")->capture_default_str();
  solve->add_option("--contrast", o.bm.contrast_threshold, "block-match contrast threshold")
      ->capture_default_str();
  solve->add_option("--out", o.out, "output directory")->required();

  auto* recon = app.add_subcommand("recon", "depth, height and point cloud from a gamma map");
  recon->add_option("--sample", o.sample, "dataset directory")->check(CLI::ExistingDirectory);
  recon->add_option("--gamma", o.gamma, "gamma PFM")->check(CLI::ExistingFile);
  recon->add_option("--calib", o.calib, "calib.json")->check(CLI::ExistingFile);
  recon->add_option("--pair", o.pair, "pair.json")->check(CLI::ExistingFile);
  recon->add_option("--plane", o.plane, "plane JSON (source frame)")->check(CLI::ExistingFile);
  recon->add_option("--out", o.out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "bucketed MAE and depth metrics");
  eval->add_option("--pred", o.pred, "directory with gamma.pfm, depth.pfm, height.pfm")
      ->required()->check(CLI::ExistingDirectory);
  eval->add_option("--gt", o.gt, "dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--buckets-h", o.buckets_h, "height thresholds (m)")->capture_default_str();
  eval->add_option("--buckets-d", o.buckets_d, "depth thresholds (m)")->capture_default_str();
  eval->add_option("--out", o.out, "directory for metrics.json and metrics.csv");

  auto* energy = app.add_subcommand("energy", "sparse, photometric and smoothness energies");
  add_pair_inputs(energy, o);
  energy->add_option("--gamma", o.gamma, "gamma PFM (default: ground truth)")
      ->check(CLI::ExistingFile);
  add_weights(energy, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const Log log(err);
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    json result;
    if (name == "gen") result = cmd_gen(o, log);
    if (name == "fit-plane") result = cmd_fit_plane(o, log);
    if (name == "warp") result = cmd_warp(o, log);
    if (name == "solve") result = cmd_solve(o, log);
    if (name == "recon") result = cmd_recon(o, log);
    if (name == "eval") result = cmd_eval(o, log);
    if (name == "energy") result = cmd_energy(o, log);
    out << json{{"command", name}, {"result", result}}.dump(2) << "\n";
    return 0;
  } catch (const UsageError& e) {
    err << "parallax " << name << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    out << json{{"command", name},
                {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}}
               .dump(2)
        << "\n";
    err << "parallax " << name << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    out << json{{"command", name}, {"error", {{"code", "IoFailure"}, {"message", e.what()}}}}
               .dump(2)
        << "\n";
    err << "parallax " << name << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace parallax::cli
