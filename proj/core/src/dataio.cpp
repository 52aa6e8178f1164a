#include "parallax/dataio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace parallax::io {

using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    fail(ErrorCode::MissingFile, "missing file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::IoFailure, "write failed: " + path.string());
}

namespace {

// Minimal tokenizer for the ascii headers of PFM/PNM files. '#' starts a
// comment that runs to the end of the line.
class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, const fs::path& path) : s_(bytes), path_(path) {}

  std::string token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_])) ++pos_;
    if (start == pos_) bad("unexpected end of header");
    return s_.substr(start, pos_ - start);
  }

  long long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) bad("expected an integer, got '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) bad("expected a number, got '" + t + "'");
    return v;
  }

  // The single whitespace byte separating the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= s_.size() || !is_space(s_[pos_])) bad("header not terminated");
    return pos_ + 1;
  }

  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorCode::MalformedHeader, path_.string() + ": " + what);
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }
  void skip_space() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (is_space(s_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& s_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

std::uint32_t load_u32(const char* p, bool little) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const auto b = static_cast<std::uint32_t>(static_cast<unsigned char>(p[i]));
    v |= little ? b << (8 * i) : b << (8 * (3 - i));
  }
  return v;
}

void store_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct Pfm {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;  // top-to-bottom, interleaved
};

Pfm read_pfm(const fs::path& path) {
  const std::string bytes = read_text(path);
  HeaderReader h(bytes, path);
  const std::string magic = h.token();
  Pfm p;
  if (magic == "Pf") {
    p.channels = 1;
  } else if (magic == "PF") {
    p.channels = 3;
  } else {
    h.bad("not a PFM file");
  }
  const long long w = h.integer();
  const long long hh = h.integer();
  if (w < 0 || hh < 0 || w > (1 << 20) || hh > (1 << 20)) h.bad("bad dimensions");
  const double scale = h.real();
  if (scale == 0.0) h.bad("zero scale");
  const bool little = scale < 0.0;
  const std::size_t off = h.payload_offset();
  p.width = static_cast<int>(w);
  p.height = static_cast<int>(hh);
  const std::size_t n = static_cast<std::size_t>(w) * hh * p.channels;
  if (bytes.size() - off != n * 4) h.bad("payload size does not match the header");
  p.data.resize(n);
  const std::size_t row = static_cast<std::size_t>(w) * p.channels;
  for (int y = 0; y < p.height; ++y) {
    const char* src = bytes.data() + off + static_cast<std::size_t>(p.height - 1 - y) * row * 4;
    for (std::size_t i = 0; i < row; ++i) {
      p.data[static_cast<std::size_t>(y) * row + i] =
          std::bit_cast<float>(load_u32(src + 4 * i, little));
    }
  }
  return p;
}

void write_pfm(const fs::path& path, const Pfm& p) {
  std::string out = (p.channels == 1 ? "Pf\n" : "PF\n") + std::to_string(p.width) + " " +
                    std::to_string(p.height) + "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(p.width) * p.channels;
  out.reserve(out.size() + p.data.size() * 4);
  for (int y = p.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      store_u32_le(out, std::bit_cast<std::uint32_t>(p.data[static_cast<std::size_t>(y) * row + i]));
    }
  }
  write_text(path, out);
}

constexpr float kInvalid = std::numeric_limits<float>::quiet_NaN();

}  // namespace

void write_float_map(const fs::path& path, const Grid<double>& values, const Mask& valid) {
  require_same_shape(values, valid, "write_float_map");
  Pfm p{values.width(), values.height(), 1, {}};
  p.data.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    p.data[i] = valid.data()[i] ? static_cast<float>(values.data()[i]) : kInvalid;
  }
  write_pfm(path, p);
}

FloatMapData read_float_map(const fs::path& path) {
  Pfm p = read_pfm(path);
  if (p.channels != 1) {
    fail(ErrorCode::SizeMismatch, path.string() + ": expected a 1-channel map");
  }
  FloatMapData d{Grid<double>(p.width, p.height, 0.0), Mask(p.width, p.height, 0)};
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    if (std::isfinite(p.data[i])) {
      d.values.data()[i] = p.data[i];
      d.valid.data()[i] = 1;
    }
  }
  return d;
}

void write_flow(const fs::path& path, const FlowField& flow) {
  Pfm p{flow.width(), flow.height(), 3, {}};
  p.data.reserve(flow.size() * 3);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const bool v = flow.valid(x, y);
      p.data.push_back(v ? static_cast<float>(flow(x, y).x()) : kInvalid);
      p.data.push_back(v ? static_cast<float>(flow(x, y).y()) : kInvalid);
      p.data.push_back(0.0f);
    }
  }
  write_pfm(path, p);
}

FlowField read_flow(const fs::path& path) {
  Pfm p = read_pfm(path);
  if (p.channels != 3) {
    fail(ErrorCode::SizeMismatch, path.string() + ": expected a 3-channel flow map");
  }
  FlowField f(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * p.width + x) * 3;
      if (std::isfinite(p.data[i]) && std::isfinite(p.data[i + 1])) {
        f.set(x, y, Vec2(p.data[i], p.data[i + 1]));
      }
    }
  }
  return f;
}

namespace {

unsigned char quantize(float v) {
  const double q = std::round(static_cast<double>(v) * 255.0);
  return static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
}

}  // namespace

void write_image(const fs::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    fail(ErrorCode::InvalidArgument, "write_image: 1 or 3 channels required");
  }
  std::string out = (image.channels() == 3 ? "P6\n" : "P5\n") + std::to_string(image.width()) +
                    " " + std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.data().size());
  for (float v : image.data()) out.push_back(static_cast<char>(quantize(v)));
  write_text(path, out);
}

Image read_image(const fs::path& path) {
  const std::string bytes = read_text(path);
  HeaderReader h(bytes, path);
  const std::string magic = h.token();
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    h.bad("only binary PPM (P6) and PGM (P5) are supported, got '" + magic + "'");
  }
  const long long w = h.integer();
  const long long hh = h.integer();
  if (w <= 0 || hh <= 0 || w > (1 << 20) || hh > (1 << 20)) h.bad("bad dimensions");
  if (h.integer() != 255) h.bad("maxval must be 255");
  const std::size_t off = h.payload_offset();
  const std::size_t n = static_cast<std::size_t>(w) * hh * channels;
  if (bytes.size() - off != n) h.bad("payload size does not match the header");
  Image img(static_cast<int>(w), static_cast<int>(hh), channels);
  for (std::size_t i = 0; i < n; ++i) {
    img.data()[i] = static_cast<float>(static_cast<unsigned char>(bytes[off + i])) / 255.0f;
  }
  return img;
}

void write_mask(const fs::path& path, const Mask& mask) {
  Image img(mask.width(), mask.height(), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) img.data()[i] = mask.data()[i] ? 1.0f : 0.0f;
  write_image(path, img);
}

Mask read_mask(const fs::path& path) {
  const Image img = read_image(path);
  if (img.channels() != 1) fail(ErrorCode::MalformedHeader, path.string() + ": mask must be PGM");
  Mask m(img.width(), img.height(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = img.data()[i] > 0.0f ? 1 : 0;
  return m;
}

void write_point_cloud(const fs::path& path, const PointCloud& cloud) {
  if (cloud.has_labels() && cloud.labels.size() != cloud.points.size()) {
    fail(ErrorCode::InvalidArgument, "write_point_cloud: label count differs from point count");
  }
  std::string out = "ply\nformat ascii 1.0\nelement vertex " +
                    std::to_string(cloud.points.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.has_labels()) out += "property uchar road\n";
  out += "end_header\n";
  char buf[96];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g", p.x(), p.y(), p.z());
    out += buf;
    if (cloud.has_labels()) out += cloud.labels[i] ? " 1" : " 0";
    out += '\n';
  }
  write_text(path, out);
}

PointCloud read_point_cloud(const fs::path& path) {
  std::istringstream in(read_text(path));
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::MalformedHeader, path.string() + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "ply") bad("not a PLY file");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
  };
  std::vector<Element> elements;
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") bad("only ascii PLY is supported");
    } else if (kw == "element") {
      Element e;
      ls >> e.name >> e.count;
      if (!ls) bad("bad element line");
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) bad("property before element");
      std::string type, name;
      ls >> type;
      if (type == "list") {
        std::string a, b;
        ls >> a >> b;
      }
      ls >> name;
      elements.back().props.push_back(name);
    } else if (kw == "end_header") {
      ended = true;
      break;
    } else if (kw != "comment" && kw != "obj_info" && !kw.empty()) {
      bad("unknown header keyword '" + kw + "'");
    }
  }
  if (!ended) bad("missing end_header");

  PointCloud cloud;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) bad("truncated element data");
      }
      continue;
    }
    int ix = -1, iy = -1, iz = -1, ir = -1;
    for (std::size_t k = 0; k < e.props.size(); ++k) {
      const auto& n = e.props[k];
      if (n == "x") ix = static_cast<int>(k);
      if (n == "y") iy = static_cast<int>(k);
      if (n == "z") iz = static_cast<int>(k);
      if (n == "road") ir = static_cast<int>(k);
    }
    if (ix < 0 || iy < 0 || iz < 0) bad("vertex element lacks x, y or z");
    cloud.points.reserve(e.count);
    std::vector<double> vals(e.props.size());
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) bad("truncated vertex data");
      std::istringstream ls(line);
      for (auto& v : vals) {
        if (!(ls >> v)) bad("bad vertex line");
      }
      cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
      if (ir >= 0) cloud.labels.push_back(vals[ir] != 0.0 ? 1 : 0);
    }
  }
  return cloud;
}

void write_raw_tensor(const fs::path& path, const RawTensor& t) {
  std::size_t n = 1;
  std::string out = "RAWT\n" + std::to_string(t.shape.size());
  for (int d : t.shape) {
    if (d < 0) fail(ErrorCode::ShapeMismatch, "raw tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
    out += " " + std::to_string(d);
  }
  if (n != t.data.size()) fail(ErrorCode::ShapeMismatch, "raw tensor: data size differs from shape");
  out += "\n";
  for (float v : t.data) store_u32_le(out, std::bit_cast<std::uint32_t>(v));
  write_text(path, out);
}

RawTensor read_raw_tensor(const fs::path& path) {
  const std::string bytes = read_text(path);
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::MalformedHeader, path.string() + ": " + what);
  };
  if (bytes.compare(0, 5, "RAWT\n") != 0) bad("not a raw tensor file");
  const std::size_t eol = bytes.find('\n', 5);
  if (eol == std::string::npos) bad("missing shape line");
  std::istringstream ls(bytes.substr(5, eol - 5));
  int ndim = 0;
  if (!(ls >> ndim) || ndim < 0 || ndim > 8) bad("bad rank");
  RawTensor t;
  std::size_t n = 1;
  for (int i = 0; i < ndim; ++i) {
    int d = 0;
    if (!(ls >> d) || d < 0) bad("bad dimension");
    t.shape.push_back(d);
    n *= static_cast<std::size_t>(d);
  }
  const std::size_t off = eol + 1;
  if (bytes.size() - off != n * 4) bad("payload size does not match the shape");
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.data[i] = std::bit_cast<float>(load_u32(bytes.data() + off + 4 * i, true));
  }
  return t;
}

namespace {

RawTensor from_matrix(const Eigen::MatrixXf& m) {
  RawTensor t{{static_cast<int>(m.rows()), static_cast<int>(m.cols())}, {}};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
  }
  return t;
}

Eigen::MatrixXf to_matrix(const RawTensor& t, const std::string& what) {
  if (t.shape.size() != 2) fail(ErrorCode::ShapeMismatch, what + ": expected a 2-d tensor");
  Eigen::MatrixXf m(t.shape[0], t.shape[1]);
  std::size_t i = 0;
  for (int r = 0; r < t.shape[0]; ++r) {
    for (int c = 0; c < t.shape[1]; ++c) m(r, c) = t.data[i++];
  }
  return m;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, where + ": " + e.what());
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::MalformedHeader, where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, where + ": field '" + key + "': " + e.what());
  }
}

Vec3 vec3(const json& j, const char* key, const std::string& where) {
  const auto v = get<std::vector<double>>(j, key, where);
  if (v.size() != 3) fail(ErrorCode::MalformedHeader, where + ": '" + key + "' needs 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

Mat3 mat3(const json& j, const char* key, const std::string& where) {
  const auto v = get<std::vector<double>>(j, key, where);
  if (v.size() != 9) fail(ErrorCode::MalformedHeader, where + ": '" + key + "' needs 9 numbers");
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[i];
  return m;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 9; ++i) a.push_back(m(i / 3, i % 3));
  return a;
}

json calib_json(const CameraIntrinsics& K) {
  return {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy},
          {"width", K.width}, {"height", K.height}};
}

CameraIntrinsics calib_from(const json& j, const std::string& where) {
  CameraIntrinsics K;
  K.fx = get<double>(j, "fx", where);
  K.fy = get<double>(j, "fy", where);
  K.cx = get<double>(j, "cx", where);
  K.cy = get<double>(j, "cy", where);
  K.width = get<int>(j, "width", where);
  K.height = get<int>(j, "height", where);
  validate(K);
  return K;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void write_attention_params(const fs::path& dir, const AttentionParams& p) {
  validate(p);
  fs::create_directories(dir);
  write_raw_tensor(dir / "w_q.rawt", from_matrix(p.w_query));
  write_raw_tensor(dir / "w_k.rawt", from_matrix(p.w_key));
  write_raw_tensor(dir / "w_v.rawt", from_matrix(p.w_value));
  write_raw_tensor(dir / "rel.rawt",
                   {{p.field, p.field, p.out_channels()}, p.relative});
  write_text(dir / "attention.json", dump({{"field", p.field}, {"dilation", p.dilation}}));
}

AttentionParams read_attention_params(const fs::path& dir) {
  AttentionParams p;
  p.w_query = to_matrix(read_raw_tensor(dir / "w_q.rawt"), "w_q");
  p.w_key = to_matrix(read_raw_tensor(dir / "w_k.rawt"), "w_k");
  p.w_value = to_matrix(read_raw_tensor(dir / "w_v.rawt"), "w_v");
  const RawTensor rel = read_raw_tensor(dir / "rel.rawt");
  const std::string where = (dir / "attention.json").string();
  const json j = parse_json(read_text(dir / "attention.json"), where);
  p.field = get<int>(j, "field", where);
  p.dilation = get<int>(j, "dilation", where);
  if (rel.shape.size() != 3 || rel.shape[0] != p.field || rel.shape[1] != p.field ||
      rel.shape[2] != p.out_channels()) {
    fail(ErrorCode::ShapeMismatch, "rel: expected shape field x field x C'");
  }
  p.relative = rel.data;
  validate(p);
  return p;
}

void write_scene(const fs::path& path, const synth::SceneSpec& s) {
  json boxes = json::array();
  for (const auto& b : s.boxes) {
    boxes.push_back({{"center", to_json(b.center)}, {"size", to_json(b.size)},
                     {"texture", b.texture}});
  }
  const json j = {{"camera", calib_json(s.K)},
                  {"plane", {{"N", to_json(s.plane.N)}, {"h_c", s.plane.h_c}}},
                  {"motion", {{"R", to_json(s.motion.R)}, {"T", to_json(s.motion.T)}}},
                  {"boxes", boxes},
                  {"plane_texture", s.plane_texture},
                  {"seed", s.seed},
                  {"label", s.label}};
  write_text(path, dump(j));
}

synth::SceneSpec parse_scene(const std::string& text) {
  const std::string where = "scene";
  const json j = parse_json(text, where);
  if (!j.is_object()) fail(ErrorCode::MalformedHeader, "scene: expected an object");
  synth::SceneSpec s;
  if (j.contains("preset")) {
    const auto preset = get<std::string>(j, "preset", where);
    const int w = j.value("width", 320);
    const int h = j.value("height", 192);
    const auto seed = j.value("seed", std::uint64_t{0});
    if (preset == "standard") {
      s = synth::standard_scene(w, h, seed);
    } else if (preset == "plane_only") {
      s = synth::plane_only_scene(w, h, seed);
    } else {
      fail(ErrorCode::InvalidArgument, "scene: unknown preset '" + preset + "'");
    }
    if (j.contains("label")) s.label = get<std::string>(j, "label", where);
    synth::validate(s);
    return s;
  }
  s.K = calib_from(get<json>(j, "camera", where), where + ".camera");
  const json plane = get<json>(j, "plane", where);
  s.plane.N = vec3(plane, "N", where + ".plane");
  s.plane.h_c = get<double>(plane, "h_c", where + ".plane");
  const json motion = get<json>(j, "motion", where);
  if (motion.contains("R")) {
    s.motion.R = mat3(motion, "R", where + ".motion");
    s.motion.T = vec3(motion, "T", where + ".motion");
  } else {
    s.motion = RigidMotion::from_euler_deg(get<double>(motion, "roll_deg", where + ".motion"),
                                           get<double>(motion, "pitch_deg", where + ".motion"),
                                           get<double>(motion, "yaw_deg", where + ".motion"),
                                           vec3(motion, "T", where + ".motion"));
  }
  if (j.contains("boxes")) {
    for (const auto& b : get<json>(j, "boxes", where)) {
      s.boxes.push_back({vec3(b, "center", where + ".boxes"), vec3(b, "size", where + ".boxes"),
                         b.value("texture", 1)});
    }
  }
  s.plane_texture = j.value("plane_texture", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.label = j.value("label", std::string("synthetic"));
  synth::validate(s);
  return s;
}

synth::SceneSpec read_scene(const fs::path& path) { return parse_scene(read_text(path)); }

void write_calib(const fs::path& path, const CameraIntrinsics& K) {
  write_text(path, dump(calib_json(K)));
}

CameraIntrinsics read_calib(const fs::path& path) {
  return calib_from(parse_json(read_text(path), path.string()), path.string());
}

void write_pair(const fs::path& path, const PairInfo& p) {
  const json j = {{"R", to_json(p.motion.R)},
                  {"T", to_json(p.motion.T)},
                  {"N", to_json(p.plane.N)},
                  {"h_c", p.plane.h_c},
                  {"homography", to_json(p.H.H)},
                  {"seed", p.seed},
                  {"label", p.label}};
  write_text(path, dump(j));
}

PairInfo read_pair(const fs::path& path) {
  const std::string where = path.string();
  const json j = parse_json(read_text(path), where);
  PairInfo p;
  p.motion.R = mat3(j, "R", where);
  p.motion.T = vec3(j, "T", where);
  p.plane.N = vec3(j, "N", where);
  p.plane.h_c = get<double>(j, "h_c", where);
  p.H.H = mat3(j, "homography", where);
  p.seed = get<std::uint64_t>(j, "seed", where);
  p.label = get<std::string>(j, "label", where);
  validate(p.motion);
  validate(p.plane);
  return p;
}

DatasetSample make_sample(const synth::SceneSpec& scene) {
  synth::validate(scene);
  synth::GroundTruth gt = synth::ground_truth(scene);
  DatasetSample s;
  s.K = scene.K;
  s.motion = scene.motion;
  s.plane = scene.plane;
  s.H = gt.H;
  s.seed = scene.seed;
  s.label = scene.label;
  s.source = synth::render(scene, synth::View::Source).image;
  s.target = synth::render(scene, synth::View::Target).image;
  s.gamma = std::move(gt.gamma);
  s.depth = std::move(gt.depth);
  s.height = std::move(gt.height);
  s.u_res = std::move(gt.u_res);
  s.u_opt = std::move(gt.u_opt);
  s.road = std::move(gt.road);
  s.cloud = std::move(gt.cloud);
  return s;
}

void write_sample(const fs::path& dir, const DatasetSample& s) {
  fs::create_directories(dir);
  write_calib(dir / "calib.json", s.K);
  write_pair(dir / "pair.json", {s.motion, s.plane, s.H, s.seed, s.label});
  write_image(dir / "source.ppm", s.source);
  write_image(dir / "target.ppm", s.target);
  write_float_map(dir / "gt_gamma.pfm", s.gamma);
  write_float_map(dir / "gt_depth.pfm", s.depth);
  write_float_map(dir / "gt_height.pfm", s.height);
  write_flow(dir / "gt_flow.pfm", s.u_res);
  write_flow(dir / "gt_opt_flow.pfm", s.u_opt);
  write_mask(dir / "gt_depth_mask.pgm", s.depth.mask());
  write_mask(dir / "gt_flow_mask.pgm", s.u_res.mask());
  write_mask(dir / "road_mask.pgm", s.road);
  write_point_cloud(dir / "points.ply", s.cloud);
}

DatasetSample read_sample(const fs::path& dir) {
  static const char* const kFiles[] = {
      "calib.json",   "pair.json",     "source.ppm",      "target.ppm",
      "gt_gamma.pfm", "gt_depth.pfm",  "gt_height.pfm",   "gt_flow.pfm",
      "gt_opt_flow.pfm", "gt_depth_mask.pgm", "gt_flow_mask.pgm", "road_mask.pgm",
      "points.ply"};
  for (const char* f : kFiles) {
    std::error_code ec;
    if (!fs::is_regular_file(dir / f, ec)) {
      fail(ErrorCode::MissingFile, "sample " + dir.string() + " lacks " + f);
    }
  }
  DatasetSample s;
  s.K = read_calib(dir / "calib.json");
  const PairInfo pair = read_pair(dir / "pair.json");
  s.motion = pair.motion;
  s.plane = pair.plane;
  s.H = pair.H;
  s.seed = pair.seed;
  s.label = pair.label;

  auto congruent = [&](int w, int h, const char* what) {
    if (w != s.K.width || h != s.K.height) {
      fail(ErrorCode::IncongruentGrids,
           std::string(what) + " is " + std::to_string(w) + "x" + std::to_string(h) +
               ", calibration says " + std::to_string(s.K.width) + "x" +
               std::to_string(s.K.height));
    }
  };
  auto paired = [](const Mask& map_valid, const Mask& mask, const char* what) {
    if (map_valid != mask) {
      fail(ErrorCode::IncongruentGrids, std::string(what) + " disagrees with its mask");
    }
  };

  s.source = read_image(dir / "source.ppm");
  congruent(s.source.width(), s.source.height(), "source.ppm");
  s.target = read_image(dir / "target.ppm");
  congruent(s.target.width(), s.target.height(), "target.ppm");
  if (s.source.channels() != s.target.channels()) {
    fail(ErrorCode::IncongruentGrids, "source and target differ in channel count");
  }
  s.gamma = read_map<GammaMap>(dir / "gt_gamma.pfm");
  congruent(s.gamma.width(), s.gamma.height(), "gt_gamma.pfm");
  s.depth = read_map<DepthMap>(dir / "gt_depth.pfm");
  congruent(s.depth.width(), s.depth.height(), "gt_depth.pfm");
  s.height = read_map<HeightMap>(dir / "gt_height.pfm");
  congruent(s.height.width(), s.height.height(), "gt_height.pfm");
  s.u_res = read_flow(dir / "gt_flow.pfm");
  congruent(s.u_res.width(), s.u_res.height(), "gt_flow.pfm");
  s.u_opt = read_flow(dir / "gt_opt_flow.pfm");
  congruent(s.u_opt.width(), s.u_opt.height(), "gt_opt_flow.pfm");
  const Mask depth_mask = read_mask(dir / "gt_depth_mask.pgm");
  congruent(depth_mask.width(), depth_mask.height(), "gt_depth_mask.pgm");
  const Mask flow_mask = read_mask(dir / "gt_flow_mask.pgm");
  congruent(flow_mask.width(), flow_mask.height(), "gt_flow_mask.pgm");
  s.road = read_mask(dir / "road_mask.pgm");
  congruent(s.road.width(), s.road.height(), "road_mask.pgm");
  paired(s.depth.mask(), depth_mask, "gt_depth.pfm");
  paired(s.gamma.mask(), depth_mask, "gt_gamma.pfm");
  paired(s.height.mask(), depth_mask, "gt_height.pfm");
  paired(s.u_res.mask(), flow_mask, "gt_flow.pfm");
  paired(s.u_opt.mask(), flow_mask, "gt_opt_flow.pfm");
  s.cloud = read_point_cloud(dir / "points.ply");
  return s;
}

}  // namespace parallax::io
