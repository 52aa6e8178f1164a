#include "parallax/metrics.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace parallax {

void validate(const BucketSpec& buckets) {
  for (const auto* list : {&buckets.height, &buckets.depth}) {
    if (list->empty()) fail(ErrorCode::InvalidArgument, "bucket list is empty");
    for (std::size_t i = 0; i < list->size(); ++i) {
      const double t = (*list)[i];
      if (!std::isfinite(t) || t <= 0.0) {
        fail(ErrorCode::InvalidArgument, "bucket thresholds must be positive");
      }
      if (i > 0 && !(t > (*list)[i - 1])) {
        fail(ErrorCode::InvalidArgument, "bucket thresholds must be strictly increasing");
      }
    }
  }
}

namespace {

struct Accum {
  double sum = 0.0;
  std::size_t n = 0;
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

double mae(const Grid<double>& pred, const Mask& pred_valid, const Grid<double>& gt,
           const Mask& gt_valid, const Mask& bucket) {
  require_same_shape(pred, gt, "mae");
  require_same_shape(pred, pred_valid, "mae");
  require_same_shape(gt, gt_valid, "mae");
  require_same_shape(pred, bucket, "mae");
  Accum a;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (!pred_valid(x, y) || !gt_valid(x, y) || !bucket(x, y)) continue;
      a.sum += std::abs(pred(x, y) - gt(x, y));
      ++a.n;
    }
  }
  if (a.n == 0) fail(ErrorCode::EmptyBucket, "mae: bucket has no valid cells");
  return *a.mean();
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const Mask* region) {
  require_same_shape(pred, gt, "depth_metrics");
  if (region) require_same_shape(pred, *region, "depth_metrics");
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::size_t d1 = 0, d2 = 0, d3 = 0, n = 0;
  const double t1 = 1.25, t2 = t1 * t1, t3 = t2 * t1;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.valid(x, y) || !gt.valid(x, y) || (region && !(*region)(x, y))) continue;
      const double p = pred(x, y);
      const double g = gt(x, y);
      if (!(p > 0.0) || !(g > 0.0)) {
        fail(ErrorCode::NonPositiveDepth, "depth_metrics: depth must be positive");
      }
      const double diff = p - g;
      abs_rel += std::abs(diff) / g;
      sq_rel += diff * diff / g;
      sq += diff * diff;
      const double dl = std::log(p) - std::log(g);
      sq_log += dl * dl;
      // max(p/g, g/p) < t, without forming the ratio.
      d1 += p < t1 * g && g < t1 * p;
      d2 += p < t2 * g && g < t2 * p;
      d3 += p < t3 * g && g < t3 * p;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "depth_metrics: no jointly valid cells");
  const double N = static_cast<double>(n);
  DepthMetrics m;
  m.abs_rel = abs_rel / N;
  m.sq_rel = sq_rel / N;
  m.rmse = std::sqrt(sq / N);
  m.rmse_log = std::sqrt(sq_log / N);
  m.delta1 = static_cast<double>(d1) / N;
  m.delta2 = static_cast<double>(d2) / N;
  m.delta3 = static_cast<double>(d3) / N;
  m.count = n;
  return m;
}

MetricReport evaluate_pair(const MapBundle& pred, const MapBundle& gt,
                           const BucketSpec& buckets, const std::string& label) {
  validate(buckets);
  const auto& ref = gt.depth;
  for (const auto* m : {&pred.depth.mask(), &pred.gamma.mask(), &pred.height.mask(),
                        &gt.gamma.mask(), &gt.height.mask()}) {
    require_same_shape(ref, *m, "evaluate_pair");
  }
  const std::size_t nh = buckets.height.size();
  const std::size_t nd = buckets.depth.size();
  std::vector<Accum> hacc(nh * nd), dacc(nh * nd);
  std::vector<std::size_t> count(nh * nd, 0);
  Accum gacc;

  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      if (pred.gamma.valid(x, y) && gt.gamma.valid(x, y)) {
        gacc.sum += std::abs(pred.gamma(x, y) - gt.gamma(x, y));
        ++gacc.n;
      }
      if (!gt.depth.valid(x, y) || !gt.height.valid(x, y)) continue;
      const double gh = gt.height(x, y);
      const double gd = gt.depth(x, y);
      const bool hv = pred.height.valid(x, y);
      const bool dv = pred.depth.valid(x, y);
      const double he = hv ? std::abs(pred.height(x, y) - gh) : 0.0;
      const double de = dv ? std::abs(pred.depth(x, y) - gd) : 0.0;
      for (std::size_t i = 0; i < nh; ++i) {
        if (!(gh < buckets.height[i])) continue;
        for (std::size_t j = 0; j < nd; ++j) {
          if (!(gd < buckets.depth[j])) continue;
          const std::size_t c = i * nd + j;
          ++count[c];
          if (hv) {
            hacc[c].sum += he;
            ++hacc[c].n;
          }
          if (dv) {
            dacc[c].sum += de;
            ++dacc[c].n;
          }
        }
      }
    }
  }

  MetricReport r;
  r.label = label;
  r.buckets = buckets;
  for (std::size_t i = 0; i < nh; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      const std::size_t c = i * nd + j;
      r.joint.push_back({buckets.height[i], buckets.depth[j], hacc[c].mean(), dacc[c].mean(),
                         count[c]});
    }
  }
  for (std::size_t i = 0; i < nh; ++i) {
    const std::size_t c = i * nd + (nd - 1);
    r.height.push_back({buckets.height[i], hacc[c].mean(), hacc[c].n});
  }
  for (std::size_t j = 0; j < nd; ++j) {
    const std::size_t c = (nh - 1) * nd + j;
    r.depth.push_back({buckets.depth[j], dacc[c].mean(), dacc[c].n});
  }
  r.gamma_mae = gacc.mean();

  Mask region(ref.width(), ref.height(), 0);
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      region(x, y) = gt.depth.valid(x, y) && gt.depth(x, y) < buckets.depth.back();
    }
  }
  try {
    r.depth_metrics = depth_metrics(pred.depth, gt.depth, &region);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyMask) throw;
  }
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string to_csv(const MetricReport& r) {
  std::string out = "section,height_lt,depth_lt,metric,value,count\n";
  auto row = [&](const char* section, const std::string& h, const std::string& d,
                 const char* metric, const std::string& value, std::size_t n) {
    out += std::string(section) + "," + h + "," + d + "," + metric + "," + value + "," +
           std::to_string(n) + "\n";
  };
  const std::string dmax = fmt(r.buckets.depth.back());
  const std::string hmax = fmt(r.buckets.height.back());
  for (const auto& b : r.height) row("height", fmt(b.threshold), dmax, "mae_m", fmt(b.mae), b.count);
  for (const auto& b : r.depth) row("depth", hmax, fmt(b.threshold), "mae_m", fmt(b.mae), b.count);
  for (const auto& j : r.joint) {
    const std::string h = fmt(j.height_threshold);
    const std::string d = fmt(j.depth_threshold);
    row("joint", h, d, "height_mae_m", fmt(j.height_mae), j.count);
    row("joint", h, d, "depth_mae_m", fmt(j.depth_mae), j.count);
  }
  row("gamma", "", "", "mae", fmt(r.gamma_mae), 0);
  if (r.depth_metrics) {
    const auto& m = *r.depth_metrics;
    const std::pair<const char*, double> rows[] = {
        {"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel}, {"rmse", m.rmse},
        {"rmse_log", m.rmse_log}, {"delta1", m.delta1}, {"delta2", m.delta2},
        {"delta3", m.delta3}};
    for (const auto& [name, v] : rows) row("depth_metrics", "", dmax, name, fmt(v), m.count);
  }
  return out;
}

std::string to_json(const MetricReport& r) {
  using nlohmann::json;
  json j;
  j["label"] = r.label;
  j["buckets"] = {{"height", r.buckets.height}, {"depth", r.buckets.depth}};
  json h = json::array();
  for (const auto& b : r.height) {
    h.push_back({{"lt", b.threshold}, {"mae", opt(b.mae)}, {"count", b.count}});
  }
  json d = json::array();
  for (const auto& b : r.depth) {
    d.push_back({{"lt", b.threshold}, {"mae", opt(b.mae)}, {"count", b.count}});
  }
  json g = json::array();
  for (const auto& c : r.joint) {
    g.push_back({{"height_lt", c.height_threshold},
                 {"depth_lt", c.depth_threshold},
                 {"height_mae", opt(c.height_mae)},
                 {"depth_mae", opt(c.depth_mae)},
                 {"count", c.count}});
  }
  j["height_mae"] = h;
  j["depth_mae"] = d;
  j["joint"] = g;
  j["gamma_mae"] = opt(r.gamma_mae);
  if (r.depth_metrics) {
    const auto& m = *r.depth_metrics;
    j["depth_metrics"] = {{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},
                          {"rmse", m.rmse},       {"rmse_log", m.rmse_log},
                          {"delta1", m.delta1},   {"delta2", m.delta2},
                          {"delta3", m.delta3},   {"count", m.count}};
  } else {
    j["depth_metrics"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace parallax
