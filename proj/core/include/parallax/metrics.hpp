#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "parallax/types.hpp"

namespace parallax {

/// Cumulative upper bounds: bucket "h < 0.3" includes the "h < 0.1" cells.
struct BucketSpec {
  std::vector<double> height{0.1, 0.3, 0.5, 1.0};  ///< meters
  std::vector<double> depth{30.0, 50.0, 80.0};     ///< meters
};

/// Throws InvalidArgument unless both lists are nonempty, positive and
/// strictly increasing.
void validate(const BucketSpec& buckets);

/// Mean |pred - gt| over cells valid in both maps and set in `bucket`.
/// Throws EmptyBucket when no cell qualifies.
double mae(const Grid<double>& pred, const Mask& pred_valid, const Grid<double>& gt,
           const Mask& gt_valid, const Mask& bucket);

template <typename Tag>
double mae(const Field<double, Tag>& pred, const Field<double, Tag>& gt, const Mask& bucket) {
  return mae(pred.values(), pred.mask(), gt.values(), gt.mask(), bucket);
}

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;  ///< fraction with max(p/g, g/p) < 1.25
  double delta2 = 0.0;  ///< ... < 1.25^2
  double delta3 = 0.0;  ///< ... < 1.25^3
  std::size_t count = 0;
};

/// Standard depth metrics over jointly valid cells (restricted to `region`
/// when given). Throws EmptyMask when nothing qualifies and NonPositiveDepth
/// when a qualifying value is not positive.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const Mask* region = nullptr);

/// MAE of one bucket; `mae` is absent when the bucket is empty.
struct BucketResult {
  double threshold = 0.0;
  std::optional<double> mae;
  std::size_t count = 0;
};

/// One cell of the height x depth grid.
struct JointResult {
  double height_threshold = 0.0;
  double depth_threshold = 0.0;
  std::optional<double> height_mae;
  std::optional<double> depth_mae;
  std::size_t count = 0;
};

struct MapBundle {
  GammaMap gamma;
  DepthMap depth;
  HeightMap height;
};

/// Height buckets select on ground-truth height and depth buckets on
/// ground-truth depth. Each marginal is taken inside the outermost bucket of
/// the other axis, so the marginals equal the last row/column of the joint
/// grid. Depth metrics are likewise limited to d < the largest depth bound.
struct MetricReport {
  std::string label;
  BucketSpec buckets;
  std::vector<BucketResult> height;      ///< height MAE per height bucket
  std::vector<BucketResult> depth;       ///< depth MAE per depth bucket
  std::vector<JointResult> joint;        ///< row-major [height][depth]
  std::optional<double> gamma_mae;
  std::optional<DepthMetrics> depth_metrics;
};

/// Throws GridMismatch when the maps are not congruent.
MetricReport evaluate_pair(const MapBundle& pred, const MapBundle& gt,
                           const BucketSpec& buckets = {}, const std::string& label = {});

/// One row per bucket and metric: section,height_lt,depth_lt,metric,value,count.
/// Empty buckets leave the value column empty.
std::string to_csv(const MetricReport& report);
std::string to_json(const MetricReport& report);

}  // namespace parallax
