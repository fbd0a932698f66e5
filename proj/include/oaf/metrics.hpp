#pragma once

#include <cstdint>
#include <vector>

#include "oaf/volume.hpp"

namespace oaf {

// Segmentation quality measures on labeled volumes plus the report bundle
// the CLI serializes.

struct MetricsReport {
  std::vector<double> per_layer_dice;     // one entry per layer
  std::vector<double> per_boundary_mae;   // one entry per interior boundary
  std::vector<long long> excluded_columns;  // per boundary, columns skipped
  long long violations = 0;
  double runtime_s = 0.0;
  bool converged = true;
};

// 2|A n B| / (|A| + |B|) for the voxel sets of one layer; 1 when both sets
// are empty.
double dice(const LabeledVolume& pred, const LabeledVolume& truth, int layer);

// Mean absolute depth difference of boundary crossings over columns.  The
// crossing for boundary b is the first depth index whose label reaches
// b + 1.  Columns are excluded (and tallied into excluded, if given) when
// either volume's column is unordered or misses the crossing; with no
// usable column the result is NaN.
double mae(const LabeledVolume& pred, const LabeledVolume& truth, int boundary,
           long long* excluded = nullptr);

// Depth-adjacent voxel pairs within a column whose deeper label is smaller.
long long count_order_violations(const LabeledVolume& labels);

// Full report (dice for every layer, mae for every boundary, violation
// count).  runtime_s and converged are left for the caller to fill.
MetricsReport evaluate_labels(const LabeledVolume& pred,
                              const LabeledVolume& truth);

}  // namespace oaf
