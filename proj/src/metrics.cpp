#include "oaf/metrics.hpp"

#include <cmath>
#include <limits>

#include "oaf/errors.hpp"

namespace oaf {

namespace {

void check_match(const LabeledVolume& pred, const LabeledVolume& truth) {
  validate(pred);
  validate(truth);
  if (pred.depth != truth.depth || pred.na != truth.na ||
      pred.nb != truth.nb)
    throw ConfigError("metrics: volume dimensions differ");
  if (pred.layer_count != truth.layer_count)
    throw ConfigError("metrics: layer counts differ");
}

bool column_ordered(const LabeledVolume& v, int a, int b) {
  for (int k = 0; k + 1 < v.depth; ++k) {
    if (v.labels[v.index(k + 1, a, b)] < v.labels[v.index(k, a, b)])
      return false;
  }
  return true;
}

// First depth whose label reaches threshold, or -1 when absent.
int crossing(const LabeledVolume& v, int a, int b, int threshold) {
  for (int k = 0; k < v.depth; ++k) {
    if (v.labels[v.index(k, a, b)] >= threshold) return k;
  }
  return -1;
}

}  // namespace

double dice(const LabeledVolume& pred, const LabeledVolume& truth, int layer) {
  check_match(pred, truth);
  if (layer < 0 || layer >= pred.layer_count)
    throw ConfigError("metrics: layer index out of range");
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const bool p = pred.labels[i] == layer;
    const bool t = truth.labels[i] == layer;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  if (tp + fp + fn == 0) return 1.0;  // both sets empty
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

double mae(const LabeledVolume& pred, const LabeledVolume& truth, int boundary,
           long long* excluded) {
  check_match(pred, truth);
  if (boundary < 0 || boundary + 1 >= pred.layer_count)
    throw ConfigError("metrics: boundary index out of range");
  long long skipped = 0, used = 0;
  double total = 0.0;
  for (int b = 0; b < pred.nb; ++b) {
    for (int a = 0; a < pred.na; ++a) {
      if (!column_ordered(pred, a, b) || !column_ordered(truth, a, b)) {
        ++skipped;
        continue;
      }
      const int kp = crossing(pred, a, b, boundary + 1);
      const int kt = crossing(truth, a, b, boundary + 1);
      if (kp < 0 || kt < 0) {
        ++skipped;
        continue;
      }
      total += std::abs(kp - kt);
      ++used;
    }
  }
  if (excluded) *excluded = skipped;
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return total / used;
}

long long count_order_violations(const LabeledVolume& labels) {
  validate(labels);
  long long v = 0;
  for (int b = 0; b < labels.nb; ++b) {
    for (int a = 0; a < labels.na; ++a) {
      for (int k = 0; k + 1 < labels.depth; ++k) {
        if (labels.labels[labels.index(k + 1, a, b)] <
            labels.labels[labels.index(k, a, b)])
          ++v;
      }
    }
  }
  return v;
}

MetricsReport evaluate_labels(const LabeledVolume& pred,
                              const LabeledVolume& truth) {
  check_match(pred, truth);
  MetricsReport rep;
  for (int l = 0; l < pred.layer_count; ++l) {
    rep.per_layer_dice.push_back(dice(pred, truth, l));
  }
  for (int m = 0; m + 1 < pred.layer_count; ++m) {
    long long skipped = 0;
    rep.per_boundary_mae.push_back(mae(pred, truth, m, &skipped));
    rep.excluded_columns.push_back(skipped);
  }
  rep.violations = count_order_violations(pred);
  return rep;
}

}  // namespace oaf
