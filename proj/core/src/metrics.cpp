#include "splicelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splicelab/errors.hpp"
#include "splicelab/localizer.hpp"

namespace splicelab {

ConfusionCounts confusion_counts(const BinaryDecisionMap& prediction,
                                 const Mask& mask) {
  if (prediction.height != mask.height || prediction.width != mask.width) {
    throw ShapeMismatch("prediction and mask dimensions differ");
  }
  ConfusionCounts c;
  for (size_t i = 0; i < mask.values.size(); ++i) {
    const bool pred = prediction.values[i] != 0;
    const bool truth = mask.values[i] != 0;
    if (pred && truth) ++c.tp;
    else if (pred && !truth) ++c.fp;
    else if (!pred && truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  return denom == 0.0 ? 0.0 : 2.0 * c.tp / denom;
}

double mcc_score(const ConfusionCounts& c) {
  const double f1 = static_cast<double>(c.tp + c.fp);
  const double f2 = static_cast<double>(c.tp + c.fn);
  const double f3 = static_cast<double>(c.tn + c.fp);
  const double f4 = static_cast<double>(c.tn + c.fn);
  if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
  const double num = static_cast<double>(c.tp) * c.tn -
                     static_cast<double>(c.fp) * c.fn;
  return num / std::sqrt(f1 * f2 * f3 * f4);
}

double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeMismatch("scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::int64_t pos = 0;
  for (auto l : labels) pos += l != 0;
  const std::int64_t neg = static_cast<std::int64_t>(n) - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetric("roc_auc requires both classes");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks of the positives (ranks 1-based).
  double rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + (j + 1));
    for (size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) rank_sum += midrank;
    }
    i = j + 1;
  }
  const double u = rank_sum - 0.5 * pos * (pos + 1.0);
  return u / (static_cast<double>(pos) * neg);
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeMismatch("scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  double seen_pos = 0.0;
  double sum = 0.0;
  for (size_t rank = 0; rank < n; ++rank) {
    if (labels[order[rank]] != 0) {
      seen_pos += 1.0;
      sum += seen_pos / static_cast<double>(rank + 1);
    }
  }
  if (seen_pos == 0.0) {
    throw UndefinedMetric("average_precision requires a positive label");
  }
  return sum / seen_pos;
}

MetricsReport evaluate_pair(const Heatmap& heatmap, const Mask& mask) {
  if (heatmap.height != mask.height || heatmap.width != mask.width) {
    throw ShapeMismatch("heatmap and mask dimensions differ");
  }
  MetricsReport report;
  const BinaryDecisionMap best = select_threshold(heatmap, mask);
  const ConfusionCounts c = confusion_counts(best, mask);
  report.f1 = f1_score(c);
  report.mcc = mcc_score(c);
  report.threshold = best.threshold_used;
  report.polarity = best.polarity_used;

  const double auc_direct = roc_auc(heatmap.scores, mask.values);
  if (auc_direct >= 1.0 - auc_direct) {
    report.auc = auc_direct;
    report.map = average_precision(heatmap.scores, mask.values);
  } else {
    std::vector<double> flipped(heatmap.scores.size());
    for (size_t i = 0; i < flipped.size(); ++i) {
      flipped[i] = 1.0 - heatmap.scores[i];
    }
    report.auc = 1.0 - auc_direct;
    report.map = average_precision(flipped, mask.values);
  }
  return report;
}

DatasetRow aggregate(std::span<const MetricsReport> reports,
                     const std::string& method_id, const std::string& regime,
                     const std::string& attack_source, int infeasible_count) {
  if (reports.empty()) throw InvalidArgument("aggregate needs >= 1 report");
  DatasetRow row;
  row.method_id = method_id;
  row.regime = regime;
  row.attack_source = attack_source;
  row.image_count = static_cast<int>(reports.size());
  row.infeasible_count = infeasible_count;
  for (const MetricsReport& r : reports) {
    row.f1 += r.f1;
    row.mcc += r.mcc;
    row.auc += r.auc;
    row.map += r.map;
  }
  const double n = static_cast<double>(reports.size());
  row.f1 /= n;
  row.mcc /= n;
  row.auc /= n;
  row.map /= n;
  return row;
}

}  // namespace splicelab
