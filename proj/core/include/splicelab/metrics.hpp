#pragma once

// Pixel-level localization metrics: F1, MCC, ROC-AUC, and average
// precision, plus per-image evaluation against a ground-truth mask and
// dataset aggregation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splicelab/heatmap.hpp"
#include "splicelab/image.hpp"

namespace splicelab {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

ConfusionCounts confusion_counts(const BinaryDecisionMap& prediction,
                                 const Mask& mask);

/// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1_score(const ConfusionCounts& c);

/// (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)); 0 when any factor
/// is 0.
double mcc_score(const ConfusionCounts& c);

/// Mann-Whitney statistic: the probability that a random positive outranks
/// a random negative, ties counting one half. Throws UndefinedMetric unless
/// both classes are present.
double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels);

/// Mean of precision at each positive's rank, scores descending with stable
/// tie order by index. Throws UndefinedMetric when there is no positive.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

struct MetricsReport {
  double f1 = 0.0;
  double mcc = 0.0;
  double auc = 0.0;
  double map = 0.0;
  double threshold = 0.0;
  Polarity polarity = Polarity::direct;
  std::optional<PerturbationNorms> norms;
  std::string image_id;
  std::string method_id;
  std::string attack_id;
};

/// Oracle-threshold evaluation of one heatmap against its mask: F1/MCC come
/// from the F1-maximizing threshold sweep over both polarities, AUC/MAP from
/// the raw scores under the AUC-maximizing polarity.
MetricsReport evaluate_pair(const Heatmap& heatmap, const Mask& mask);

struct DatasetRow {
  std::string method_id;
  std::string regime;  // BL, WBA, or TRA
  std::string attack_source;
  double f1 = 0.0;
  double mcc = 0.0;
  double auc = 0.0;
  double map = 0.0;
  int image_count = 0;
  int infeasible_count = 0;
};

/// Arithmetic means over per-image reports.
DatasetRow aggregate(std::span<const MetricsReport> reports,
                     const std::string& method_id, const std::string& regime,
                     const std::string& attack_source, int infeasible_count = 0);

}  // namespace splicelab
