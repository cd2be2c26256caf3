#pragma once

#include <cstdint>
#include <vector>

namespace splicelab {

/// Per-pixel manipulation score in [0, 1].
struct Heatmap {
  int height = 0;
  int width = 0;
  std::vector<double> scores;
  bool degenerate = false;  // set when the underlying mixture fit collapsed

  Heatmap() = default;
  Heatmap(int h, int w, double fill = 0.0)
      : height(h), width(w), scores(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return scores[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const {
    return scores[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return scores.size(); }
};

enum class Polarity { direct, complement };

inline const char* to_string(Polarity p) {
  return p == Polarity::direct ? "direct" : "complement";
}

/// Thresholded heatmap. `values` equals (score >= threshold) where `score`
/// is the heatmap score under direct polarity and 1 - score under
/// complement polarity.
struct BinaryDecisionMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;
  double threshold_used = 0.0;
  Polarity polarity_used = Polarity::direct;
};

}  // namespace splicelab
