#include "splicelab/localizer.hpp"

#include <algorithm>
#include <numeric>

#include "splicelab/errors.hpp"
#include "splicelab/metrics.hpp"

namespace splicelab {

Heatmap paint_heatmap(int height, int width, const PatchGrid& grid,
                      std::span<const double> patch_scores) {
  if (patch_scores.size() != grid.count()) {
    throw DimensionMismatch("one score per grid patch required");
  }
  Heatmap map(height, width, 0.0);
  std::vector<int> cover(static_cast<size_t>(height) * width, 0);
  for (size_t i = 0; i < grid.count(); ++i) {
    const PatchRect& r = grid.patches[i];
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        const size_t idx = static_cast<size_t>(y) * width + x;
        map.scores[idx] += patch_scores[i];
        ++cover[idx];
      }
    }
  }
  for (size_t idx = 0; idx < map.scores.size(); ++idx) {
    if (cover[idx] == 0) {
      throw NumericalFailure("patch grid does not cover the image");
    }
    map.scores[idx] /= cover[idx];
  }
  return map;
}

Heatmap localize(const Image& image, const FeatureExtractor& extractor,
                 std::uint64_t seed) {
  const PatchGrid grid = extractor.grid_for(image.height, image.width);
  std::vector<std::vector<double>> features;
  features.reserve(grid.count());
  for (const PatchRect& rect : grid.patches) {
    features.push_back(extractor.extract(crop(image, rect)).values);
  }
  const GmmModel model = fit_gmm(features, seed);
  if (model.degenerate) {
    Heatmap map(image.height, image.width, 0.5);
    map.degenerate = true;
    return map;
  }
  const int minority = minority_component(model);
  std::vector<double> scores(grid.count());
  for (size_t i = 0; i < grid.count(); ++i) {
    scores[i] = gmm_posterior(model, features[i])[minority];
  }
  return paint_heatmap(image.height, image.width, grid, scores);
}

namespace {

struct SweepBest {
  double f1 = -1.0;
  double threshold = 0.0;
  size_t prefix = 0;  // pixels predicted positive, in sorted order
};

// Thresholds at every distinct score, scanned from high to low so each
// candidate adds one tied group to the predicted-positive prefix. The first
// maximum wins within a sweep.
SweepBest sweep_f1(const std::vector<size_t>& order,
                   std::span<const double> scores, const Mask& mask,
                   std::int64_t total_pos) {
  SweepBest best;
  std::int64_t tp = 0;
  size_t taken = 0;
  while (taken < order.size()) {
    size_t j = taken;
    const double value = scores[order[taken]];
    while (j < order.size() && scores[order[j]] == value) {
      if (mask.values[order[j]] != 0) ++tp;
      ++j;
    }
    taken = j;
    const std::int64_t fp = static_cast<std::int64_t>(taken) - tp;
    const std::int64_t fn = total_pos - tp;
    const double denom = static_cast<double>(2 * tp + fp + fn);
    const double f1 = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = value;
      best.prefix = taken;
    }
  }
  return best;
}

}  // namespace

BinaryDecisionMap select_threshold(const Heatmap& heatmap, const Mask& mask) {
  if (heatmap.height != mask.height || heatmap.width != mask.width) {
    throw ShapeMismatch("heatmap and mask dimensions differ");
  }
  const size_t n = heatmap.scores.size();
  std::int64_t total_pos = 0;
  for (auto v : mask.values) total_pos += v != 0;

  std::vector<size_t> desc(n);
  std::iota(desc.begin(), desc.end(), 0);
  std::sort(desc.begin(), desc.end(), [&](size_t a, size_t b) {
    return heatmap.scores[a] > heatmap.scores[b];
  });
  const SweepBest direct = sweep_f1(desc, heatmap.scores, mask, total_pos);

  std::vector<double> flipped(n);
  for (size_t i = 0; i < n; ++i) flipped[i] = 1.0 - heatmap.scores[i];
  std::vector<size_t> asc(n);
  std::iota(asc.begin(), asc.end(), 0);
  std::sort(asc.begin(), asc.end(),
            [&](size_t a, size_t b) { return flipped[a] > flipped[b]; });
  const SweepBest complement = sweep_f1(asc, flipped, mask, total_pos);

  const bool use_complement = complement.f1 >= direct.f1;
  const SweepBest& chosen = use_complement ? complement : direct;
  const std::vector<size_t>& order = use_complement ? asc : desc;

  BinaryDecisionMap map;
  map.height = heatmap.height;
  map.width = heatmap.width;
  map.values.assign(n, 0);
  for (size_t i = 0; i < chosen.prefix; ++i) map.values[order[i]] = 1;
  map.threshold_used = chosen.threshold;
  map.polarity_used = use_complement ? Polarity::complement : Polarity::direct;
  return map;
}

}  // namespace splicelab
