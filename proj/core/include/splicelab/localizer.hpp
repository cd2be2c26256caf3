#pragma once

// Splice localization: fit a two-component GMM over the patch features of
// one image, paint the minority component's posterior back onto pixels,
// and binarize with an oracle (mask-informed) F1-maximizing threshold.

#include <cstdint>
#include <span>
#include <vector>

#include "splicelab/features.hpp"
#include "splicelab/gmm.hpp"
#include "splicelab/heatmap.hpp"
#include "splicelab/image.hpp"

namespace splicelab {

/// Per-pixel mean of the covering patches' scores.
Heatmap paint_heatmap(int height, int width, const PatchGrid& grid,
                      std::span<const double> patch_scores);

/// Full localization pipeline for one image. A degenerate mixture fit
/// (identical features) yields an all-0.5 heatmap with the degenerate flag.
Heatmap localize(const Image& image, const FeatureExtractor& extractor,
                 std::uint64_t seed);

/// Sweeps every distinct heatmap value as a threshold over both polarities
/// and returns the binary map maximizing F1 against the mask.
BinaryDecisionMap select_threshold(const Heatmap& heatmap, const Mask& mask);

}  // namespace splicelab
