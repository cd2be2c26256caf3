#pragma once

// 8-bit PNG load/save for images, masks, heatmaps, and perturbation
// visualizations. Channel order in memory is RGB.

#include <filesystem>

#include "splicelab/heatmap.hpp"
#include "splicelab/image.hpp"

namespace splicelab {

/// Loads a 1- or 3-channel 8-bit PNG. Values come back integral in [0, 255].
Image load_png(const std::filesystem::path& path);

/// Saves a quantized image (all values integral in [0, 255]).
void save_png(const std::filesystem::path& path, const Image& image);

/// Loads a mask; any nonzero input value maps to 1. Multi-channel masks are
/// reduced with a per-pixel maximum.
Mask load_mask_png(const std::filesystem::path& path);

void save_mask_png(const std::filesystem::path& path, const Mask& mask);

/// Renders 128 + k * delta on a gray background, clipped and quantized.
void save_perturbation_png(const std::filesystem::path& path,
                           const Perturbation& p, double k = 100.0);

/// Grayscale heatmap: round(score * 255).
void save_heatmap_png(const std::filesystem::path& path, const Heatmap& map);

/// Colorized heatmap on a blue (low) to red (high) ramp.
void save_heatmap_color_png(const std::filesystem::path& path,
                            const Heatmap& map);

/// Color ramp used for heatmap rendering; t in [0, 1] -> RGB in [0, 255].
void heat_color(double t, std::uint8_t rgb[3]);

}  // namespace splicelab
