#pragma once

// Deterministic generator of desk-scale spliced images with exact
// ground-truth masks. Host and donor content pass through distinct
// simulated camera pipelines (blur / gamma / noise / quantization) so that
// statistical patch features separate the two regions.

#include <cstdint>
#include <string>

#include "splicelab/image.hpp"

namespace splicelab {

struct CameraPipeline {
  std::string id;
  double noise_sigma = 0.0;  // gray levels
  bool blur = false;         // 3x3 binomial low-pass
  double gamma = 1.0;
  int quant_step = 0;  // 0 = none; otherwise snap to multiples of quant_step
};

/// Stock pipelines: "cam_a" (sigma 1, gamma 1.0), "cam_b" (sigma 6, 3x3
/// low-pass, gamma 1.2), "identity" (no-op).
CameraPipeline stock_pipeline(const std::string& id);

enum class SpliceShape { rectangle, ellipse };

const char* to_string(SpliceShape s);
SpliceShape splice_shape_from_string(const std::string& s);

struct SpliceSpec {
  int size = 128;  // square images
  int channels = 3;
  SpliceShape shape = SpliceShape::rectangle;
  double splice_fraction = 0.25;
  std::string host_pipeline = "cam_a";
  std::string donor_pipeline = "cam_b";
  std::uint64_t seed = 0;
};

/// Procedural content: smooth gradients plus band-limited texture,
/// bit-identical for a given seed, values in [0, 255].
Image render_base(std::uint64_t seed, int height, int width, int channels);

/// blur -> gamma -> additive Gaussian noise -> optional quantization,
/// clipped to [0, 255].
Image apply_pipeline(const Image& image, const CameraPipeline& pipeline,
                     std::uint64_t seed);

struct SpliceSample {
  Image image;      // composite, quantized
  Mask mask;        // 1 exactly where donor pixels were used
  Image host_only;  // the authentic counterpart, quantized
};

/// Renders host and donor, composites the donor region under a placed
/// shape, and guarantees at least one fully authentic patch on the default
/// extractor grids. Throws InfeasibleSpec after 10 failed placements.
SpliceSample make_splice(const SpliceSpec& spec);

}  // namespace splicelab
