#pragma once

// Patch-representation mimicry attack.
//
// Given a spliced image and its mask, the target feature vector t is the
// mean feature of the fully-authentic patches. Every patch (authentic and
// manipulated) is then driven toward t: per-patch gradients of the
// Euclidean feature loss are summed into an image-shaped field G, the
// image steps by alpha * G / ||G||_inf, pixels are clipped to [0, 255],
// and the iterate whose patches have the smallest mean distance to t is
// kept, quantized, as the adversarial image.

#include <cstdint>
#include <string>
#include <vector>

#include "splicelab/features.hpp"
#include "splicelab/image.hpp"

namespace splicelab {

struct AttackConfig {
  double alpha = 5.0;
  int max_iters = 50;
  std::string extractor_id;
  bool include_initial_candidate = false;
};

struct AttackTarget {
  FeatureVector target;
  std::vector<size_t> authentic_set;  // grid indices of authentic patches
};

/// Mean feature over authentic patches. Throws AttackInfeasible when the
/// mask leaves no authentic patch on the extractor's grid.
AttackTarget compute_target(const Image& image, const Mask& mask,
                            const FeatureExtractor& extractor);

struct AccumulatedGradient {
  Image gradient;            // image-shaped sum of padded patch gradients
  double mean_distance = 0;  // (1/L) * sum_i ||t - f(P_i)||
};

/// Sums each patch's loss gradient into an image-shaped field, iterating
/// patches in grid order.
AccumulatedGradient accumulate_gradients(const Image& image,
                                         const PatchGrid& grid,
                                         const FeatureExtractor& extractor,
                                         std::span<const double> target);

struct AttackResult {
  Image adversarial_image;  // quantized, values integral in [0, 255]
  /// Iterate selected by smallest mean distance; 0 means the input image
  /// (selected only when the gradient vanished before the first step or
  /// when include_initial_candidate won the sweep).
  int best_iteration = 0;
  double initial_distance = 0.0;
  std::vector<double> distance_trace;  // mean distance of X_1 .. X_N
  FeatureVector target;
  size_t authentic_patch_count = 0;
  Perturbation perturbation;
};

AttackResult run_attack(const Image& image, const Mask& mask,
                        const AttackConfig& config,
                        const FeatureExtractor& extractor);

/// Whole-image variant: a single patch spanning the image, with the target
/// taken from an authentic reference image instead of a patch mean.
AttackResult run_image_attack(const Image& image,
                              const Image& authentic_reference,
                              const AttackConfig& config,
                              const FeatureExtractor& extractor);

}  // namespace splicelab
