#include "splicelab/attack.hpp"

#include <algorithm>
#include <cmath>

#include "splicelab/errors.hpp"

namespace splicelab {

AttackTarget compute_target(const Image& image, const Mask& mask,
                            const FeatureExtractor& extractor) {
  if (image.height != mask.height || image.width != mask.width) {
    throw ShapeMismatch("image and mask dimensions differ");
  }
  const PatchGrid grid = extractor.grid_for(image.height, image.width);
  AttackTarget out;
  std::vector<double> sum(extractor.feature_dim(), 0.0);
  for (size_t i = 0; i < grid.count(); ++i) {
    if (!is_patch_authentic(mask, grid.patches[i])) continue;
    out.authentic_set.push_back(i);
    const FeatureVector f = extractor.extract(crop(image, grid.patches[i]));
    for (size_t d = 0; d < sum.size(); ++d) sum[d] += f.values[d];
  }
  if (out.authentic_set.empty()) {
    throw AttackInfeasible("no authentic patch on the " + extractor.id() +
                           " grid");
  }
  for (double& v : sum) v /= static_cast<double>(out.authentic_set.size());
  out.target = FeatureVector{std::move(sum), extractor.id()};
  return out;
}

AccumulatedGradient accumulate_gradients(const Image& image,
                                         const PatchGrid& grid,
                                         const FeatureExtractor& extractor,
                                         std::span<const double> target) {
  AccumulatedGradient acc;
  acc.gradient = Image(image.height, image.width, image.channels);
  double dist_sum = 0.0;
  for (const PatchRect& rect : grid.patches) {
    const LossGradient lg =
        extractor.loss_and_gradient(crop(image, rect), target);
    add_patch(acc.gradient, lg.gradient, rect);
    dist_sum += std::sqrt(2.0 * lg.loss);  // ||t - f(P_i)||
  }
  acc.mean_distance = dist_sum / static_cast<double>(grid.count());
  if (!std::isfinite(acc.mean_distance)) {
    throw NumericalFailure("non-finite patch distance");
  }
  return acc;
}

namespace {

double linf_norm_checked(const Image& g) {
  double mx = 0.0;
  for (double v : g.data) {
    if (!std::isfinite(v)) throw NumericalFailure("non-finite gradient value");
    mx = std::max(mx, std::abs(v));
  }
  return mx;
}

AttackResult attack_core(const Image& image, const PatchGrid& grid,
                         const FeatureExtractor& extractor,
                         FeatureVector target, size_t authentic_count,
                         const AttackConfig& config) {
  if (config.alpha <= 0.0 || config.max_iters < 1) {
    throw InvalidArgument("attack requires alpha > 0 and max_iters >= 1");
  }
  AttackResult result;
  result.target = target;
  result.authentic_patch_count = authentic_count;

  Image current = image;
  AccumulatedGradient acc =
      accumulate_gradients(current, grid, extractor, target.values);
  result.initial_distance = acc.mean_distance;

  // Candidate selection: strict improvement keeps the earliest best.
  bool have_best = false;
  int best_iter = 0;
  double best_dist = 0.0;
  Image best_image;
  if (config.include_initial_candidate) {
    have_best = true;
    best_dist = acc.mean_distance;
    best_image = current;
  }

  for (int n = 1; n <= config.max_iters; ++n) {
    const double ginf = linf_norm_checked(acc.gradient);
    if (ginf == 0.0) break;  // exact optimum; the update is undefined
    const double scale = config.alpha / ginf;
    for (size_t i = 0; i < current.size(); ++i) {
      current.data[i] -= scale * acc.gradient.data[i];
    }
    clip_in_place(current);
    acc = accumulate_gradients(current, grid, extractor, target.values);
    result.distance_trace.push_back(acc.mean_distance);
    if (!have_best || acc.mean_distance < best_dist) {
      have_best = true;
      best_iter = n;
      best_dist = acc.mean_distance;
      best_image = current;
    }
  }

  if (!have_best) {
    // Gradient vanished before the first step; the input is already optimal.
    best_image = image;
    best_iter = 0;
  }
  result.best_iteration = best_iter;
  result.adversarial_image = quantize_image(clip_image(best_image));
  result.perturbation =
      make_perturbation(quantize_image(clip_image(image)),
                        result.adversarial_image);
  return result;
}

}  // namespace

AttackResult run_attack(const Image& image, const Mask& mask,
                        const AttackConfig& config,
                        const FeatureExtractor& extractor) {
  AttackTarget t = compute_target(image, mask, extractor);
  const PatchGrid grid = extractor.grid_for(image.height, image.width);
  return attack_core(image, grid, extractor, std::move(t.target),
                     t.authentic_set.size(), config);
}

AttackResult run_image_attack(const Image& image,
                              const Image& authentic_reference,
                              const AttackConfig& config,
                              const FeatureExtractor& extractor) {
  if (!image.same_shape(authentic_reference)) {
    throw ShapeMismatch("image and authentic reference shapes differ");
  }
  const auto whole =
      extractor.with_patch_shape(image.height, image.width);
  FeatureVector target = whole->extract(authentic_reference);
  PatchGrid grid;
  grid.patch_height = image.height;
  grid.patch_width = image.width;
  grid.stride_y = image.height;
  grid.stride_x = image.width;
  grid.patches = {PatchRect{0, 0, image.height, image.width}};
  return attack_core(image, grid, *whole, std::move(target), 1, config);
}

}  // namespace splicelab
