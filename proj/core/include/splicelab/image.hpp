#pragma once

// Pixel containers and patch-grid machinery shared across the library.
//
// Images are stored as real-valued rasters in row-major (y, x, channel)
// order. The nominal pixel domain is [0, 255]; attack arithmetic runs on
// real values and quantization happens only when an image is saved.

#include <cstdint>
#include <vector>

#include "splicelab/errors.hpp"

namespace splicelab {

struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;  // height * width * channels values

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

/// Binary manipulation mask: 1 = manipulated, 0 = authentic.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}

  std::uint8_t& at(int y, int x) {
    return values[static_cast<size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return values[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return values.size(); }
};

struct PatchRect {
  int y = 0;
  int x = 0;
  int height = 0;
  int width = 0;
};

/// Deterministic set of patch rectangles over an image, ordered row-major
/// by (y, x). When the stride does not tile the image exactly, a final
/// patch anchored flush to the far edge is appended per axis so that the
/// union of rectangles covers every pixel.
struct PatchGrid {
  int patch_height = 0;
  int patch_width = 0;
  int stride_y = 0;
  int stride_x = 0;
  std::vector<PatchRect> patches;

  size_t count() const { return patches.size(); }
  bool operator==(const PatchGrid&) const = default;
};

PatchGrid build_patch_grid(int image_height, int image_width, int patch_height,
                           int patch_width, int stride_y, int stride_x);

inline PatchGrid build_patch_grid(int image_height, int image_width,
                                  int patch_size, int stride) {
  return build_patch_grid(image_height, image_width, patch_size, patch_size,
                          stride, stride);
}

/// True iff every mask pixel inside the rectangle is authentic (== 0).
bool is_patch_authentic(const Mask& mask, const PatchRect& rect);

Image crop(const Image& image, const PatchRect& rect);

/// Adds a patch-shaped raster into `target` at the rectangle's location.
void add_patch(Image& target, const Image& patch, const PatchRect& rect);

/// Clamps every value into [0, 255].
Image clip_image(const Image& image);
void clip_in_place(Image& image);

/// Rounds every value to the nearest integer, half away from zero.
/// Requires all values in [0, 255].
Image quantize_image(const Image& image);

struct Perturbation {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> delta;  // adversarial - original, per pixel-channel
};

Perturbation make_perturbation(const Image& original, const Image& adversarial);

struct PerturbationNorms {
  std::int64_t l0 = 0;  // nonzero entries
  double l2 = 0.0;
  double linf = 0.0;
};

PerturbationNorms perturbation_norms(const Perturbation& p);

/// quantize(clip(original + s * (adversarial - original))).
Image scale_perturbation(const Image& original, const Image& adversarial,
                         double s);

}  // namespace splicelab
