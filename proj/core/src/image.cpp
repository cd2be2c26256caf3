#include "splicelab/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splicelab {

namespace {

// Anchor positions along one axis: 0, stride, 2*stride, ... plus a flush
// final position when the stride does not land exactly on dim - patch.
std::vector<int> axis_positions(int dim, int patch, int stride) {
  std::vector<int> pos;
  for (int p = 0; p + patch <= dim; p += stride) pos.push_back(p);
  if (pos.empty() || pos.back() != dim - patch) pos.push_back(dim - patch);
  return pos;
}

}  // namespace

PatchGrid build_patch_grid(int image_height, int image_width, int patch_height,
                           int patch_width, int stride_y, int stride_x) {
  if (patch_height > image_height || patch_width > image_width) {
    throw PatchLargerThanImage(
        "patch " + std::to_string(patch_height) + "x" +
        std::to_string(patch_width) + " exceeds image " +
        std::to_string(image_height) + "x" + std::to_string(image_width));
  }
  if (patch_height < 1 || patch_width < 1 || stride_y < 1 || stride_x < 1) {
    throw InvalidArgument("patch and stride must be >= 1");
  }
  PatchGrid grid;
  grid.patch_height = patch_height;
  grid.patch_width = patch_width;
  grid.stride_y = stride_y;
  grid.stride_x = stride_x;
  const auto ys = axis_positions(image_height, patch_height, stride_y);
  const auto xs = axis_positions(image_width, patch_width, stride_x);
  grid.patches.reserve(ys.size() * xs.size());
  for (int y : ys) {
    for (int x : xs) {
      grid.patches.push_back(PatchRect{y, x, patch_height, patch_width});
    }
  }
  return grid;
}

bool is_patch_authentic(const Mask& mask, const PatchRect& rect) {
  if (rect.y < 0 || rect.x < 0 || rect.y + rect.height > mask.height ||
      rect.x + rect.width > mask.width) {
    throw OutOfRange("patch rectangle outside mask bounds");
  }
  for (int y = rect.y; y < rect.y + rect.height; ++y) {
    for (int x = rect.x; x < rect.x + rect.width; ++x) {
      if (mask.at(y, x) != 0) return false;
    }
  }
  return true;
}

Image crop(const Image& image, const PatchRect& rect) {
  if (rect.y < 0 || rect.x < 0 || rect.y + rect.height > image.height ||
      rect.x + rect.width > image.width) {
    throw OutOfRange("patch rectangle outside image bounds");
  }
  Image out(rect.height, rect.width, image.channels);
  const size_t row_bytes = static_cast<size_t>(rect.width) * image.channels;
  for (int y = 0; y < rect.height; ++y) {
    const double* src =
        &image.data[(static_cast<size_t>(rect.y + y) * image.width + rect.x) *
                    image.channels];
    std::copy(src, src + row_bytes,
              &out.data[static_cast<size_t>(y) * row_bytes]);
  }
  return out;
}

void add_patch(Image& target, const Image& patch, const PatchRect& rect) {
  if (patch.height != rect.height || patch.width != rect.width ||
      patch.channels != target.channels) {
    throw ShapeMismatch("patch shape does not match rectangle");
  }
  const size_t row = static_cast<size_t>(rect.width) * target.channels;
  for (int y = 0; y < rect.height; ++y) {
    double* dst =
        &target.data[(static_cast<size_t>(rect.y + y) * target.width + rect.x) *
                     target.channels];
    const double* src = &patch.data[static_cast<size_t>(y) * row];
    for (size_t i = 0; i < row; ++i) dst[i] += src[i];
  }
}

void clip_in_place(Image& image) {
  for (double& v : image.data) v = std::clamp(v, 0.0, 255.0);
}

Image clip_image(const Image& image) {
  Image out = image;
  clip_in_place(out);
  return out;
}

Image quantize_image(const Image& image) {
  Image out = image;
  for (double& v : out.data) {
    if (v < 0.0 || v > 255.0) {
      throw OutOfRange("quantize_image requires values in [0, 255]");
    }
    v = std::round(v);  // round() is half away from zero
  }
  return out;
}

Perturbation make_perturbation(const Image& original, const Image& adversarial) {
  if (!original.same_shape(adversarial)) {
    throw ShapeMismatch("perturbation requires equal image shapes");
  }
  Perturbation p;
  p.height = original.height;
  p.width = original.width;
  p.channels = original.channels;
  p.delta.resize(original.size());
  for (size_t i = 0; i < original.size(); ++i) {
    p.delta[i] = adversarial.data[i] - original.data[i];
  }
  return p;
}

PerturbationNorms perturbation_norms(const Perturbation& p) {
  PerturbationNorms n;
  double sq = 0.0;
  for (double d : p.delta) {
    if (d != 0.0) ++n.l0;
    sq += d * d;
    n.linf = std::max(n.linf, std::abs(d));
  }
  n.l2 = std::sqrt(sq);
  return n;
}

Image scale_perturbation(const Image& original, const Image& adversarial,
                         double s) {
  if (!original.same_shape(adversarial)) {
    throw ShapeMismatch("scale_perturbation requires equal image shapes");
  }
  Image out = original;
  for (size_t i = 0; i < out.size(); ++i) {
    out.data[i] = original.data[i] + s * (adversarial.data[i] - original.data[i]);
  }
  clip_in_place(out);
  return quantize_image(out);
}

}  // namespace splicelab
