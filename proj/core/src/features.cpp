#include "splicelab/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace splicelab {

FeatureVector FeatureExtractor::extract(const Image& patch) const {
  check_patch(patch);
  return FeatureVector{compute_features(patch), spec_.id};
}

LossGradient FeatureExtractor::loss_and_gradient(
    const Image& patch, std::span<const double> target) const {
  check_patch(patch);
  if (static_cast<int>(target.size()) != spec_.feature_dim) {
    throw DimensionMismatch("target dimension " +
                            std::to_string(target.size()) + " != " +
                            std::to_string(spec_.feature_dim));
  }
  const std::vector<double> f = compute_features(patch);
  std::vector<double> residual(f.size());
  double loss = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    residual[i] = f[i] - target[i];
    loss += residual[i] * residual[i];
  }
  loss *= 0.5;
  return LossGradient{loss, apply_jacobian_transpose(patch, residual)};
}

void FeatureExtractor::check_patch(const Image& patch) const {
  if (patch.height != spec_.patch_height || patch.width != spec_.patch_width ||
      patch.channels != spec_.channels) {
    throw ShapeMismatch("patch " + std::to_string(patch.height) + "x" +
                        std::to_string(patch.width) + "x" +
                        std::to_string(patch.channels) + " does not match " +
                        spec_.id + " spec");
  }
}

PatchGrid FeatureExtractor::grid_for(int image_height, int image_width) const {
  return build_patch_grid(image_height, image_width, spec_.patch_height,
                          spec_.patch_width, spec_.stride, spec_.stride);
}

// ---------------------------------------------------------------------------
// ChannelMoments: per channel {mean, variance, third central moment divided
// by the patch area}. The extra 1/area on the cubic term keeps its numeric
// range comparable to the other statistics, so squared-distance losses over
// these features are not dominated by it.

ChannelMomentsExtractor::ChannelMomentsExtractor(int patch_height,
                                                 int patch_width, int stride,
                                                 int channels)
    : FeatureExtractor({"channel_moments", patch_height, patch_width, stride,
                        channels, 3 * channels}) {
  if (patch_height < 1 || patch_width < 1) {
    throw InvalidArgument("channel_moments requires a nonempty patch");
  }
}

std::unique_ptr<FeatureExtractor> ChannelMomentsExtractor::with_patch_shape(
    int h, int w) const {
  return std::make_unique<ChannelMomentsExtractor>(h, w, spec_.stride,
                                                   spec_.channels);
}

std::vector<double> ChannelMomentsExtractor::compute_features(
    const Image& patch) const {
  const int ch = patch.channels;
  const double n = static_cast<double>(patch.height) * patch.width;
  std::vector<double> out(3 * ch, 0.0);
  for (int c = 0; c < ch; ++c) {
    double mean = 0.0;
    for (size_t i = c; i < patch.size(); i += ch) mean += patch.data[i];
    mean /= n;
    double var = 0.0, m3 = 0.0;
    for (size_t i = c; i < patch.size(); i += ch) {
      const double d = patch.data[i] - mean;
      var += d * d;
      m3 += d * d * d;
    }
    out[3 * c + 0] = mean;
    out[3 * c + 1] = var / n;
    out[3 * c + 2] = m3 / (n * n);
  }
  return out;
}

Image ChannelMomentsExtractor::apply_jacobian_transpose(
    const Image& patch, std::span<const double> residual) const {
  const int ch = patch.channels;
  const double n = static_cast<double>(patch.height) * patch.width;
  const std::vector<double> f = compute_features(patch);
  Image grad(patch.height, patch.width, ch);
  for (int c = 0; c < ch; ++c) {
    const double mean = f[3 * c + 0];
    const double var = f[3 * c + 1];
    const double r_mean = residual[3 * c + 0];
    const double r_var = residual[3 * c + 1];
    const double r_m3 = residual[3 * c + 2];
    for (size_t i = c; i < patch.size(); i += ch) {
      const double d = patch.data[i] - mean;
      grad.data[i] = r_mean / n + r_var * (2.0 / n) * d +
                     r_m3 * (3.0 / (n * n)) * (d * d - var);
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// HighPassResidual: fixed 3x3 high-pass kernels; per kernel and channel the
// mean smoothed-absolute response sqrt(r^2 + eps) and the raw response
// variance. Responses are taken where the kernel fits (valid mode).

namespace {

constexpr std::array<std::array<double, 9>, 4> kHighPassKernels = {{
    // Laplacian (4-neighbor)
    {0, 1, 0, 1, -4, 1, 0, 1, 0},
    // horizontal second difference
    {0, 0, 0, 1, -2, 1, 0, 0, 0},
    // vertical second difference
    {0, 1, 0, 0, -2, 0, 0, 1, 0},
    // checkerboard (cross second derivative)
    {1, -2, 1, -2, 4, -2, 1, -2, 1},
}};

}  // namespace

const double* HighPassResidualExtractor::kernel(int k) {
  return kHighPassKernels[static_cast<size_t>(k)].data();
}

HighPassResidualExtractor::HighPassResidualExtractor(int patch_height,
                                                     int patch_width,
                                                     int stride, int channels)
    : FeatureExtractor({"highpass_residual", patch_height, patch_width, stride,
                        channels, 2 * kKernelCount * channels}) {
  if (patch_height < kKernelSize || patch_width < kKernelSize) {
    throw InvalidArgument("highpass_residual requires patches of at least 3x3");
  }
}

std::unique_ptr<FeatureExtractor> HighPassResidualExtractor::with_patch_shape(
    int h, int w) const {
  return std::make_unique<HighPassResidualExtractor>(h, w, spec_.stride,
                                                     spec_.channels);
}

std::vector<double> HighPassResidualExtractor::compute_features(
    const Image& patch) const {
  const int ch = patch.channels;
  const int oh = patch.height - kKernelSize + 1;
  const int ow = patch.width - kKernelSize + 1;
  const double m = static_cast<double>(oh) * ow;
  std::vector<double> out(spec_.feature_dim, 0.0);
  for (int c = 0; c < ch; ++c) {
    for (int k = 0; k < kKernelCount; ++k) {
      const double* kern = kernel(k);
      double abs_sum = 0.0, sum = 0.0, sq_sum = 0.0;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          double r = 0.0;
          for (int dy = 0; dy < kKernelSize; ++dy) {
            for (int dx = 0; dx < kKernelSize; ++dx) {
              r += kern[dy * kKernelSize + dx] * patch.at(y + dy, x + dx, c);
            }
          }
          abs_sum += std::sqrt(r * r + kSmoothingEps);
          sum += r;
          sq_sum += r * r;
        }
      }
      const double mean = sum / m;
      out[(c * kKernelCount + k) * 2 + 0] = abs_sum / m;
      out[(c * kKernelCount + k) * 2 + 1] = sq_sum / m - mean * mean;
    }
  }
  return out;
}

Image HighPassResidualExtractor::apply_jacobian_transpose(
    const Image& patch, std::span<const double> residual) const {
  const int ch = patch.channels;
  const int oh = patch.height - kKernelSize + 1;
  const int ow = patch.width - kKernelSize + 1;
  const double m = static_cast<double>(oh) * ow;
  Image grad(patch.height, patch.width, ch);
  std::vector<double> resp(static_cast<size_t>(oh) * ow);
  for (int c = 0; c < ch; ++c) {
    for (int k = 0; k < kKernelCount; ++k) {
      const double* kern = kernel(k);
      double sum = 0.0;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          double r = 0.0;
          for (int dy = 0; dy < kKernelSize; ++dy) {
            for (int dx = 0; dx < kKernelSize; ++dx) {
              r += kern[dy * kKernelSize + dx] * patch.at(y + dy, x + dx, c);
            }
          }
          resp[static_cast<size_t>(y) * ow + x] = r;
          sum += r;
        }
      }
      const double mean = sum / m;
      const double r_abs = residual[(c * kKernelCount + k) * 2 + 0];
      const double r_var = residual[(c * kKernelCount + k) * 2 + 1];
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const double r = resp[static_cast<size_t>(y) * ow + x];
          // d(mean smoothed |r|)/dr and d(var)/dr at this response
          const double g = r_abs * (r / std::sqrt(r * r + kSmoothingEps)) / m +
                           r_var * 2.0 * (r - mean) / m;
          for (int dy = 0; dy < kKernelSize; ++dy) {
            for (int dx = 0; dx < kKernelSize; ++dx) {
              grad.at(y + dy, x + dx, c) += g * kern[dy * kKernelSize + dx];
            }
          }
        }
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// DctBandEnergy: orthonormal 8x8 type-II DCT per non-overlapping block, mean
// squared coefficient magnitude over three zig-zag bands of AC coefficients.

namespace {

struct DctTables {
  // t[u][x] = alpha(u) * cos((2x+1) u pi / 16)
  std::array<std::array<double, 8>, 8> t;
  std::array<int, 3> band_sizes;

  DctTables() {
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        t[u][x] = alpha * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    band_sizes = {0, 0, 0};
    for (int u = 0; u < 8; ++u) {
      for (int v = 0; v < 8; ++v) {
        const int b = DctBandEnergyExtractor::band_of(u, v);
        if (b >= 0) ++band_sizes[b];
      }
    }
  }
};

const DctTables& dct_tables() {
  static const DctTables tables;
  return tables;
}

// C = T P T^t for one 8x8 block; W -> T^t W T for the adjoint.
void dct_forward(const double in[8][8], double out[8][8]) {
  const auto& t = dct_tables().t;
  double tmp[8][8];
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += t[u][y] * in[y][x];
      tmp[u][x] = s;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += tmp[u][x] * t[v][x];
      out[u][v] = s;
    }
  }
}

void dct_adjoint(const double in[8][8], double out[8][8]) {
  const auto& t = dct_tables().t;
  double tmp[8][8];
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += t[u][y] * in[u][v];
      tmp[y][v] = s;
    }
  }
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += tmp[y][v] * t[v][x];
      out[y][x] = s;
    }
  }
}

}  // namespace

int DctBandEnergyExtractor::band_of(int u, int v) {
  const int s = u + v;
  if (s == 0) return -1;  // DC
  if (s <= 4) return 0;
  if (s <= 9) return 1;
  return 2;
}

DctBandEnergyExtractor::DctBandEnergyExtractor(int patch_height,
                                               int patch_width, int stride,
                                               int channels)
    : FeatureExtractor({"dct_band_energy", patch_height, patch_width, stride,
                        channels, 3 * channels}) {
  if (patch_height % kBlock != 0 || patch_width % kBlock != 0 ||
      patch_height == 0 || patch_width == 0) {
    throw InvalidArgument(
        "dct_band_energy requires patch dimensions divisible by 8");
  }
}

std::unique_ptr<FeatureExtractor> DctBandEnergyExtractor::with_patch_shape(
    int h, int w) const {
  if (h % kBlock != 0 || w % kBlock != 0) {
    throw ShapeMismatch("dct_band_energy image dims must be divisible by 8");
  }
  return std::make_unique<DctBandEnergyExtractor>(h, w, spec_.stride,
                                                  spec_.channels);
}

std::vector<double> DctBandEnergyExtractor::compute_features(
    const Image& patch) const {
  const int ch = patch.channels;
  const int by = patch.height / kBlock;
  const int bx = patch.width / kBlock;
  const double blocks = static_cast<double>(by) * bx;
  const auto& sizes = dct_tables().band_sizes;
  std::vector<double> out(spec_.feature_dim, 0.0);
  double block[8][8], coef[8][8];
  for (int c = 0; c < ch; ++c) {
    double energy[3] = {0.0, 0.0, 0.0};
    for (int b_y = 0; b_y < by; ++b_y) {
      for (int b_x = 0; b_x < bx; ++b_x) {
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            block[y][x] = patch.at(b_y * 8 + y, b_x * 8 + x, c);
          }
        }
        dct_forward(block, coef);
        for (int u = 0; u < 8; ++u) {
          for (int v = 0; v < 8; ++v) {
            const int band = band_of(u, v);
            if (band >= 0) energy[band] += coef[u][v] * coef[u][v];
          }
        }
      }
    }
    for (int band = 0; band < 3; ++band) {
      out[3 * c + band] = energy[band] / (blocks * sizes[band]);
    }
  }
  return out;
}

Image DctBandEnergyExtractor::apply_jacobian_transpose(
    const Image& patch, std::span<const double> residual) const {
  const int ch = patch.channels;
  const int by = patch.height / kBlock;
  const int bx = patch.width / kBlock;
  const double blocks = static_cast<double>(by) * bx;
  const auto& sizes = dct_tables().band_sizes;
  Image grad(patch.height, patch.width, ch);
  double block[8][8], coef[8][8], w[8][8], g[8][8];
  for (int c = 0; c < ch; ++c) {
    for (int b_y = 0; b_y < by; ++b_y) {
      for (int b_x = 0; b_x < bx; ++b_x) {
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            block[y][x] = patch.at(b_y * 8 + y, b_x * 8 + x, c);
          }
        }
        dct_forward(block, coef);
        for (int u = 0; u < 8; ++u) {
          for (int v = 0; v < 8; ++v) {
            const int band = band_of(u, v);
            w[u][v] = band < 0 ? 0.0
                              : residual[3 * c + band] * 2.0 * coef[u][v] /
                                    (blocks * sizes[band]);
          }
        }
        dct_adjoint(w, g);
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            grad.at(b_y * 8 + y, b_x * 8 + x, c) = g[y][x];
          }
        }
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& id,
                                                 int patch_size, int stride,
                                                 int channels) {
  if (id == "channel_moments") {
    const int p = patch_size > 0 ? patch_size : 32;
    const int s = stride > 0 ? stride : 16;
    return std::make_unique<ChannelMomentsExtractor>(p, p, s, channels);
  }
  if (id == "highpass_residual") {
    const int p = patch_size > 0 ? patch_size : 32;
    const int s = stride > 0 ? stride : 16;
    return std::make_unique<HighPassResidualExtractor>(p, p, s, channels);
  }
  if (id == "dct_band_energy") {
    const int p = patch_size > 0 ? patch_size : 32;
    const int s = stride > 0 ? stride : 32;
    return std::make_unique<DctBandEnergyExtractor>(p, p, s, channels);
  }
  throw InvalidArgument("unknown extractor id: " + id);
}

std::vector<std::string> builtin_extractor_ids() {
  return {"channel_moments", "highpass_residual", "dct_band_energy"};
}

double gradient_error_vs_numeric(const FeatureExtractor& extractor,
                                 const Image& patch,
                                 std::span<const double> target, double h,
                                 const Image& gradient) {
  if (h <= 0.0) throw InvalidArgument("finite-difference step must be > 0");
  auto loss_at = [&](const Image& p) {
    double loss = 0.0;
    const FeatureVector f = extractor.extract(p);
    for (size_t i = 0; i < f.values.size(); ++i) {
      const double d = target[i] - f.values[i];
      loss += d * d;
    }
    return 0.5 * loss;
  };
  Image probe = patch;
  double max_err = 0.0;
  for (size_t i = 0; i < patch.size(); ++i) {
    const double saved = probe.data[i];
    probe.data[i] = saved + h;
    const double lp = loss_at(probe);
    probe.data[i] = saved - h;
    const double lm = loss_at(probe);
    probe.data[i] = saved;
    const double numeric = (lp - lm) / (2.0 * h);
    const double analytic = gradient.data[i];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
  }
  return max_err;
}

double check_gradient(const FeatureExtractor& extractor, const Image& patch,
                      std::span<const double> target, double h) {
  const LossGradient lg = extractor.loss_and_gradient(patch, target);
  return gradient_error_vs_numeric(extractor, patch, target, h, lg.gradient);
}

}  // namespace splicelab
