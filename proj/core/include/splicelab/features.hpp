#pragma once

// Pluggable patch-to-vector feature maps with analytic gradients.
//
// Each extractor is a pure, deterministic function from a pixel patch to a
// fixed-dimension feature vector, plus the exact gradient of the Euclidean
// loss 0.5 * ||target - f(patch)||^2 with respect to the patch pixels.
// Three built-ins ship with fixed constants:
//
//   channel_moments    per channel {mean, variance, third central moment}
//   highpass_residual  four high-pass kernels, per kernel {mean smoothed
//                      |response|, response variance}
//   dct_band_energy    8x8 block DCT, mean energy in low/mid/high
//                      zig-zag bands
//
// All of them are differentiable everywhere; absolute values are smoothed
// as sqrt(x^2 + eps).

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "splicelab/image.hpp"

namespace splicelab {

struct FeatureVector {
  std::vector<double> values;
  std::string extractor_id;
};

struct ExtractorSpec {
  std::string id;
  int patch_height = 0;
  int patch_width = 0;
  int stride = 0;
  int channels = 3;
  int feature_dim = 0;
};

struct LossGradient {
  double loss = 0.0;
  Image gradient;  // patch-shaped
};

class FeatureExtractor {
public:
  virtual ~FeatureExtractor() = default;

  const ExtractorSpec& spec() const { return spec_; }
  const std::string& id() const { return spec_.id; }
  int feature_dim() const { return spec_.feature_dim; }

  FeatureVector extract(const Image& patch) const;

  /// loss = 0.5 * ||target - f(patch)||^2, gradient = J^T (f(patch) - target).
  LossGradient loss_and_gradient(const Image& patch,
                                 std::span<const double> target) const;

  /// Same-kind extractor accepting (h, w) patches; used for whole-image
  /// attacks.
  virtual std::unique_ptr<FeatureExtractor> with_patch_shape(int h,
                                                             int w) const = 0;

  PatchGrid grid_for(int image_height, int image_width) const;

protected:
  explicit FeatureExtractor(ExtractorSpec spec) : spec_(std::move(spec)) {}

  virtual std::vector<double> compute_features(const Image& patch) const = 0;
  /// Returns J^T residual, where J is the feature Jacobian at `patch`.
  virtual Image apply_jacobian_transpose(
      const Image& patch, std::span<const double> residual) const = 0;

  void check_patch(const Image& patch) const;

  ExtractorSpec spec_;
};

class ChannelMomentsExtractor final : public FeatureExtractor {
public:
  ChannelMomentsExtractor(int patch_height, int patch_width, int stride,
                          int channels);
  std::unique_ptr<FeatureExtractor> with_patch_shape(int h, int w) const override;

protected:
  std::vector<double> compute_features(const Image& patch) const override;
  Image apply_jacobian_transpose(const Image& patch,
                                 std::span<const double> residual) const override;
};

class HighPassResidualExtractor final : public FeatureExtractor {
public:
  static constexpr int kKernelCount = 4;
  static constexpr int kKernelSize = 3;
  static constexpr double kSmoothingEps = 1e-6;

  HighPassResidualExtractor(int patch_height, int patch_width, int stride,
                            int channels);
  std::unique_ptr<FeatureExtractor> with_patch_shape(int h, int w) const override;

  /// 3x3 kernel coefficients, row-major; k in [0, kKernelCount).
  static const double* kernel(int k);

protected:
  std::vector<double> compute_features(const Image& patch) const override;
  Image apply_jacobian_transpose(const Image& patch,
                                 std::span<const double> residual) const override;
};

class DctBandEnergyExtractor final : public FeatureExtractor {
public:
  static constexpr int kBlock = 8;

  DctBandEnergyExtractor(int patch_height, int patch_width, int stride,
                         int channels);
  std::unique_ptr<FeatureExtractor> with_patch_shape(int h, int w) const override;

  /// Band index (0 = low, 1 = mid, 2 = high) for AC coefficient (u, v),
  /// split along zig-zag anti-diagonals; -1 for the DC coefficient.
  static int band_of(int u, int v);

protected:
  std::vector<double> compute_features(const Image& patch) const override;
  Image apply_jacobian_transpose(const Image& patch,
                                 std::span<const double> residual) const override;
};

/// Extractor registry. Ids: channel_moments, highpass_residual,
/// dct_band_energy. Zero patch/stride selects the extractor's defaults
/// (32/16, 32/16, 32/32).
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& id,
                                                 int patch_size = 0,
                                                 int stride = 0,
                                                 int channels = 3);
std::vector<std::string> builtin_extractor_ids();

/// Max relative error between `gradient` and a central-difference estimate
/// of d loss / d pixel with step h. The denominator per entry is
/// max(|analytic|, |numeric|, 1e-8).
double gradient_error_vs_numeric(const FeatureExtractor& extractor,
                                 const Image& patch,
                                 std::span<const double> target, double h,
                                 const Image& gradient);

/// Convenience: checks the extractor's own analytic gradient.
double check_gradient(const FeatureExtractor& extractor, const Image& patch,
                      std::span<const double> target, double h);

}  // namespace splicelab
