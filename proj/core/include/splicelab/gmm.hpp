#pragma once

// Two-component Gaussian mixture with diagonal covariances, fit by EM.
//
// Initialization is a deterministic 2-means pass seeded by the farthest
// pair within a seeded sample of the data, so a fixed seed reproduces the
// fit bit-for-bit. Variances are floored at kVarianceFloor to keep the
// likelihood bounded on near-duplicate samples.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace splicelab {

struct GmmModel {
  std::array<double, 2> weights{0.5, 0.5};
  std::array<std::vector<double>, 2> means;
  std::array<std::vector<double>, 2> variances;
  std::vector<double> log_likelihood_trace;  // one entry per EM iteration
  bool degenerate = false;
  int iterations = 0;

  int dim() const { return static_cast<int>(means[0].size()); }
};

inline constexpr double kVarianceFloor = 1e-6;
/// Additional per-dimension floor applied to the initialization variances
/// only, relative to the pooled sample variance of that dimension. A tiny
/// initial cluster would otherwise start EM as a near-delta spike that
/// immediately recaptures the same few points.
inline constexpr double kRelVarianceFloor = 1e-3;
inline constexpr double kEmRelTolerance = 1e-8;
inline constexpr int kEmMaxIterations = 500;

/// Fits the mixture to `samples` (each of equal dimension >= 1). Requires at
/// least 4 samples. If every sample is identical the returned model has both
/// components at that sample with floor variance and `degenerate` set.
GmmModel fit_gmm(const std::vector<std::vector<double>>& samples,
                 std::uint64_t seed);

/// Posterior responsibilities of both components for one sample.
std::array<double, 2> gmm_posterior(const GmmModel& model,
                                    std::span<const double> x);

/// Index of the component with the smaller mixing weight (ties -> 0).
int minority_component(const GmmModel& model);

}  // namespace splicelab
