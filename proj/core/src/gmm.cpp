#include "splicelab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "splicelab/errors.hpp"

namespace splicelab {

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// log N(x | mean, diag(var))
double log_gaussian(std::span<const double> x, const std::vector<double>& mean,
                    const std::vector<double>& var) {
  double s = 0.0;
  for (size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mean[d];
    s += std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d];
  }
  return -0.5 * s;
}

// Deterministic 2-means pass on the raw feature coordinates; the EM that
// follows also runs on the raw features and its per-component covariances
// absorb scale differences between dimensions. Starting centers are the
// farthest-apart pair of points within a seeded subsample (the whole set
// when it is small), which anchors the split on the cloud's dominant
// separation; Lloyd iterations then refine it.
struct KMeansInit {
  std::vector<int> assignment;
  std::array<int, 2> counts;
};

KMeansInit two_means(const std::vector<std::vector<double>>& samples,
                     std::uint64_t seed) {
  const int n = static_cast<int>(samples.size());
  const size_t dim = samples[0].size();

  // Farthest pair within a seeded subsample of up to 64 points.
  constexpr int kSeedSample = 64;
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  if (n > kSeedSample) {
    std::mt19937_64 rng(seed);
    std::vector<int> picked;
    picked.reserve(kSeedSample);
    std::sample(pool.begin(), pool.end(), std::back_inserter(picked),
                kSeedSample, rng);
    pool = std::move(picked);
  }
  int seed_a = pool[0], seed_b = pool.back();
  double best = -1.0;
  for (size_t i = 0; i < pool.size(); ++i) {
    for (size_t j = i + 1; j < pool.size(); ++j) {
      const double d = sq_distance(samples[pool[i]], samples[pool[j]]);
      if (d > best) {
        best = d;
        seed_a = pool[i];
        seed_b = pool[j];
      }
    }
  }

  KMeansInit init;
  init.assignment.assign(n, 0);
  std::array<std::vector<double>, 2> centers = {samples[seed_a],
                                                samples[seed_b]};
  init.counts = {0, 0};
  for (int i = 0; i < n; ++i) {
    const double d0 = sq_distance(samples[i], centers[0]);
    const double d1 = sq_distance(samples[i], centers[1]);
    const int a = d1 < d0 ? 1 : 0;
    init.assignment[i] = a;
    ++init.counts[a];
  }
  for (int k = 0; k < 2; ++k) {
    std::fill(centers[k].begin(), centers[k].end(), 0.0);
  }
  for (int i = 0; i < n; ++i) {
    for (size_t d = 0; d < dim; ++d) {
      centers[init.assignment[i]][d] += samples[i][d];
    }
  }
  for (int k = 0; k < 2; ++k) {
    for (size_t d = 0; d < dim; ++d) centers[k][d] /= init.counts[k];
  }
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    init.counts = {0, 0};
    for (int i = 0; i < n; ++i) {
      const double d0 = sq_distance(samples[i], centers[0]);
      const double d1 = sq_distance(samples[i], centers[1]);
      const int a = d1 < d0 ? 1 : 0;  // ties go to component 0
      if (a != init.assignment[i]) changed = true;
      init.assignment[i] = a;
      ++init.counts[a];
    }
    // Keep both clusters populated: move the point farthest from the
    // populated center into the empty one.
    for (int k = 0; k < 2; ++k) {
      if (init.counts[k] == 0) {
        int far_i = -1;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = sq_distance(samples[i], centers[1 - k]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        init.assignment[far_i] = k;
        ++init.counts[k];
        --init.counts[1 - k];
        changed = true;
      }
    }
    for (int k = 0; k < 2; ++k) {
      std::fill(centers[k].begin(), centers[k].end(), 0.0);
    }
    for (int i = 0; i < n; ++i) {
      for (size_t d = 0; d < dim; ++d) {
        centers[init.assignment[i]][d] += samples[i][d];
      }
    }
    for (int k = 0; k < 2; ++k) {
      for (size_t d = 0; d < dim; ++d) centers[k][d] /= init.counts[k];
    }
    if (!changed && iter > 0) break;
  }
  return init;
}

}  // namespace

GmmModel fit_gmm(const std::vector<std::vector<double>>& samples,
                 std::uint64_t seed) {
  const int n = static_cast<int>(samples.size());
  if (n < 4) throw InvalidArgument("fit_gmm requires at least 4 samples");
  const size_t dim = samples[0].size();
  if (dim < 1) throw InvalidArgument("fit_gmm requires dimension >= 1");
  for (const auto& s : samples) {
    if (s.size() != dim) {
      throw DimensionMismatch("fit_gmm samples must share one dimension");
    }
  }

  GmmModel model;
  const bool all_identical = std::all_of(
      samples.begin(), samples.end(),
      [&](const std::vector<double>& s) { return s == samples[0]; });
  if (all_identical) {
    model.degenerate = true;
    model.means = {samples[0], samples[0]};
    model.variances[0].assign(dim, kVarianceFloor);
    model.variances[1].assign(dim, kVarianceFloor);
    return model;
  }

  // Pooled per-dimension sample variance; scales the floor applied to the
  // initialization variances below.
  std::vector<double> pooled(dim, 0.0);
  {
    std::vector<double> grand(dim, 0.0);
    for (const auto& s : samples) {
      for (size_t d = 0; d < dim; ++d) grand[d] += s[d];
    }
    for (size_t d = 0; d < dim; ++d) grand[d] /= n;
    for (const auto& s : samples) {
      for (size_t d = 0; d < dim; ++d) {
        const double diff = s[d] - grand[d];
        pooled[d] += diff * diff;
      }
    }
    for (size_t d = 0; d < dim; ++d) pooled[d] /= n;
  }

  const KMeansInit init = two_means(samples, seed);
  for (int k = 0; k < 2; ++k) {
    model.weights[k] = static_cast<double>(init.counts[k]) / n;
    model.means[k].assign(dim, 0.0);
    model.variances[k].assign(dim, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    const int k = init.assignment[i];
    for (size_t d = 0; d < dim; ++d) model.means[k][d] += samples[i][d];
  }
  for (int k = 0; k < 2; ++k) {
    for (size_t d = 0; d < dim; ++d) model.means[k][d] /= init.counts[k];
  }
  for (int i = 0; i < n; ++i) {
    const int k = init.assignment[i];
    for (size_t d = 0; d < dim; ++d) {
      const double diff = samples[i][d] - model.means[k][d];
      model.variances[k][d] += diff * diff;
    }
  }
  for (int k = 0; k < 2; ++k) {
    for (size_t d = 0; d < dim; ++d) {
      model.variances[k][d] =
          std::max({model.variances[k][d] / init.counts[k], kVarianceFloor,
                    kRelVarianceFloor * pooled[d]});
    }
  }

  std::vector<double> resp(static_cast<size_t>(n) * 2);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kEmMaxIterations; ++iter) {
    // E-step with the log-sum-exp trick; also accumulates the likelihood.
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double lp[2];
      for (int k = 0; k < 2; ++k) {
        lp[k] = std::log(model.weights[k]) +
                log_gaussian(samples[i], model.means[k], model.variances[k]);
      }
      const double mx = std::max(lp[0], lp[1]);
      const double denom = std::exp(lp[0] - mx) + std::exp(lp[1] - mx);
      ll += mx + std::log(denom);
      for (int k = 0; k < 2; ++k) {
        resp[static_cast<size_t>(i) * 2 + k] = std::exp(lp[k] - mx) / denom;
      }
    }
    model.log_likelihood_trace.push_back(ll);
    model.iterations = iter + 1;
    if (iter > 0 &&
        std::abs(ll - prev_ll) < kEmRelTolerance * std::max(1.0, std::abs(ll))) {
      break;
    }
    prev_ll = ll;

    // M-step
    for (int k = 0; k < 2; ++k) {
      double nk = 0.0;
      std::vector<double> mean(dim, 0.0);
      for (int i = 0; i < n; ++i) {
        const double r = resp[static_cast<size_t>(i) * 2 + k];
        nk += r;
        for (size_t d = 0; d < dim; ++d) mean[d] += r * samples[i][d];
      }
      nk = std::max(nk, 1e-12);
      for (size_t d = 0; d < dim; ++d) mean[d] /= nk;
      std::vector<double> var(dim, 0.0);
      for (int i = 0; i < n; ++i) {
        const double r = resp[static_cast<size_t>(i) * 2 + k];
        for (size_t d = 0; d < dim; ++d) {
          const double diff = samples[i][d] - mean[d];
          var[d] += r * diff * diff;
        }
      }
      for (size_t d = 0; d < dim; ++d) {
        var[d] = std::max(var[d] / nk, kVarianceFloor);
      }
      model.weights[k] = nk / n;
      model.means[k] = std::move(mean);
      model.variances[k] = std::move(var);
    }
    const double wsum = model.weights[0] + model.weights[1];
    model.weights[0] /= wsum;
    model.weights[1] /= wsum;
  }
  return model;
}

std::array<double, 2> gmm_posterior(const GmmModel& model,
                                    std::span<const double> x) {
  double lp[2];
  for (int k = 0; k < 2; ++k) {
    lp[k] = std::log(model.weights[k]) +
            log_gaussian(x, model.means[k], model.variances[k]);
  }
  const double mx = std::max(lp[0], lp[1]);
  const double e0 = std::exp(lp[0] - mx);
  const double e1 = std::exp(lp[1] - mx);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

int minority_component(const GmmModel& model) {
  return model.weights[1] < model.weights[0] ? 1 : 0;
}

}  // namespace splicelab
