#include "splicelab/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "splicelab/errors.hpp"
#include "splicelab/features.hpp"
#include "splicelab/seeding.hpp"

namespace splicelab {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Seed lanes inside a single generation; keeps host/donor/placement streams
// independent of each other while all flowing from the spec seed.
constexpr std::uint64_t kLaneHostContent = 101;
constexpr std::uint64_t kLaneDonorContent = 102;
constexpr std::uint64_t kLaneHostNoise = 103;
constexpr std::uint64_t kLaneDonorNoise = 104;
constexpr std::uint64_t kLanePlacement = 105;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// 3x3 binomial low-pass with replicate borders.
void binomial_blur(Image& image) {
  static const double k[3] = {0.25, 0.5, 0.25};
  Image tmp(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xs = std::clamp(x + dx, 0, image.width - 1);
          acc += k[dx + 1] * image.at(y, xs, c);
        }
        tmp.at(y, x, c) = acc;
      }
    }
  }
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int ys = std::clamp(y + dy, 0, image.height - 1);
          acc += k[dy + 1] * tmp.at(ys, x, c);
        }
        image.at(y, x, c) = acc;
      }
    }
  }
}

struct ShapePlacement {
  Mask mask;
  std::int64_t area = 0;
};

// Rectangle sides and corners prefer multiples of 32 px — the coarsest
// default analysis stride — so region borders fall between analysis
// windows instead of across them; localization quality then reflects the
// pipeline statistics rather than border-mixing artifacts. The snap
// relaxes (32 -> 16 -> 8 -> free) whenever the coarse quantization cannot
// satisfy the area tolerance.
constexpr int kAlignQuantum = 32;

int snap_side(double raw, int quantum, int lo, int hi) {
  int v = quantum * static_cast<int>(std::lround(raw / quantum));
  v = std::max(v, quantum);
  return std::clamp(v, lo, hi);
}

// Rasterizes one candidate splice region. The area multiplier lets retry
// attempts shrink the shape while staying inside the fraction tolerance.
ShapePlacement place_shape(const SpliceSpec& spec, double area_multiplier,
                           std::mt19937_64& rng) {
  ShapePlacement out;
  out.mask = Mask(spec.size, spec.size);
  const double target_area =
      spec.splice_fraction * spec.size * spec.size * area_multiplier;
  const double band = 0.2 * spec.splice_fraction * spec.size * spec.size;
  const double aspect = std::exp(uniform(rng, -0.8, 0.8));

  if (spec.shape == SpliceShape::rectangle) {
    const int lo = std::min(8, std::max(2, spec.size / 4));
    const int hi = std::max(lo, spec.size - kAlignQuantum);
    const double w_raw = std::sqrt(target_area * aspect);
    int w = 0, h = 0;
    bool sized = false;
    for (const int wq : {32, 16, 8, 1}) {
      const int wc = snap_side(w_raw, wq, lo, hi);
      const double h_target = target_area / wc;
      for (const int hq : {32, 16, 8, 1}) {
        const int hc = snap_side(h_target, hq, lo, hi);
        const double area = static_cast<double>(wc) * hc;
        if (std::abs(area - spec.splice_fraction * spec.size * spec.size) <=
            band) {
          w = wc;
          h = hc;
          sized = true;
          break;
        }
      }
      if (sized) break;
    }
    if (!sized) {
      w = std::clamp(static_cast<int>(std::lround(w_raw)), 2, spec.size - 2);
      h = std::clamp(static_cast<int>(std::lround(target_area / w)), 2,
                     spec.size - 2);
    }
    auto place_origin = [&](int extent) {
      const int max_origin = spec.size - extent;
      if (max_origin >= kAlignQuantum) {
        const int slots = max_origin / kAlignQuantum + 1;
        const int k = static_cast<int>(
            std::floor(uniform(rng, 0.0, static_cast<double>(slots))));
        return kAlignQuantum * std::min(k, slots - 1);
      }
      return static_cast<int>(
          std::floor(uniform(rng, 0.0, static_cast<double>(max_origin + 1))));
    };
    const int y0 = place_origin(h);
    const int x0 = place_origin(w);
    for (int y = y0; y < std::min(y0 + h, spec.size); ++y) {
      for (int x = x0; x < std::min(x0 + w, spec.size); ++x) {
        out.mask.at(y, x) = 1;
      }
    }
  } else {
    // Semi-axes solve pi*ax*ay = target_area with the sampled aspect ratio.
    double ax = std::sqrt(target_area * aspect / kPi);
    double ay = target_area / (kPi * ax);
    const double max_semi = 0.5 * spec.size - 1.0;
    ax = std::clamp(ax, 1.5, max_semi);
    ay = std::clamp(ay, 1.5, max_semi);
    const double cx = uniform(rng, ax, spec.size - ax);
    const double cy = uniform(rng, ay, spec.size - ay);
    for (int y = 0; y < spec.size; ++y) {
      for (int x = 0; x < spec.size; ++x) {
        const double dx = (x + 0.5 - cx) / ax;
        const double dy = (y + 0.5 - cy) / ay;
        if (dx * dx + dy * dy <= 1.0) out.mask.at(y, x) = 1;
      }
    }
  }
  for (unsigned char v : out.mask.values) out.area += v;
  return out;
}

// Distinct (patch, stride) settings used by the built-in extractors at their
// defaults; a generated sample must leave at least one fully authentic patch
// on every one of these grids.
std::vector<std::array<int, 3>> default_grid_settings() {
  std::vector<std::array<int, 3>> settings;
  for (const std::string& id : builtin_extractor_ids()) {
    const ExtractorSpec s = make_extractor(id)->spec();
    std::array<int, 3> entry{s.patch_height, s.patch_width, s.stride};
    if (std::find(settings.begin(), settings.end(), entry) == settings.end()) {
      settings.push_back(entry);
    }
  }
  return settings;
}

bool has_authentic_patch_on_default_grids(const Mask& mask) {
  for (const auto& [ph, pw, stride] : default_grid_settings()) {
    if (ph > mask.height || pw > mask.width) return false;
    const PatchGrid grid =
        build_patch_grid(mask.height, mask.width, ph, pw, stride, stride);
    bool found = false;
    for (const PatchRect& rect : grid.patches) {
      if (is_patch_authentic(mask, rect)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

CameraPipeline stock_pipeline(const std::string& id) {
  if (id == "cam_a") return CameraPipeline{"cam_a", 1.0, false, 1.0, 0};
  if (id == "cam_b") return CameraPipeline{"cam_b", 6.0, true, 1.2, 0};
  if (id == "identity") return CameraPipeline{"identity", 0.0, false, 1.0, 0};
  throw InvalidArgument("unknown camera pipeline id: " + id);
}

const char* to_string(SpliceShape s) {
  return s == SpliceShape::rectangle ? "rectangle" : "ellipse";
}

SpliceShape splice_shape_from_string(const std::string& s) {
  if (s == "rectangle") return SpliceShape::rectangle;
  if (s == "ellipse") return SpliceShape::ellipse;
  throw InvalidArgument("unknown splice shape: " + s);
}

Image render_base(std::uint64_t seed, int height, int width, int channels) {
  if (height < 1 || width < 1) {
    throw InvalidArgument("render_base: dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("render_base: channels must be 1 or 3");
  }
  std::mt19937_64 rng(splitmix64(seed));
  Image out(height, width, channels);

  // A scene is a pair of soft-edged regions ("zones") per aspect, overlaid
  // with coarse sinusoidal texture and a sparse field of small high-contrast
  // "stamps" (micro-edges). Sparse stamps are the load-bearing choice: at low
  // site density the mean absolute response of any small high-pass filter is
  // far below the dense-noise value for the same response variance, so the
  // stamp mix can be tuned to place the authentic windows' mean-absolute
  // statistics right where a dense sensor-noise floor would put them, while
  // the response variance (which rides on total stamp power) stays several
  // times higher. Zone splits trade stamp orientation, stamp density, and
  // stamp amplitude-versus-count between soft regions, so same-camera
  // windows populate a few well-separated statistical modes per aspect --
  // the analogue of real scenes mixing sky, foliage, and fabric -- instead
  // of forming one homogeneous blob.
  struct ZoneSplit {
    double nx, ny, offset, softness;
    // 0 near one side of the boundary line, 1 near the other.
    double blend(int x, int y) const {
      return 0.5 * (1.0 + std::tanh((nx * x + ny * y - offset) / softness));
    }
  };
  auto make_zone = [&](double softness) {
    const double angle = uniform(rng, 0.0, kPi);
    const double nx = std::cos(angle), ny = std::sin(angle);
    // Place the boundary in the middle band of the frame so both zones are
    // always well populated.
    const double c0 = 0.0, c1 = nx * (width - 1), c2 = ny * (height - 1),
                 c3 = nx * (width - 1) + ny * (height - 1);
    const double lo = std::min({c0, c1, c2, c3});
    const double hi = std::max({c0, c1, c2, c3});
    const double offset = lo + uniform(rng, 0.36, 0.64) * (hi - lo);
    return ZoneSplit{nx, ny, offset, softness};
  };
  const ZoneSplit zone_level = make_zone(6.0);   // brightness modes
  const ZoneSplit zone_orient = make_zone(9.0);  // x- vs y-oriented stamps
  const ZoneSplit zone_qual = make_zone(6.0);    // few strong vs many weak stamps
  const ZoneSplit zone_dens = make_zone(6.0);    // overall stamp density

  struct Wave {
    double amp, fx, fy, phase;
    double mod_depth, mfx, mfy, mphase;
    int group;  // 0 coarse, 1 mid
    double eval(int x, int y) const {
      const double local =
          amp * (1.0 + mod_depth * std::sin(2.0 * kPi * (mfx * x + mfy * y) +
                                            mphase));
      return local * std::sin(2.0 * kPi * (fx * x + fy * y) + phase);
    }
  };
  // Amplitude envelope for the grain fields: a gentle large-scale drift,
  // like the sinusoidal modulation above.
  struct GrainEnv {
    double amp, mod_depth, mfx, mfy, mphase;
    double local(int x, int y) const {
      return amp * (1.0 + mod_depth * std::sin(2.0 * kPi * (mfx * x + mfy * y) +
                                               mphase));
    }
  };
  for (int c = 0; c < channels; ++c) {
    const double base_mid = uniform(rng, 138.0, 146.0);
    const double base_gap = uniform(rng, 24.0, 30.0);
    const double gx = uniform(rng, -8.0, 8.0);
    const double gy = uniform(rng, -8.0, 8.0);
    // Two coarse sine waves carry the low-frequency texture energy. Their
    // frequencies sit low enough that most of the amplitude survives the
    // donor pipeline's low-pass, which keeps the sine contribution to
    // mean-absolute residual statistics nearly camera-independent; the
    // stamp mix below absorbs the small remaining difference.
    constexpr int kWaves = 2;
    std::array<Wave, kWaves> waves;
    auto sign = [&] { return uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0; };
    for (int s = 0; s < kWaves; ++s) {
      Wave& w = waves[s];
      w.group = 0;
      w.amp = uniform(rng, 8.0, 11.5);
      const double f_sum = uniform(rng, 0.16, 0.26);
      // Split f_sum between the axes, keeping each below Nyquist.
      const double t = uniform(rng, 0.2, 0.8);
      w.fx = f_sum * t;
      w.fy = f_sum * (1.0 - t) * sign();
      w.phase = uniform(rng, 0.0, 2.0 * kPi);
      // Gentle within-zone drift of texture strength; periods sit well
      // above the analysis-window scale.
      w.mod_depth = uniform(rng, 0.15, 0.25);
      const double mod_freq = uniform(rng, 0.004, 0.009);
      const double mod_angle = uniform(rng, 0.0, kPi);
      w.mfx = mod_freq * std::cos(mod_angle);
      w.mfy = mod_freq * std::sin(mod_angle);
      w.mphase = uniform(rng, 0.0, 2.0 * kPi);
    }
    // Two mid-frequency axis-aligned waves ride the same orientation split
    // as the bars below: the x-wave fades in where horizontal structure
    // dominates, the y-wave where vertical does. The band sits where the
    // weak-sensor low-pass removes nearly all of it, so it fills the mid
    // transform bands of strong-sensor content the way that sensor's own
    // noise floor fills them on the weak one.
    struct MidWave { double amp, f, phase; };
    const MidWave mid_x{uniform(rng, 10.0, 13.0), uniform(rng, 0.34, 0.46),
                        uniform(rng, 0.0, 2.0 * kPi)};
    const MidWave mid_y{uniform(rng, 10.0, 13.0), uniform(rng, 0.34, 0.46),
                        uniform(rng, 0.0, 2.0 * kPi)};
    // Sparse stamp field. Four stamp shapes cover the directions a small
    // high-pass analysis can distinguish: a horizontally sharp bar (three
    // identical rows of -1 2 -1, vertically smooth), its transpose, a 2x2
    // checker, and a 2x2 diagonal pair. Expected per-site densities
    // (density x amplitude per shape) are tuned so the mean absolute
    // response of each of the four small high-pass kernels over authentic
    // content, including the sine contribution above, lands where dense
    // Gaussian noise of the strong-sensor pipeline would put it; response
    // variances then sit several times above that pipeline's own floor.
    // Zones perturb the mix symmetrically about the tuned point:
    // orientation trades bar direction, quality trades amplitude against
    // count at constant density x amplitude, density scales site counts.
    const GrainEnv env = [&] {
      GrainEnv e;
      e.amp = 1.0;
      e.mod_depth = uniform(rng, 0.08, 0.14);
      const double mod_freq = uniform(rng, 0.004, 0.009);
      const double mod_angle = uniform(rng, 0.0, kPi);
      e.mfx = mod_freq * std::cos(mod_angle);
      e.mfy = mod_freq * std::sin(mod_angle);
      e.mphase = uniform(rng, 0.0, 2.0 * kPi);
      return e;
    }();
    constexpr double kBetaDir = 0.6500;   // bar density x amplitude, both bars
    constexpr double kBetaChecker = 0.5000;
    constexpr double kBetaDiagonal = 1.9000;
    const double amp_bar = uniform(rng, 9.2, 11.9);
    const double amp_checker = uniform(rng, 11.9, 14.5);
    const double amp_diagonal = uniform(rng, 13.2, 15.8);
    std::vector<double> tex(static_cast<size_t>(height) * width, 0.0);
    auto add = [&](int px, int py, double val) {
      if (px >= 0 && px < width && py >= 0 && py < height) {
        tex[static_cast<size_t>(py) * width + px] += val;
      }
    };
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u_site = uniform(rng, 0.0, 1.0);
        const double b_or = 0.05 + 0.9 * zone_orient.blend(x, y);
        const double qual = 0.9 + 0.2 * zone_qual.blend(x, y);
        const double dens = 0.925 + 0.15 * zone_dens.blend(x, y);
        const double scale = dens / qual;
        const double p_hbar = kBetaDir * b_or / amp_bar * scale;
        const double p_vbar = kBetaDir * (1.0 - b_or) / amp_bar * scale;
        const double p_checker = kBetaChecker / amp_checker * scale;
        const double p_diagonal = kBetaDiagonal / amp_diagonal * scale;
        if (u_site >= p_hbar + p_vbar + p_checker + p_diagonal) continue;
        const double s = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        const double jitter = uniform(rng, 0.85, 1.15);
        const double drift = 1.0 + env.mod_depth *
            std::sin(2.0 * kPi * (env.mfx * x + env.mfy * y) + env.mphase);
        if (u_site < p_hbar) {
          const double a = s * jitter * drift * qual * amp_bar;
          for (int dy = -1; dy <= 1; ++dy) {
            add(x - 1, y + dy, -a);
            add(x, y + dy, 2.0 * a);
            add(x + 1, y + dy, -a);
          }
        } else if (u_site < p_hbar + p_vbar) {
          const double a = s * jitter * drift * qual * amp_bar;
          for (int dx = -1; dx <= 1; ++dx) {
            add(x + dx, y - 1, -a);
            add(x + dx, y, 2.0 * a);
            add(x + dx, y + 1, -a);
          }
        } else if (u_site < p_hbar + p_vbar + p_checker) {
          const double a = s * jitter * drift * qual * amp_checker;
          add(x, y, a);
          add(x + 1, y, -a);
          add(x, y + 1, -a);
          add(x + 1, y + 1, a);
        } else {
          const double a = s * jitter * drift * qual * amp_diagonal;
          add(x, y, a);
          add(x + 1, y + 1, -a);
        }
      }
    }
    // Small smooth luminance drift inside each brightness zone.
    constexpr int kLumWaves = 2;
    std::array<Wave, kLumWaves> lum;
    for (int s = 0; s < kLumWaves; ++s) {
      Wave& w = lum[s];
      w.amp = uniform(rng, 6.5, 9.5);
      const double freq = uniform(rng, 0.004, 0.011);
      const double angle = uniform(rng, 0.0, kPi);
      w.fx = freq * std::cos(angle);
      w.fy = freq * std::sin(angle);
      w.phase = uniform(rng, 0.0, 2.0 * kPi);
      w.mod_depth = 0.0;
      w.mfx = w.mfy = w.mphase = 0.0;
      w.group = -1;
    }

    for (int y = 0; y < height; ++y) {
      const double v = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
      for (int x = 0; x < width; ++x) {
        const double u = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
        const double b_level = zone_level.blend(x, y);
        double value =
            base_mid + base_gap * (b_level - 0.5) + gx * u + gy * v;
        for (const Wave& w : lum) value += w.eval(x, y);
        for (const Wave& w : waves) value += w.eval(x, y);
        const double b_mid = 0.05 + 0.9 * zone_orient.blend(x, y);
        value += 2.0 * b_mid * mid_x.amp *
                     std::sin(2.0 * kPi * mid_x.f * x + mid_x.phase) +
                 2.0 * (1.0 - b_mid) * mid_y.amp *
                     std::sin(2.0 * kPi * mid_y.f * y + mid_y.phase);
        value += tex[static_cast<size_t>(y) * width + x];
        out.at(y, x, c) = std::clamp(value, 0.0, 255.0);
      }
    }
  }
  return out;
}

Image apply_pipeline(const Image& image, const CameraPipeline& pipeline,
                     std::uint64_t seed) {
  if (pipeline.noise_sigma < 0.0) {
    throw InvalidArgument("apply_pipeline: noise_sigma must be >= 0");
  }
  if (pipeline.gamma <= 0.0) {
    throw InvalidArgument("apply_pipeline: gamma must be > 0");
  }
  Image out = image;
  if (pipeline.blur) binomial_blur(out);
  if (pipeline.gamma != 1.0) {
    for (double& v : out.data) {
      v = 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, pipeline.gamma);
    }
  }
  if (pipeline.noise_sigma > 0.0) {
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> noise(0.0, pipeline.noise_sigma);
    for (double& v : out.data) v += noise(rng);
  }
  if (pipeline.quant_step > 0) {
    const double q = pipeline.quant_step;
    const double max_index = std::floor(255.0 / q);
    for (double& v : out.data) {
      v = q * std::clamp(std::round(v / q), 0.0, max_index);
    }
  }
  clip_in_place(out);
  return out;
}

SpliceSample make_splice(const SpliceSpec& spec) {
  if (spec.size < 1) throw InvalidArgument("make_splice: size must be >= 1");
  if (spec.channels != 1 && spec.channels != 3) {
    throw InvalidArgument("make_splice: channels must be 1 or 3");
  }
  if (!(spec.splice_fraction > 0.0 && spec.splice_fraction < 1.0)) {
    throw InvalidArgument("make_splice: splice_fraction must be in (0,1)");
  }

  const CameraPipeline host_pipe = stock_pipeline(spec.host_pipeline);
  const CameraPipeline donor_pipe = stock_pipeline(spec.donor_pipeline);

  const Image host = quantize_image(apply_pipeline(
      render_base(derive_seed(spec.seed, 0, kLaneHostContent), spec.size,
                  spec.size, spec.channels),
      host_pipe, derive_seed(spec.seed, 0, kLaneHostNoise)));
  const Image donor = quantize_image(apply_pipeline(
      render_base(derive_seed(spec.seed, 0, kLaneDonorContent), spec.size,
                  spec.size, spec.channels),
      donor_pipe, derive_seed(spec.seed, 0, kLaneDonorNoise)));

  const double total = static_cast<double>(spec.size) * spec.size;
  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(
        splitmix64(derive_seed(spec.seed, attempt, kLanePlacement)));
    // Later attempts shrink toward the lower edge of the +/-20% fraction
    // tolerance, which frees grid cells for the authentic-patch constraint.
    const double multiplier = 1.0 - 0.018 * attempt;
    const ShapePlacement placement = place_shape(spec, multiplier, rng);

    const double fraction = placement.area / total;
    if (std::abs(fraction - spec.splice_fraction) >
        0.2 * spec.splice_fraction) {
      continue;
    }
    if (!has_authentic_patch_on_default_grids(placement.mask)) continue;

    SpliceSample sample;
    sample.mask = placement.mask;
    sample.host_only = host;
    sample.image = host;
    for (int y = 0; y < spec.size; ++y) {
      for (int x = 0; x < spec.size; ++x) {
        if (!placement.mask.at(y, x)) continue;
        for (int c = 0; c < spec.channels; ++c) {
          sample.image.at(y, x, c) = donor.at(y, x, c);
        }
      }
    }
    return sample;
  }
  throw InfeasibleSpec(
      "make_splice: could not place a splice satisfying the fraction "
      "tolerance and the authentic-patch constraint in 10 attempts");
}

}  // namespace splicelab
