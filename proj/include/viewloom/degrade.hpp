#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "viewloom/image.hpp"
#include "viewloom/random.hpp"

namespace viewloom {

inline constexpr int kSequenceLength = 25;

// A cutout reference with normalized placement; the pixel geometry is
// resolved against the target frame at composite time.
struct OccluderSpec {
  std::size_t cutout_id = 0;
  double center_y = 0.5;  // normalized [0, 1] within the frame
  double center_x = 0.5;
  double scale = 0.2;  // longer cutout side as a fraction of min frame side
};

// One frame's degradation recipe. Factor 1 / shift 0 / sigma 0 / length 0
// mean "leave alone" for the respective stage.
struct DegradationParams {
  double brightness_factor = 1.0;
  double saturation_factor = 1.0;
  double hue_shift_deg = 0.0;
  double sharpness_factor = 1.0;
  double noise_sigma = 0.0;  // 8-bit units
  double motion_blur_length = 0.0;  // px
  double motion_blur_angle_deg = 0.0;
  double gaussian_blur_sigma = 0.0;
  std::vector<OccluderSpec> occluders;
};

struct DegradationRanges {
  double brightness_lo = 0.5, brightness_hi = 1.5;
  double saturation_lo = 0.5, saturation_hi = 1.5;
  double hue_lo = -18.0, hue_hi = 18.0;
  double sharpness_lo = 0.5, sharpness_hi = 2.0;
  double noise_sigma_lo = 0.0, noise_sigma_hi = 12.0;
  double motion_length_lo = 0.0, motion_length_hi = 15.0;
  double gaussian_sigma_lo = 0.0, gaussian_sigma_hi = 2.5;
  int occluder_count_lo = 0, occluder_count_hi = 3;
  double occluder_scale_lo = 0.08, occluder_scale_hi = 0.35;
};

inline void validate_ranges(const DegradationRanges& r) {
  auto ordered = [](double lo, double hi, const char* what) {
    if (!(lo <= hi))
      throw ValidationError(std::string("degradation range inverted: ") + what);
  };
  ordered(r.brightness_lo, r.brightness_hi, "brightness");
  ordered(r.saturation_lo, r.saturation_hi, "saturation");
  ordered(r.hue_lo, r.hue_hi, "hue");
  ordered(r.sharpness_lo, r.sharpness_hi, "sharpness");
  ordered(r.noise_sigma_lo, r.noise_sigma_hi, "noise sigma");
  ordered(r.motion_length_lo, r.motion_length_hi, "motion length");
  ordered(r.gaussian_sigma_lo, r.gaussian_sigma_hi, "gaussian sigma");
  ordered(r.occluder_scale_lo, r.occluder_scale_hi, "occluder scale");
  if (r.brightness_lo <= 0.0 || r.saturation_lo < 0.0 || r.sharpness_lo < 0.0)
    throw ValidationError("degradation factors must stay positive");
  if (r.noise_sigma_lo < 0.0 || r.motion_length_lo < 0.0 ||
      r.gaussian_sigma_lo < 0.0 || r.occluder_scale_lo <= 0.0)
    throw ValidationError("degradation magnitudes must be non-negative");
  if (r.occluder_count_lo < 0 || r.occluder_count_lo > r.occluder_count_hi)
    throw ValidationError("occluder count range invalid");
}

inline DegradationParams sample_params(Rng& rng, const DegradationRanges& r,
                                       std::size_t cutout_library_size) {
  validate_ranges(r);
  DegradationParams p;
  p.brightness_factor = rng.uniform(r.brightness_lo, r.brightness_hi);
  p.saturation_factor = rng.uniform(r.saturation_lo, r.saturation_hi);
  p.hue_shift_deg = rng.uniform(r.hue_lo, r.hue_hi);
  p.sharpness_factor = rng.uniform(r.sharpness_lo, r.sharpness_hi);
  p.noise_sigma = rng.uniform(r.noise_sigma_lo, r.noise_sigma_hi);
  p.motion_blur_length = rng.uniform(r.motion_length_lo, r.motion_length_hi);
  p.motion_blur_angle_deg = rng.uniform(0.0, 360.0);
  p.gaussian_blur_sigma = rng.uniform(r.gaussian_sigma_lo, r.gaussian_sigma_hi);
  const int count = static_cast<int>(
      rng.uniform_int(r.occluder_count_lo, r.occluder_count_hi));
  if (count > 0 && cutout_library_size == 0)
    throw ValidationError("occluders requested but cutout library is empty");
  for (int i = 0; i < count; ++i) {
    OccluderSpec o;
    o.cutout_id = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(cutout_library_size) - 1));
    o.center_y = rng.uniform();
    o.center_x = rng.uniform();
    o.scale = rng.uniform(r.occluder_scale_lo, r.occluder_scale_hi);
    p.occluders.push_back(o);
  }
  return p;
}

namespace detail {

// Mirror indexing without edge repetition is fiddly at size 1; plain
// symmetric reflection (…, 1, 0 | 0, 1, …) is used everywhere instead.
inline int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

struct FloatPlanes {
  int height = 0, width = 0, channels = 0;
  std::vector<double> v;  // interleaved, like Image

  double& at(int y, int x, int c) {
    return v[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return v[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

inline FloatPlanes to_float(const Image& img) {
  FloatPlanes f{img.height, img.width, img.channels, {}};
  f.v.assign(img.data.begin(), img.data.end());
  return f;
}

inline Image quantize(const FloatPlanes& f) {
  Image img(f.height, f.width, f.channels);
  for (std::size_t i = 0; i < f.v.size(); ++i)
    img.data[i] = clamp_to_u8(f.v[i]);
  return img;
}

// Hue in degrees [0, 360), s and v in [0, 1]; inputs in [0, 255].
inline void rgb_to_hsv(double r, double g, double b, double& h, double& s,
                       double& v) {
  r /= 255.0;
  g /= 255.0;
  b /= 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r)
    h = 60.0 * std::fmod((g - b) / d + 6.0, 6.0);
  else if (mx == g)
    h = 60.0 * ((b - r) / d + 2.0);
  else
    h = 60.0 * ((r - g) / d + 4.0);
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g,
                       double& b) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  if (hp < 1)      { r1 = c; g1 = x; }
  else if (hp < 2) { r1 = x; g1 = c; }
  else if (hp < 3) { g1 = c; b1 = x; }
  else if (hp < 4) { g1 = x; b1 = c; }
  else if (hp < 5) { r1 = x; b1 = c; }
  else             { r1 = c; b1 = x; }
  const double m = v - c;
  r = (r1 + m) * 255.0;
  g = (g1 + m) * 255.0;
  b = (b1 + m) * 255.0;
}

// 3x3 smoothing used by the sharpness stage: center weight 5, neighbors 1,
// normalized (the classic "smooth" filter).
inline FloatPlanes smooth3(const FloatPlanes& f) {
  static const double k[9] = {1, 1, 1, 1, 5, 1, 1, 1, 1};
  FloatPlanes out = f;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            s += k[(dy + 1) * 3 + (dx + 1)] *
                 f.at(reflect_index(y + dy, f.height),
                      reflect_index(x + dx, f.width), c);
        out.at(y, x, c) = s / 13.0;
      }
  return out;
}

inline std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

inline FloatPlanes convolve_separable(const FloatPlanes& f,
                                      const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  FloatPlanes mid = f, out = f;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int t = -radius; t <= radius; ++t)
          s += taps[t + radius] * f.at(y, reflect_index(x + t, f.width), c);
        mid.at(y, x, c) = s;
      }
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int t = -radius; t <= radius; ++t)
          s += taps[t + radius] * mid.at(reflect_index(y + t, f.height), x, c);
        out.at(y, x, c) = s;
      }
  return out;
}

struct Kernel2d {
  int radius = 0;
  std::vector<double> w;  // (2r+1)^2, sums to 1

  double at(int dy, int dx) const {
    return w[(dy + radius) * (2 * radius + 1) + (dx + radius)];
  }
};

// Line kernel: unit-weight samples are spread along a segment of the given
// length and angle through the kernel center with bilinear splatting, then
// the kernel is normalized.
inline Kernel2d motion_kernel(double length, double angle_deg) {
  const int samples = std::max(1, static_cast<int>(std::lround(length)));
  const double half = (length - 1.0) / 2.0;
  const double rad = angle_deg * 3.14159265358979323846 / 180.0;
  const double cx = std::cos(rad), sy = std::sin(rad);
  const double extent = std::max(1.0, half * std::max(std::fabs(cx), std::fabs(sy)));
  Kernel2d k;
  k.radius = static_cast<int>(std::ceil(extent));
  const int size = 2 * k.radius + 1;
  k.w.assign(static_cast<std::size_t>(size) * size, 0.0);
  for (int i = 0; i < samples; ++i) {
    const double t =
        samples == 1 ? 0.0 : -half + (length - 1.0) * i / (samples - 1);
    const double py = k.radius + t * sy;
    const double px = k.radius + t * cx;
    const int y0 = static_cast<int>(std::floor(py));
    const int x0 = static_cast<int>(std::floor(px));
    const double fy = py - y0, fx = px - x0;
    const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx),
                           fy * fx};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    for (int j = 0; j < 4; ++j) {
      if (wts[j] <= 0.0) continue;
      if (ys[j] < 0 || ys[j] >= size || xs[j] < 0 || xs[j] >= size)
        throw ContractError("motion kernel splat out of bounds");
      k.w[static_cast<std::size_t>(ys[j]) * size + xs[j]] += wts[j];
    }
  }
  double sum = 0.0;
  for (double v : k.w) sum += v;
  for (double& v : k.w) v /= sum;
  return k;
}

inline FloatPlanes convolve2d(const FloatPlanes& f, const Kernel2d& k) {
  FloatPlanes out = f;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int dy = -k.radius; dy <= k.radius; ++dy)
          for (int dx = -k.radius; dx <= k.radius; ++dx)
            s += k.at(dy, dx) * f.at(reflect_index(y + dy, f.height),
                                     reflect_index(x + dx, f.width), c);
        out.at(y, x, c) = s;
      }
  return out;
}

}  // namespace detail

// Photometric stage: brightness -> saturation -> hue -> sharpness, computed
// in floating point and quantized once on the way out.
inline Image apply_photometric(const Image& frame,
                               const DegradationParams& p) {
  if (frame.channels != 3)
    throw ValidationError("apply_photometric: expected a 3-channel frame");
  detail::FloatPlanes f = detail::to_float(frame);

  if (p.brightness_factor != 1.0)
    for (double& v : f.v) v *= p.brightness_factor;

  if (p.saturation_factor != 1.0)
    for (int y = 0; y < f.height; ++y)
      for (int x = 0; x < f.width; ++x) {
        const double l =
            luma601(f.at(y, x, 0), f.at(y, x, 1), f.at(y, x, 2));
        for (int c = 0; c < 3; ++c)
          f.at(y, x, c) = l + p.saturation_factor * (f.at(y, x, c) - l);
      }

  if (p.hue_shift_deg != 0.0)
    for (int y = 0; y < f.height; ++y)
      for (int x = 0; x < f.width; ++x) {
        double h, s, v;
        detail::rgb_to_hsv(f.at(y, x, 0), f.at(y, x, 1), f.at(y, x, 2), h, s,
                           v);
        h = std::fmod(std::fmod(h + p.hue_shift_deg, 360.0) + 360.0, 360.0);
        detail::hsv_to_rgb(h, s, v, f.at(y, x, 0), f.at(y, x, 1),
                           f.at(y, x, 2));
      }

  if (p.sharpness_factor != 1.0) {
    const detail::FloatPlanes smooth = detail::smooth3(f);
    for (std::size_t i = 0; i < f.v.size(); ++i)
      f.v[i] = smooth.v[i] + p.sharpness_factor * (f.v[i] - smooth.v[i]);
  }

  return detail::quantize(f);
}

// Blur + noise stage: motion blur -> Gaussian blur -> additive Gaussian
// noise. Kernels are DC-preserving; the Gaussian is truncated at 3 sigma.
inline Image apply_noise_blur(const Image& frame, const DegradationParams& p,
                              Rng& rng) {
  detail::FloatPlanes f = detail::to_float(frame);

  if (p.motion_blur_length >= 1.5)
    f = detail::convolve2d(
        f, detail::motion_kernel(p.motion_blur_length, p.motion_blur_angle_deg));

  if (p.gaussian_blur_sigma > 0.0 &&
      std::ceil(3.0 * p.gaussian_blur_sigma) >= 1.0)
    f = detail::convolve_separable(f,
                                   detail::gaussian_taps(p.gaussian_blur_sigma));

  if (p.noise_sigma > 0.0)
    for (double& v : f.v) v += rng.gaussian(0.0, p.noise_sigma);

  return detail::quantize(f);
}

struct CompositeResult {
  Image frame;
  BinaryMask mask;
};

// Alpha-composites cutouts at the resolved positions; the mask is exactly
// the set of pixels whose pasted alpha is nonzero. Nearest-neighbor
// resampling keeps cutout alpha values intact.
inline CompositeResult composite_occluders(
    const Image& frame, const std::vector<Image>& cutouts,
    const std::vector<OccluderSpec>& specs) {
  if (frame.channels != 3)
    throw ValidationError("composite_occluders: expected a 3-channel frame");
  CompositeResult res{frame, BinaryMask(frame.height, frame.width)};
  for (const OccluderSpec& spec : specs) {
    if (spec.cutout_id >= cutouts.size())
      throw ValidationError("occluder references a missing cutout");
    const Image& cut = cutouts[spec.cutout_id];
    if (cut.channels != 4)
      throw ValidationError("cutouts must carry an alpha channel (RGBA)");
    const double target_long =
        spec.scale * std::min(frame.height, frame.width);
    const double base_long = std::max(cut.height, cut.width);
    const double factor = target_long / base_long;
    const int sh = std::max(1, static_cast<int>(std::lround(cut.height * factor)));
    const int sw = std::max(1, static_cast<int>(std::lround(cut.width * factor)));
    const int top = static_cast<int>(std::lround(spec.center_y * frame.height -
                                                 sh / 2.0));
    const int left = static_cast<int>(std::lround(spec.center_x * frame.width -
                                                  sw / 2.0));
    for (int y = 0; y < sh; ++y) {
      const int fy = top + y;
      if (fy < 0 || fy >= frame.height) continue;
      const int cy = std::min(cut.height - 1, y * cut.height / sh);
      for (int x = 0; x < sw; ++x) {
        const int fx = left + x;
        if (fx < 0 || fx >= frame.width) continue;
        const int cxp = std::min(cut.width - 1, x * cut.width / sw);
        const std::uint8_t a = cut.at(cy, cxp, 3);
        if (a == 0) continue;
        res.mask.at(fy, fx) = 1;
        for (int c = 0; c < 3; ++c) {
          const double blend = (a * cut.at(cy, cxp, c) +
                                (255.0 - a) * res.frame.at(fy, fx, c)) /
                               255.0;
          res.frame.at(fy, fx, c) = clamp_to_u8(blend);
        }
      }
    }
  }
  return res;
}

// Sampling wrapper: draws 0-3 occluder placements, then composites them.
inline CompositeResult composite_occluders(const Image& frame,
                                           const std::vector<Image>& cutouts,
                                           Rng& rng,
                                           const DegradationRanges& ranges = {}) {
  const int count = static_cast<int>(
      rng.uniform_int(ranges.occluder_count_lo, ranges.occluder_count_hi));
  if (count > 0 && cutouts.empty())
    throw ValidationError("occluders requested but cutout library is empty");
  std::vector<OccluderSpec> specs;
  for (int i = 0; i < count; ++i) {
    OccluderSpec o;
    o.cutout_id = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cutouts.size()) - 1));
    o.center_y = rng.uniform();
    o.center_x = rng.uniform();
    o.scale = rng.uniform(ranges.occluder_scale_lo, ranges.occluder_scale_hi);
    specs.push_back(o);
  }
  return composite_occluders(frame, cutouts, specs);
}

// Picks 25 frames at a uniformly sampled stride, starting at frame 0. The
// stride bound keeps the last index inside the source.
inline std::vector<Image> sample_clean_sequence(
    const std::vector<Image>& source, Rng& rng) {
  if (source.size() < kSequenceLength)
    throw ValidationError("sample_clean_sequence: need at least 25 frames, got " +
                          std::to_string(source.size()));
  const std::int64_t max_stride =
      static_cast<std::int64_t>(source.size() - 1) / (kSequenceLength - 1);
  const std::int64_t stride = rng.uniform_int(1, max_stride);
  std::vector<Image> out;
  out.reserve(kSequenceLength);
  for (int i = 0; i < kSequenceLength; ++i)
    out.push_back(source[static_cast<std::size_t>(i) * stride]);
  return out;
}

struct ZeroedSequence {
  std::vector<Image> frames;
  std::vector<std::size_t> zero_indices;  // sorted, all interior
};

// Blacks out n in [0, 23] interior frames; the first and last frames stay,
// matching the planning invariant that videos start and end on images.
inline ZeroedSequence zero_frames(const std::vector<Image>& frames, Rng& rng) {
  if (frames.size() != kSequenceLength)
    throw ValidationError("zero_frames: expected a 25-frame sequence");
  const std::int64_t n = rng.uniform_int(0, kSequenceLength - 2);
  std::vector<std::size_t> picks = rng.sample_without_replacement(
      kSequenceLength - 2, static_cast<std::size_t>(n));
  for (std::size_t& p : picks) p += 1;  // interior positions 1..23
  std::sort(picks.begin(), picks.end());
  ZeroedSequence out{frames, picks};
  for (std::size_t idx : out.zero_indices)
    out.frames[idx] =
        Image(frames[idx].height, frames[idx].width, frames[idx].channels, 0);
  return out;
}

struct TrainingPair {
  std::vector<Image> initial_video;
  std::vector<BinaryMask> inpaint_masks;
  std::vector<BinaryMask> style_masks;
  std::vector<Image> target_video;
  std::size_t style_slot = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> zero_indices;
  std::vector<DegradationParams> params;  // per frame, sampled or identity
};

// Full recipe: zero a random interior subset, degrade the survivors with
// per-frame parameters, pick a style slot among the survivors, and render
// targets from the clean frames under the style frame's photometric
// parameters only.
inline TrainingPair make_training_pair(const std::vector<Image>& clean,
                                       const std::vector<Image>& cutouts,
                                       std::uint64_t seed,
                                       const DegradationRanges& ranges = {}) {
  if (clean.size() != kSequenceLength)
    throw ValidationError("make_training_pair: expected a 25-frame sequence");
  for (const Image& img : clean)
    if (img.channels != 3 || !img.same_shape(clean.front()))
      throw ValidationError(
          "make_training_pair: frames must be 3-channel and uniformly sized");

  Rng rng(seed);
  TrainingPair pair;
  pair.seed = seed;

  ZeroedSequence zeroed = zero_frames(clean, rng);
  pair.zero_indices = zeroed.zero_indices;

  std::vector<bool> is_zero(kSequenceLength, false);
  for (std::size_t idx : pair.zero_indices) is_zero[idx] = true;
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < kSequenceLength; ++i)
    if (!is_zero[i]) survivors.push_back(i);

  pair.params.resize(kSequenceLength);
  for (std::size_t i = 0; i < kSequenceLength; ++i)
    if (!is_zero[i]) pair.params[i] = sample_params(rng, ranges, cutouts.size());

  pair.style_slot = survivors[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(survivors.size()) - 1))];

  const int h = clean.front().height, w = clean.front().width;
  pair.initial_video.reserve(kSequenceLength);
  pair.inpaint_masks.reserve(kSequenceLength);
  pair.style_masks.reserve(kSequenceLength);
  pair.target_video.reserve(kSequenceLength);

  const DegradationParams& style_params = pair.params[pair.style_slot];
  for (std::size_t i = 0; i < kSequenceLength; ++i) {
    if (is_zero[i]) {
      pair.initial_video.push_back(Image(h, w, 3, 0));
      pair.inpaint_masks.push_back(BinaryMask(h, w, 1));
    } else {
      Image frame = apply_photometric(clean[i], pair.params[i]);
      frame = apply_noise_blur(frame, pair.params[i], rng);
      CompositeResult comp =
          composite_occluders(frame, cutouts, pair.params[i].occluders);
      pair.initial_video.push_back(std::move(comp.frame));
      pair.inpaint_masks.push_back(std::move(comp.mask));
    }
    pair.style_masks.push_back(BinaryMask(h, w, i == pair.style_slot ? 1 : 0));
    DegradationParams target_params;
    target_params.brightness_factor = style_params.brightness_factor;
    target_params.saturation_factor = style_params.saturation_factor;
    target_params.hue_shift_deg = style_params.hue_shift_deg;
    target_params.sharpness_factor = style_params.sharpness_factor;
    pair.target_video.push_back(apply_photometric(clean[i], target_params));
  }
  return pair;
}

}  // namespace viewloom
