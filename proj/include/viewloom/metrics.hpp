#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "viewloom/image.hpp"

namespace viewloom {

inline constexpr double kPsnrCap = 99.0;

// Per-channel least-squares affine map pred -> gt, with the residual MSE
// measured in float space before any clamping.
struct AffineFit {
  std::vector<double> gain;
  std::vector<double> offset;
  double residual = 0.0;  // mean squared error after alignment, float space
};

struct AlignResult {
  Image aligned;  // clamp(gain * pred + offset), quantized
  AffineFit fit;
};

namespace detail {

inline void require_same_shape(const Image& a, const Image& b,
                               const char* who) {
  if (!a.same_shape(b))
    throw ValidationError(std::string(who) + ": image dimensions mismatch");
}

}  // namespace detail

// Fits gain and offset per channel by least squares. Constant prediction
// channels fall back to gain 0 with the ground-truth mean as offset.
inline AlignResult affine_align(const Image& pred, const Image& gt) {
  detail::require_same_shape(pred, gt, "affine_align");
  const std::size_t px = pred.pixel_count();
  AlignResult res;
  res.aligned = Image(pred.height, pred.width, pred.channels);
  res.fit.gain.resize(pred.channels);
  res.fit.offset.resize(pred.channels);

  double sq_sum = 0.0;
  for (int c = 0; c < pred.channels; ++c) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int y = 0; y < pred.height; ++y)
      for (int x = 0; x < pred.width; ++x) {
        const double p = pred.at(y, x, c);
        const double g = gt.at(y, x, c);
        sx += p;
        sy += g;
        sxx += p * p;
        sxy += p * g;
      }
    const double n = static_cast<double>(px);
    const double var = sxx - sx * sx / n;
    double a, b;
    if (var > 1e-12) {
      a = (sxy - sx * sy / n) / var;
      b = (sy - a * sx) / n;
    } else {
      a = 0.0;
      b = sy / n;
    }
    res.fit.gain[c] = a;
    res.fit.offset[c] = b;
    for (int y = 0; y < pred.height; ++y)
      for (int x = 0; x < pred.width; ++x) {
        const double v = a * pred.at(y, x, c) + b;
        const double e = v - gt.at(y, x, c);
        sq_sum += e * e;
        res.aligned.at(y, x, c) = clamp_to_u8(v);
      }
  }
  res.fit.residual = sq_sum / (static_cast<double>(px) * pred.channels);
  return res;
}

inline double mse(const Image& a, const Image& b) {
  detail::require_same_shape(a, b, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

// PSNR over the 8-bit peak, capped at 99 dB (identical inputs hit the cap).
inline double psnr_from_mse(double mean_sq) {
  if (!(mean_sq > 0.0)) return kPsnrCap;
  const double v = 10.0 * std::log10(255.0 * 255.0 / mean_sq);
  return std::min(v, kPsnrCap);
}

inline double psnr(const Image& a, const Image& b) {
  return psnr_from_mse(mse(a, b));
}

namespace detail {

// 11-tap Gaussian (sigma 1.5) normalized to sum 1.
inline std::array<double, 11> ssim_window() {
  std::array<double, 11> w{};
  double sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    const double x = i - 5;
    w[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-region separable filter: output is (h-10) x (w-10).
inline std::vector<double> filter_valid(const std::vector<double>& img, int h,
                                        int w) {
  static const std::array<double, 11> win = ssim_window();
  const int ow = w - 10;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < 11; ++t) s += win[t] * img[y * w + x + t];
      rows[y * ow + x] = s;
    }
  const int oh = h - 10;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < 11; ++t) s += win[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

inline std::vector<double> luma_plane(const Image& img) {
  std::vector<double> out(img.pixel_count());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (img.channels >= 3)
        out[y * img.width + x] =
            luma601(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
      else
        out[y * img.width + x] = img.at(y, x, 0);
    }
  return out;
}

}  // namespace detail

// Mean local structural similarity over the luminance channel, Gaussian
// window sigma 1.5, stabilizers C1 = (0.01*255)^2 and C2 = (0.03*255)^2,
// population statistics. Requires min side >= 11.
inline double ssim(const Image& a, const Image& b) {
  detail::require_same_shape(a, b, "ssim");
  if (a.height < 11 || a.width < 11)
    throw ValidationError("ssim: images must be at least 11x11");

  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const int h = a.height, w = a.width;

  const std::vector<double> x = detail::luma_plane(a);
  const std::vector<double> y = detail::luma_plane(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }

  const auto mu_x = detail::filter_valid(x, h, w);
  const auto mu_y = detail::filter_valid(y, h, w);
  const auto e_xx = detail::filter_valid(xx, h, w);
  const auto e_yy = detail::filter_valid(yy, h, w);
  const auto e_xy = detail::filter_valid(xy, h, w);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double vx = e_xx[i] - mu_x[i] * mu_x[i];
    const double vy = e_yy[i] - mu_y[i] * mu_y[i];
    const double cov = e_xy[i] - mu_x[i] * mu_y[i];
    const double num = (2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2);
    const double den =
        (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_x.size());
}

struct EvalEntry {
  double psnr_raw = 0.0;
  double ssim_raw = 0.0;
  std::optional<double> psnr_aligned;
  std::optional<double> ssim_aligned;
};

struct EvalReport {
  std::vector<EvalEntry> per_image;
  EvalEntry mean;
};

// Paired evaluation; aligned metrics use the per-image affine fit, with the
// aligned PSNR taken from the float-space residual.
inline EvalReport evaluate(const std::vector<Image>& pred,
                           const std::vector<Image>& gt, bool aligned = true) {
  if (pred.size() != gt.size())
    throw ValidationError("evaluate: prediction and ground-truth sets differ in size");
  if (pred.empty()) throw ValidationError("evaluate: empty image sets");

  EvalReport report;
  double sp = 0.0, ss = 0.0, sap = 0.0, sas = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    EvalEntry e;
    e.psnr_raw = psnr(pred[i], gt[i]);
    e.ssim_raw = ssim(pred[i], gt[i]);
    if (aligned) {
      const AlignResult ar = affine_align(pred[i], gt[i]);
      e.psnr_aligned = psnr_from_mse(ar.fit.residual);
      e.ssim_aligned = ssim(ar.aligned, gt[i]);
      sap += *e.psnr_aligned;
      sas += *e.ssim_aligned;
    }
    sp += e.psnr_raw;
    ss += e.ssim_raw;
    report.per_image.push_back(e);
  }
  const double n = static_cast<double>(pred.size());
  report.mean.psnr_raw = sp / n;
  report.mean.ssim_raw = ss / n;
  if (aligned) {
    report.mean.psnr_aligned = sap / n;
    report.mean.ssim_aligned = sas / n;
  }
  return report;
}

}  // namespace viewloom
