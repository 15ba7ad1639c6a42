#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "viewloom/frame_plan.hpp"

namespace viewloom {

// How the zero-frame weight's clamped numerator is expressed: as the ratio
// of zero frames to conditioned frames ((f-N)/N, the default) or as the
// fraction of total frames ((f-N)/f). The forms differ only where
// (f-N)/N < 1-lambda; both keep the conditioned share of total weight at or
// above lambda.
enum class ZeroWeightForm { ratio_to_conditioned, fraction_of_total };

// Per-frame loss multipliers for conditioned (input-image) and zero frames.
struct LossWeights {
  double omega_c = 1.0;  // conditioned-frame weight, >= 1
  double omega_n = 1.0;  // zero-frame weight, > 0
  double lambda = 0.0;
  int total_frames = 0;
  int image_count = 0;
};

// omega_c = max(N/f, lambda) / (N/f)
// omega_n = min(numerator, 1 - lambda) / ((f-N)/f)
// guaranteeing conditioned frames at least a lambda share of total weight.
inline LossWeights compute_weights(
    int total_frames, int image_count, double lambda,
    ZeroWeightForm form = ZeroWeightForm::ratio_to_conditioned) {
  const int f = total_frames;
  const int n = image_count;
  if (n < 2) throw ValidationError("compute_weights: image count must be >= 2");
  if (n >= f)
    throw ValidationError("compute_weights: image count must be below frame count");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ValidationError("compute_weights: lambda must lie in (0, 1)");

  const double cond_frac = static_cast<double>(n) / f;
  const double zero_frac = static_cast<double>(f - n) / f;
  const double numerator = (form == ZeroWeightForm::ratio_to_conditioned)
                               ? static_cast<double>(f - n) / n
                               : zero_frac;
  LossWeights w;
  w.omega_c = std::max(cond_frac, lambda) / cond_frac;
  w.omega_n = std::min(numerator, 1.0 - lambda) / zero_frac;
  w.lambda = lambda;
  w.total_frames = f;
  w.image_count = n;
  return w;
}

// Scales a per-frame loss vector by omega_c on image slots and omega_n on
// zero slots.
inline std::vector<double> weight_loss_vector(const std::vector<double>& lv,
                                              const FramePlan& plan,
                                              const LossWeights& w) {
  if (lv.size() != plan.slots.size())
    throw ValidationError("weight_loss_vector: expected " +
                          std::to_string(plan.slots.size()) + " losses, got " +
                          std::to_string(lv.size()));
  std::vector<double> out(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i)
    out[i] = lv[i] * (plan.slots[i].is_image ? w.omega_c : w.omega_n);
  return out;
}

}  // namespace viewloom
