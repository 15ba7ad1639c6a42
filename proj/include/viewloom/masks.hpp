#pragma once

#include <optional>
#include <string>
#include <vector>

#include "viewloom/frame_plan.hpp"
#include "viewloom/image.hpp"

namespace viewloom {

// Per-slot inpainting masks: zero slots are fully masked, image slots carry
// their occlusion mask or stay clear. `occlusions` is indexed by image
// position within the batch and may be empty (no occlusions at all).
inline std::vector<BinaryMask> make_inpaint_masks(
    const FramePlan& plan, int height, int width,
    const std::vector<std::optional<BinaryMask>>& occlusions = {}) {
  validate_plan(plan);
  if (!occlusions.empty() &&
      occlusions.size() != static_cast<std::size_t>(plan.image_count()))
    throw ValidationError("make_inpaint_masks: occlusion list must match image count");
  std::vector<BinaryMask> out;
  out.reserve(plan.slots.size());
  for (const auto& slot : plan.slots) {
    if (!slot.is_image) {
      out.emplace_back(height, width, 1);
      continue;
    }
    if (!occlusions.empty() && occlusions[slot.image_pos].has_value()) {
      const BinaryMask& occ = *occlusions[slot.image_pos];
      validate_mask(occ);
      if (occ.height != height || occ.width != width)
        throw ValidationError("make_inpaint_masks: occlusion mask dimensions mismatch");
      out.push_back(occ);
    } else {
      out.emplace_back(height, width, 0);
    }
  }
  return out;
}

// Style masks: all-ones at the style slot, all-zeros elsewhere. The style
// slot must hold an image.
inline std::vector<BinaryMask> make_style_masks(const FramePlan& plan,
                                                std::size_t style_slot,
                                                int height, int width) {
  validate_plan(plan);
  if (style_slot >= plan.slots.size())
    throw ValidationError("make_style_masks: style slot out of range");
  if (!plan.slots[style_slot].is_image)
    throw ValidationError("make_style_masks: style slot " +
                          std::to_string(style_slot) + " is a zero slot");
  std::vector<BinaryMask> out;
  out.reserve(plan.slots.size());
  for (std::size_t i = 0; i < plan.slots.size(); ++i)
    out.emplace_back(height, width, i == style_slot ? 1 : 0);
  return out;
}

// Zeroes masked pixels across all channels.
inline Image apply_inpaint(Image frame, const BinaryMask& mask) {
  validate_mask(mask);
  if (frame.height != mask.height || frame.width != mask.width)
    throw ValidationError("apply_inpaint: dimensions mismatch");
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      if (mask.at(y, x))
        for (int c = 0; c < frame.channels; ++c) frame.at(y, x, c) = 0;
  return frame;
}

// Max-pooling downsample: an output bit is set iff any source bit in its
// factor x factor block is set. Sizes that do not divide evenly behave as if
// the source were zero-padded on the bottom/right.
inline BinaryMask downsample_mask(const BinaryMask& mask, int factor) {
  validate_mask(mask);
  if (factor < 1) throw ValidationError("downsample_mask: factor must be >= 1");
  if (factor == 1) return mask;
  const int oh = (mask.height + factor - 1) / factor;
  const int ow = (mask.width + factor - 1) / factor;
  BinaryMask out(oh, ow, 0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(y, x)) out.at(y / factor, x / factor) = 1;
  return out;
}

}  // namespace viewloom
