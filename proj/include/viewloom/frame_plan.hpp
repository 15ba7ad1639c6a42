#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "viewloom/error.hpp"

namespace viewloom {

// One slot of an initial video: either the i-th input image of the batch or
// a zero frame to be hallucinated by the restorer.
struct FrameSlot {
  bool is_image = false;
  std::size_t image_pos = 0;  // 0-based position among the batch's images

  friend bool operator==(const FrameSlot& a, const FrameSlot& b) {
    return a.is_image == b.is_image &&
           (!a.is_image || a.image_pos == b.image_pos);
  }
};

// Ordered f-slot layout mixing image slots and zero slots. The first and
// last slots are always image slots.
struct FramePlan {
  std::vector<FrameSlot> slots;
  std::vector<int> zero_counts;  // i-th entry: zero frames between images i and i+1

  int total_frames() const { return static_cast<int>(slots.size()); }

  int image_count() const {
    int n = 0;
    for (const auto& s : slots) n += s.is_image ? 1 : 0;
    return n;
  }

  // Slot index occupied by each image, in image order.
  std::vector<std::size_t> image_slot_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].is_image) out.push_back(i);
    return out;
  }

  friend bool operator==(const FramePlan& a, const FramePlan& b) {
    return a.slots == b.slots && a.zero_counts == b.zero_counts;
  }
};

// Apportions capacity - n_images zero frames over the n_images - 1 intervals
// proportionally to the interval distances: floor of the proportional share
// first, then one extra to each of the r largest-distance intervals (ties to
// the smaller interval index). A zero distance sum falls back to round-robin
// from the first interval.
inline std::vector<int> allocate_zero_frames(const std::vector<double>& d,
                                             int n_images, int capacity) {
  if (n_images < 2)
    throw ValidationError("allocate_zero_frames: need at least 2 images");
  if (n_images > capacity)
    throw ValidationError("allocate_zero_frames: more images than frames");
  if (d.size() != static_cast<std::size_t>(n_images) - 1)
    throw ValidationError("allocate_zero_frames: expected " +
                          std::to_string(n_images - 1) + " distances, got " +
                          std::to_string(d.size()));
  for (double v : d)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("allocate_zero_frames: distances must be finite and non-negative");

  const int to_insert = capacity - n_images;
  const std::size_t intervals = d.size();
  std::vector<int> n(intervals, 0);

  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (total <= 0.0) {
    for (int i = 0; i < to_insert; ++i) n[i % intervals] += 1;
    return n;
  }

  int assigned = 0;
  for (std::size_t i = 0; i < intervals; ++i) {
    n[i] = static_cast<int>(std::floor(d[i] / total * to_insert));
    assigned += n[i];
  }

  int remainder = to_insert - assigned;
  std::vector<std::size_t> rank(intervals);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  for (int i = 0; i < remainder; ++i) n[rank[i]] += 1;
  return n;
}

// Lays out n_images image slots separated by the given zero counts.
inline FramePlan build_frame_plan(int n_images,
                                  const std::vector<int>& zero_counts) {
  if (n_images < 1)
    throw ValidationError("build_frame_plan: need at least 1 image");
  if (zero_counts.size() != static_cast<std::size_t>(n_images) - 1)
    throw ValidationError("build_frame_plan: expected " +
                          std::to_string(n_images - 1) + " zero counts, got " +
                          std::to_string(zero_counts.size()));
  for (int c : zero_counts)
    if (c < 0)
      throw ValidationError("build_frame_plan: negative zero count");

  FramePlan plan;
  plan.zero_counts = zero_counts;
  for (int i = 0; i < n_images; ++i) {
    plan.slots.push_back({true, static_cast<std::size_t>(i)});
    if (i + 1 < n_images)
      for (int z = 0; z < zero_counts[i]; ++z) plan.slots.push_back({false, 0});
  }
  return plan;
}

inline void validate_plan(const FramePlan& plan) {
  if (plan.slots.empty()) throw ValidationError("frame plan has no slots");
  if (!plan.slots.front().is_image || !plan.slots.back().is_image)
    throw ValidationError("first and last slots must be image slots");
  const int n = plan.image_count();
  if (plan.zero_counts.size() != static_cast<std::size_t>(n) - 1)
    throw ValidationError("zero_counts length does not match image count");
  // image slots must appear in input order with the recorded gaps
  std::size_t expect_pos = 0;
  int gap = 0;
  std::size_t interval = 0;
  for (const auto& s : plan.slots) {
    if (s.is_image) {
      if (s.image_pos != expect_pos)
        throw ValidationError("image slots out of order");
      if (expect_pos > 0) {
        if (gap != plan.zero_counts[interval])
          throw ValidationError("zero_counts disagrees with slot layout");
        ++interval;
      }
      ++expect_pos;
      gap = 0;
    } else {
      ++gap;
    }
  }
}

}  // namespace viewloom
