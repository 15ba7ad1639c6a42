#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viewloom/frame_plan.hpp"
#include "viewloom/geometry.hpp"
#include "viewloom/image.hpp"
#include "viewloom/manifest.hpp"
#include "viewloom/masks.hpp"
#include "viewloom/png_io.hpp"
#include "viewloom/trajectory.hpp"

namespace viewloom {

// Batch sizing for K images against an f-frame video: O is the smallest
// integer with (K-1)/O < f, and N is the per-batch image count it induces.
struct BatchParams {
  int iteration_divisor = 1;  // O
  int images_per_batch = 0;   // N
  int frame_capacity = 0;     // f
};

inline BatchParams batch_params(std::size_t image_count, int frame_capacity = 25) {
  if (image_count < 2)
    throw ValidationError("batch_params: need at least 2 images to schedule");
  if (frame_capacity < 2)
    throw ValidationError("batch_params: frame capacity must be >= 2");
  const std::size_t k1 = image_count - 1;
  const std::size_t o = k1 / static_cast<std::size_t>(frame_capacity) + 1;
  const std::size_t n = k1 / o + 1;
  return {static_cast<int>(o), static_cast<int>(n), frame_capacity};
}

// Closed-form batch count: ceil((K-1)/(N-1)).
inline std::size_t iteration_count(std::size_t image_count, int images_per_batch) {
  if (image_count < 2) return 0;
  if (images_per_batch < 2)
    throw ValidationError("iteration_count: batches advance by N-1, need N >= 2");
  const std::size_t step = static_cast<std::size_t>(images_per_batch) - 1;
  return (image_count - 1 + step - 1) / step;
}

// One batch's operands, decoded: the manifest plus the actual frame and mask
// rasters it describes. In-process restorers consume this directly; the
// external restorer materializes it to a directory first.
struct BatchInputs {
  BatchManifest manifest;
  std::vector<Image> frames;
  std::vector<BinaryMask> inpaint_masks;
  std::vector<BinaryMask> style_masks;
};

class Restorer {
 public:
  virtual ~Restorer() = default;
  // Must return exactly manifest.frame_capacity frames at the manifest
  // resolution; anything else aborts the pipeline.
  virtual std::vector<Image> restore(const BatchInputs& batch) = 0;
};

namespace detail {

inline std::string slot_file(const char* prefix, std::size_t slot) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.png", prefix, slot);
  return buf;
}

}  // namespace detail

// Builds the manifest for a plan, with the canonical flat file layout
// (frame_###.png, inpaint_###.png, style_###.png).
inline BatchManifest make_batch_manifest(
    const FramePlan& plan, std::size_t style_slot,
    const std::vector<std::size_t>& source_indices, int height, int width) {
  validate_plan(plan);
  if (source_indices.size() != static_cast<std::size_t>(plan.image_count()))
    throw ValidationError(
        "make_batch_manifest: source index list must match image count");
  BatchManifest m;
  m.frame_capacity = plan.total_frames();
  m.image_count = plan.image_count();
  m.style_slot = style_slot;
  m.height = height;
  m.width = width;
  for (std::size_t i = 0; i < plan.slots.size(); ++i) {
    SlotRecord s;
    s.kind = plan.slots[i].is_image ? SlotKind::image : SlotKind::zero;
    if (plan.slots[i].is_image)
      s.source_index = source_indices[plan.slots[i].image_pos];
    s.frame_path = detail::slot_file("frame", i);
    s.inpaint_mask_path = detail::slot_file("inpaint", i);
    s.style_mask_path = detail::slot_file("style", i);
    m.slots.push_back(std::move(s));
  }
  validate_manifest(m);
  return m;
}

// Writes a batch directory — all frames and masks, then the manifest — and
// returns the manifest path.
inline std::string materialize_batch(const BatchInputs& batch,
                                     const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < batch.manifest.slots.size(); ++i) {
    const SlotRecord& s = batch.manifest.slots[i];
    const std::filesystem::path base(dir);
    write_png((base / s.frame_path).string(), batch.frames[i]);
    write_mask_png((base / s.inpaint_mask_path).string(),
                   batch.inpaint_masks[i]);
    write_mask_png((base / s.style_mask_path).string(), batch.style_masks[i]);
  }
  return write_manifest(batch.manifest, dir);
}

class IdentityRestorer : public Restorer {
 public:
  std::vector<Image> restore(const BatchInputs& batch) override {
    return batch.frames;
  }
};

// Deterministic reference restorer: maps every image slot onto the style
// frame's per-channel statistics, fills masked pixels with the style channel
// mean, and fills zero slots by blending the nearest image slots.
class AffineStyleRestorer : public Restorer {
 public:
  std::vector<Image> restore(const BatchInputs& batch) override {
    const BatchManifest& m = batch.manifest;
    const int h = m.height, w = m.width;

    std::array<double, 3> style_mean{}, style_std{};
    channel_stats(batch.frames[m.style_slot], batch.inpaint_masks[m.style_slot],
                  style_mean, style_std);

    std::vector<std::vector<double>> mapped(m.slots.size());
    for (std::size_t i = 0; i < m.slots.size(); ++i) {
      if (m.slots[i].kind != SlotKind::image) continue;
      std::array<double, 3> mean{}, stddev{};
      const bool any =
          channel_stats(batch.frames[i], batch.inpaint_masks[i], mean, stddev);
      std::vector<double>& out = mapped[i];
      out.resize(static_cast<std::size_t>(h) * w * 3);
      for (int c = 0; c < 3; ++c) {
        // gain matches the spread, offset matches the mean; degenerate
        // spreads (either side) reduce to a pure mean shift
        double a = 1.0, b = style_mean[c] - mean[c];
        if (any && stddev[c] > 1e-9 && style_std[c] > 1e-9) {
          a = style_std[c] / stddev[c];
          b = style_mean[c] - a * mean[c];
        }
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const std::size_t idx =
                (static_cast<std::size_t>(y) * w + x) * 3 + c;
            if (!any || batch.inpaint_masks[i].at(y, x))
              out[idx] = style_mean[c];
            else
              out[idx] = a * batch.frames[i].at(y, x, c) + b;
          }
      }
    }

    // image slot neighbors for each zero slot
    std::vector<std::size_t> image_slots;
    for (std::size_t i = 0; i < m.slots.size(); ++i)
      if (m.slots[i].kind == SlotKind::image) image_slots.push_back(i);

    std::vector<Image> result;
    result.reserve(m.slots.size());
    for (std::size_t i = 0; i < m.slots.size(); ++i) {
      Image img(h, w, 3);
      if (m.slots[i].kind == SlotKind::image) {
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
              img.at(y, x, c) = clamp_to_u8(
                  mapped[i][(static_cast<std::size_t>(y) * w + x) * 3 + c]);
      } else {
        // placeholder content, discarded by the scheduler; blend the
        // bracketing image slots (slot 0 and the last slot are images, so
        // both sides exist)
        std::size_t left = image_slots.front(), right = image_slots.back();
        for (std::size_t s : image_slots) {
          if (s < i) {
            left = s;
          } else {
            right = s;
            break;
          }
        }
        const double t = right == left
                             ? 0.0
                             : static_cast<double>(i - left) / (right - left);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
              const std::size_t idx =
                  (static_cast<std::size_t>(y) * w + x) * 3 + c;
              img.at(y, x, c) = clamp_to_u8((1.0 - t) * mapped[left][idx] +
                                            t * mapped[right][idx]);
            }
      }
      result.push_back(std::move(img));
    }
    return result;
  }

 private:
  // Mean/stddev per channel over unmasked pixels; returns false when the
  // mask covers everything (stats then stay zero).
  static bool channel_stats(const Image& img, const BinaryMask& mask,
                            std::array<double, 3>& mean,
                            std::array<double, 3>& stddev) {
    std::array<double, 3> sum{}, sq{};
    std::size_t count = 0;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (mask.at(y, x)) continue;
        ++count;
        for (int c = 0; c < 3; ++c) {
          const double v = img.at(y, x, c);
          sum[c] += v;
          sq[c] += v * v;
        }
      }
    if (count == 0) return false;
    for (int c = 0; c < 3; ++c) {
      mean[c] = sum[c] / static_cast<double>(count);
      const double var = sq[c] / static_cast<double>(count) - mean[c] * mean[c];
      stddev[c] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return true;
  }
};

// Runs a configured command per batch: the batch directory is materialized,
// the command is invoked with the manifest path as its sole argument, and
// restored frames are read back from <batch dir>/restored/frame_###.png.
class ExternalRestorer : public Restorer {
 public:
  ExternalRestorer(std::string command, std::string work_root)
      : command_(std::move(command)), work_root_(std::move(work_root)) {
    if (command_.empty())
      throw ValidationError("external restorer: empty command");
  }

  std::vector<Image> restore(const BatchInputs& batch) override {
    char name[32];
    std::snprintf(name, sizeof(name), "batch_%03d", batch_counter_++);
    const std::string dir =
        (std::filesystem::path(work_root_) / name).string();
    const std::string manifest_path = materialize_batch(batch, dir);
    std::filesystem::create_directories(
        std::filesystem::path(dir) / "restored");

    const std::string cmd = command_ + " '" + manifest_path + "'";
    const int status = std::system(cmd.c_str());
    if (status != 0) {
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : status;
      throw ContractError("external restorer exited with status " +
                          std::to_string(code));
    }

    std::vector<Image> frames;
    for (std::size_t i = 0; i < batch.manifest.slots.size(); ++i) {
      const std::string path =
          (std::filesystem::path(dir) / "restored" /
           detail::slot_file("frame", i))
              .string();
      if (!std::filesystem::exists(path))
        throw ContractError("external restorer did not produce '" + path + "'");
      frames.push_back(convert_to_rgb(read_png(path)));
    }
    return frames;
  }

 private:
  std::string command_;
  std::string work_root_;
  int batch_counter_ = 0;
};

struct PipelineOptions {
  int frame_capacity = 25;   // f
  std::size_t style_index = 0;  // position in the sorted order; first batch
  std::size_t init_index = 0;   // trajectory growth starts at this input pose
  // optional per-input-image occlusion masks (index-aligned, may be empty)
  std::vector<std::optional<BinaryMask>> occlusions;
};

struct PipelineResult {
  std::vector<Image> restored;   // trajectory order
  OrderedTrajectory trajectory;  // order[i] = input position of output i
  BatchParams params;
  std::size_t iterations = 0;
};

// The full restoration loop: order the views once, then walk the trajectory
// in overlapping batches. Each batch plans an f-slot video, hands it to the
// restorer, and keeps the image-slot outputs; the last restored image seeds
// the next batch as both overlap anchor and style reference.
inline PipelineResult run_pipeline(const std::vector<Image>& images,
                                   const PoseSet& poses, Restorer& restorer,
                                   const PipelineOptions& opt = {}) {
  if (images.empty()) throw ValidationError("run_pipeline: no images");
  if (poses.poses.size() != images.size())
    throw ValidationError("run_pipeline: image/pose count mismatch");
  for (std::size_t i = 0; i < poses.poses.size(); ++i)
    if (poses.poses[i].index != i)
      throw ValidationError("run_pipeline: poses must be index-aligned");
  for (const Image& img : images)
    if (img.channels != 3 || !img.same_shape(images.front()))
      throw ValidationError(
          "run_pipeline: images must be 3-channel and uniformly sized");
  if (!opt.occlusions.empty() && opt.occlusions.size() != images.size())
    throw ValidationError(
        "run_pipeline: occlusion list must match image count");

  PipelineResult result;
  if (images.size() == 1) {  // nothing to schedule; passthrough
    result.restored = images;
    result.trajectory.order = {0};
    result.params = {1, 1, opt.frame_capacity};
    return result;
  }

  result.trajectory = sort_poses(poses, opt.init_index);
  result.params = batch_params(images.size(), opt.frame_capacity);
  const std::size_t n = static_cast<std::size_t>(result.params.images_per_batch);
  if (opt.style_index >= std::min(n, images.size()))
    throw ValidationError(
        "run_pipeline: style index must fall inside the first batch");

  const int h = images.front().height, w = images.front().width;

  // remaining trajectory positions; the head may carry a restored anchor
  struct Entry {
    std::size_t sorted_pos;
    Image image;
    bool restored_anchor;
  };
  std::deque<Entry> remaining;
  for (std::size_t i = 0; i < result.trajectory.order.size(); ++i)
    remaining.push_back({i, images[result.trajectory.order[i]], false});

  result.restored.resize(images.size());
  std::vector<bool> emitted(images.size(), false);

  while (remaining.size() >= 2) {
    ++result.iterations;
    const std::size_t b = std::min(n, remaining.size());

    std::vector<double> gaps;  // consecutive pose distances within the batch
    for (std::size_t j = 0; j + 1 < b; ++j)
      gaps.push_back(result.trajectory.neighbor_distances[remaining[j].sorted_pos]);
    const std::vector<int> zero_counts = allocate_zero_frames(
        gaps, static_cast<int>(b), result.params.frame_capacity);
    const FramePlan plan = build_frame_plan(static_cast<int>(b), zero_counts);
    const std::vector<std::size_t> image_slots = plan.image_slot_indices();

    const std::size_t style_pos =
        result.iterations == 1 ? opt.style_index : 0;
    const std::size_t style_slot = image_slots[style_pos];

    BatchInputs batch;
    std::vector<std::size_t> source_indices;
    std::vector<std::optional<BinaryMask>> occ;
    for (std::size_t j = 0; j < b; ++j) {
      source_indices.push_back(
          result.trajectory.order[remaining[j].sorted_pos]);
      if (!opt.occlusions.empty() && !remaining[j].restored_anchor)
        occ.push_back(opt.occlusions[source_indices.back()]);
      else if (!opt.occlusions.empty())
        occ.push_back(std::nullopt);  // anchors arrive already restored
    }
    batch.manifest = make_batch_manifest(plan, style_slot, source_indices, h, w);
    batch.inpaint_masks = make_inpaint_masks(plan, h, w, occ);
    batch.style_masks = make_style_masks(plan, style_slot, h, w);
    for (std::size_t i = 0; i < plan.slots.size(); ++i)
      batch.frames.push_back(plan.slots[i].is_image
                                 ? remaining[plan.slots[i].image_pos].image
                                 : Image(h, w, 3, 0));

    const std::vector<Image> out = restorer.restore(batch);
    if (out.size() != plan.slots.size())
      throw ContractError("restorer returned " + std::to_string(out.size()) +
                          " frames for an " +
                          std::to_string(plan.slots.size()) + "-slot video");
    for (const Image& img : out)
      if (img.height != h || img.width != w || img.channels != 3)
        throw ContractError("restorer changed the frame resolution");

    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t pos = remaining[j].sorted_pos;
      if (emitted[pos]) continue;  // overlap anchor, already in the output
      result.restored[pos] = out[image_slots[j]];
      emitted[pos] = true;
    }

    Entry anchor{remaining[b - 1].sorted_pos, out[image_slots[b - 1]], true};
    remaining.erase(remaining.begin(), remaining.begin() + b);
    remaining.push_front(std::move(anchor));
  }

  return result;
}

}  // namespace viewloom
