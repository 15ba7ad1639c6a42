// Generates one synthetic training pair and prints its recipe summary:
// which frames were zeroed, which slot carries the style, and how much the
// degradation moved each surviving frame.

#include <cstdio>
#include <vector>

#include "viewloom/viewloom.hpp"

using namespace viewloom;

namespace {

std::vector<Image> checkerboard_sequence(int count, int h, int w) {
  std::vector<Image> frames;
  for (int t = 0; t < count; ++t) {
    Image img(h, w, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool on = ((x / 8 + y / 8 + t) % 2) == 0;
        img.at(y, x, 0) = on ? 200 : 55;
        img.at(y, x, 1) = on ? 160 : 80;
        img.at(y, x, 2) = on ? 90 : 130;
      }
    frames.push_back(std::move(img));
  }
  return frames;
}

Image opaque_blob(int side) {
  Image cut(side, side, 4);
  const double r = side / 2.0;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double dy = y - r + 0.5, dx = x - r + 0.5;
      const bool inside = dy * dy + dx * dx <= r * r;
      cut.at(y, x, 0) = 30;
      cut.at(y, x, 1) = 30;
      cut.at(y, x, 2) = 30;
      cut.at(y, x, 3) = inside ? 255 : 0;
    }
  return cut;
}

}  // namespace

int main() {
  Rng rng(11);
  const std::vector<Image> source = checkerboard_sequence(60, 64, 64);
  const std::vector<Image> clean = sample_clean_sequence(source, rng);
  const std::vector<Image> cutouts = {opaque_blob(24), opaque_blob(40)};

  const TrainingPair pair = make_training_pair(clean, cutouts, 4242);

  std::printf("style slot: %zu, zeroed frames:", pair.style_slot);
  for (std::size_t z : pair.zero_indices) std::printf(" %zu", z);
  std::printf("\n");

  for (std::size_t i = 0; i < pair.initial_video.size(); ++i) {
    const bool zeroed = pair.inpaint_masks[i].all_of(1);
    if (zeroed) {
      std::printf("frame %2zu: zeroed\n", i);
      continue;
    }
    std::printf("frame %2zu: occluded px %6zu, degraded PSNR %6.2f dB%s\n", i,
                pair.inpaint_masks[i].count_set(),
                psnr(pair.initial_video[i], pair.target_video[i]),
                i == pair.style_slot ? "  (style)" : "");
  }
  return 0;
}
