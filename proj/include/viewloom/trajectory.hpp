#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "viewloom/geometry.hpp"
#include "viewloom/random.hpp"

namespace viewloom {

// Result of ordering a pose set into an implicit camera trajectory.
struct OrderedTrajectory {
  std::vector<std::size_t> order;            // permutation of 0..K-1 (input positions)
  std::vector<double> neighbor_distances;    // K-1 consecutive pose distances
};

enum class ListSide { head, tail };

// Distance from a candidate pose to the growing list: the smaller of its
// distances to the two ends. Exact ties resolve to the head.
inline std::pair<double, ListSide> list_distance(const Pose& candidate,
                                                 const Pose& head,
                                                 const Pose& tail,
                                                 const PoseSet& set) {
  const double dh = pose_distance(candidate, head, set);
  const double dt = pose_distance(candidate, tail, set);
  if (dh <= dt) return {dh, ListSide::head};
  return {dt, ListSide::tail};
}

inline std::size_t random_init_index(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ValidationError("random_init_index: empty set");
  Rng rng(seed);
  return static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(count) - 1));
}

// Greedy double-ended ordering: starting from the init pose, repeatedly take
// the unplaced pose with the smallest list distance and attach it to the
// nearer end. Ties among candidates go to the smallest input position; ties
// between the ends attach at the head. O(K^2) distance evaluations.
inline OrderedTrajectory sort_poses(const PoseSet& set,
                                    std::size_t init_index = 0) {
  validate_pose_set(set);
  const std::size_t k = set.poses.size();
  if (init_index >= k)
    throw ValidationError("sort_poses: init index out of range");

  std::deque<std::size_t> list{init_index};
  std::vector<bool> placed(k, false);
  placed[init_index] = true;

  for (std::size_t step = 1; step < k; ++step) {
    double best = std::numeric_limits<double>::infinity();
    ListSide best_side = ListSide::head;
    std::size_t best_idx = k;
    const Pose& head = set.poses[list.front()];
    const Pose& tail = set.poses[list.back()];
    for (std::size_t c = 0; c < k; ++c) {
      if (placed[c]) continue;
      const auto [d, side] = list_distance(set.poses[c], head, tail, set);
      if (d < best) {
        best = d;
        best_side = side;
        best_idx = c;
      }
    }
    placed[best_idx] = true;
    if (best_side == ListSide::head)
      list.push_front(best_idx);
    else
      list.push_back(best_idx);
  }

  OrderedTrajectory out;
  out.order.assign(list.begin(), list.end());
  out.neighbor_distances.reserve(k > 0 ? k - 1 : 0);
  for (std::size_t i = 0; i + 1 < k; ++i)
    out.neighbor_distances.push_back(
        pose_distance(set.poses[out.order[i]], set.poses[out.order[i + 1]], set));
  return out;
}

}  // namespace viewloom
