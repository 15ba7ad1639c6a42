#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "viewloom/error.hpp"

namespace viewloom {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double& operator()(int r, int c) { return m[r * 3 + c]; }
  double operator()(int r, int c) const { return m[r * 3 + c]; }

  static Mat3 identity() { return Mat3{}; }

  friend Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
        r(i, j) = s;
      }
    return r;
  }

  friend Vec3 operator*(const Mat3& a, Vec3 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
  }

  friend bool operator==(const Mat3& a, const Mat3& b) { return a.m == b.m; }
};

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

inline double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

inline double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Largest absolute deviation of R^T R from the identity.
inline double orthonormality_defect(const Mat3& r) {
  const Mat3 g = transpose(r) * r;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g(i, j) - target));
    }
  return worst;
}

inline bool is_rotation(const Mat3& r, double tol) {
  return orthonormality_defect(r) <= tol &&
         std::abs(determinant(r) - 1.0) <= tol;
}

inline void require_rotation(const Mat3& r, double tol, const char* who) {
  if (!is_rotation(r, tol))
    throw ValidationError(std::string(who) +
                          ": input is not a proper rotation matrix");
}

// Rigid camera transform: world-from-camera rotation plus camera center,
// tagged with the stable index of the source image.
struct Pose {
  Mat3 rotation;      // world-from-camera
  Vec3 translation;   // camera center, scene units
  std::size_t index = 0;
};

inline void validate_pose(const Pose& p) {
  if (orthonormality_defect(p.rotation) > 1e-6)
    throw ValidationError("pose " + std::to_string(p.index) +
                          ": rotation is not orthonormal");
  if (std::abs(determinant(p.rotation) - 1.0) > 1e-6)
    throw ValidationError("pose " + std::to_string(p.index) +
                          ": rotation determinant is not +1");
  if (!p.translation.finite())
    throw ValidationError("pose " + std::to_string(p.index) +
                          ": non-finite translation");
}

// Which trace the rotation distance uses: `relative` takes the angle of
// a^T b (zero for identical rotations); `product` takes the trace of the
// plain product a*b, kept for compatibility with conventions that expect it.
enum class RotationDistanceForm { relative, product };

// Geodesic angle between two rotations, in [0, pi].
inline double rotation_distance(
    const Mat3& a, const Mat3& b,
    RotationDistanceForm form = RotationDistanceForm::relative) {
  require_rotation(a, 1e-4, "rotation_distance");
  require_rotation(b, 1e-4, "rotation_distance");
  const double tr = (form == RotationDistanceForm::relative)
                        ? trace(transpose(a) * b)
                        : trace(a * b);
  double c = (tr - 1.0) / 2.0;
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return std::acos(c);
}

inline double translation_distance(Vec3 a, Vec3 b) {
  if (!a.finite() || !b.finite())
    throw ValidationError("translation_distance: non-finite input");
  return (a - b).norm();
}

// A pose collection plus the normalization constants of its distance metric.
struct PoseSet {
  std::vector<Pose> poses;
  double scale_r = 1.0;   // s_R, normalizes the rotation term
  double scale_t = 1.0;   // s_T, normalizes the translation term
  double weight_r = 0.5;  // rotation mixing weight in [0, 1]
  RotationDistanceForm rotation_form = RotationDistanceForm::relative;
};

inline void validate_pose_set(const PoseSet& set) {
  if (set.poses.empty()) throw ValidationError("pose set is empty");
  if (!(set.scale_r > 0.0) || !(set.scale_t > 0.0))
    throw ValidationError("pose set scales must be positive");
  if (!(set.weight_r >= 0.0 && set.weight_r <= 1.0))
    throw ValidationError("rotation weight must lie in [0, 1]");
  std::unordered_set<std::size_t> seen;
  for (const Pose& p : set.poses) {
    validate_pose(p);
    if (!seen.insert(p.index).second)
      throw ValidationError("duplicate pose index " + std::to_string(p.index));
  }
}

// Maximum pairwise rotation and translation distances, with the degenerate
// all-equal case falling back to 1 so the metric stays defined.
inline std::pair<double, double> compute_scales(const std::vector<Pose>& poses) {
  if (poses.size() < 2)
    throw ValidationError("compute_scales: need at least 2 poses");
  double max_r = 0.0, max_t = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i)
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      max_r = std::max(max_r,
                       rotation_distance(poses[i].rotation, poses[j].rotation));
      max_t = std::max(
          max_t, translation_distance(poses[i].translation, poses[j].translation));
    }
  return {max_r > 0.0 ? max_r : 1.0, max_t > 0.0 ? max_t : 1.0};
}

// Builds a PoseSet, deriving the scales from the data (single-pose sets keep
// the fallback scales).
inline PoseSet make_pose_set(std::vector<Pose> poses, double weight_r = 0.5) {
  PoseSet set;
  set.poses = std::move(poses);
  set.weight_r = weight_r;
  if (set.poses.size() >= 2) {
    const auto [sr, st] = compute_scales(set.poses);
    set.scale_r = sr;
    set.scale_t = st;
  }
  validate_pose_set(set);
  return set;
}

// Combined pose distance: (w/s_R) * rotation term + ((1-w)/s_T) * translation
// term.
inline double pose_distance(const Pose& a, const Pose& b, const PoseSet& set) {
  if (!(set.scale_r > 0.0) || !(set.scale_t > 0.0))
    throw ValidationError("pose_distance: scales must be positive");
  if (!(set.weight_r >= 0.0 && set.weight_r <= 1.0))
    throw ValidationError("pose_distance: rotation weight must lie in [0, 1]");
  const double dr =
      rotation_distance(a.rotation, b.rotation, set.rotation_form);
  const double dt = translation_distance(a.translation, b.translation);
  return set.weight_r / set.scale_r * dr +
         (1.0 - set.weight_r) / set.scale_t * dt;
}

// Unit quaternion (w, x, y, z) to rotation matrix. Inputs are renormalized;
// q and -q map to the same matrix.
inline Mat3 quat_to_rotation(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-6))
    throw ValidationError("quat_to_rotation: near-zero quaternion");
  w /= n; x /= n; y /= n; z /= n;
  Mat3 r;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - w * z);
  r(0, 2) = 2 * (x * z + w * y);
  r(1, 0) = 2 * (x * y + w * z);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - w * x);
  r(2, 0) = 2 * (x * z - w * y);
  r(2, 1) = 2 * (y * z + w * x);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return r;
}

// Rotation matrix to unit quaternion (w, x, y, z), picking the numerically
// largest component first. Returned with w >= 0.
inline std::array<double, 4> rotation_to_quat(const Mat3& r) {
  require_rotation(r, 1e-4, "rotation_to_quat");
  std::array<double, 4> q{};
  const double tr = trace(r);
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q[0] = 0.25 * s;
    q[1] = (r(2, 1) - r(1, 2)) / s;
    q[2] = (r(0, 2) - r(2, 0)) / s;
    q[3] = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q[0] = (r(2, 1) - r(1, 2)) / s;
    q[1] = 0.25 * s;
    q[2] = (r(0, 1) + r(1, 0)) / s;
    q[3] = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q[0] = (r(0, 2) - r(2, 0)) / s;
    q[1] = (r(0, 1) + r(1, 0)) / s;
    q[2] = 0.25 * s;
    q[3] = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q[0] = (r(1, 0) - r(0, 1)) / s;
    q[1] = (r(0, 2) + r(2, 0)) / s;
    q[2] = (r(1, 2) + r(2, 1)) / s;
    q[3] = 0.25 * s;
  }
  if (q[0] < 0.0)
    for (double& v : q) v = -v;
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& v : q) v /= n;
  return q;
}

// Rodrigues formula; axis is normalized internally.
inline Mat3 axis_angle_rotation(Vec3 axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0))
    throw ValidationError("axis_angle_rotation: zero axis");
  const double ux = axis.x / n, uy = axis.y / n, uz = axis.z / n;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r(0, 0) = c + ux * ux * t;
  r(0, 1) = ux * uy * t - uz * s;
  r(0, 2) = ux * uz * t + uy * s;
  r(1, 0) = uy * ux * t + uz * s;
  r(1, 1) = c + uy * uy * t;
  r(1, 2) = uy * uz * t - ux * s;
  r(2, 0) = uz * ux * t - uy * s;
  r(2, 1) = uz * uy * t + ux * s;
  r(2, 2) = c + uz * uz * t;
  return r;
}

}  // namespace viewloom
