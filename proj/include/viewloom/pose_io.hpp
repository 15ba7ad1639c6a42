#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "viewloom/geometry.hpp"

namespace viewloom {

// One image line of a pose file in the images.txt convention:
//   IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME
// followed by a 2D-points line that is ignored. The quaternion/translation
// express camera-from-world; Pose stores the inverse (world-from-camera
// rotation plus camera center).
struct PoseFileEntry {
  long image_id = 0;
  std::array<double, 4> quat{1, 0, 0, 0};  // (w, x, y, z)
  Vec3 translation;                        // camera-from-world t
  long camera_id = 0;
  std::string name;
};

struct PoseFile {
  std::vector<PoseFileEntry> entries;  // file order
  PoseSet set;                         // index i == entries[i]
  std::vector<std::string> names;      // index-aligned image names
  std::unordered_map<std::string, std::size_t> name_to_index;
};

namespace detail {

inline double parse_real(const std::string& tok, int line_no,
                         const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("pose file line " + std::to_string(line_no) + ": bad " +
                     what + " '" + tok + "'");
  }
}

inline long parse_integer(const std::string& tok, int line_no,
                          const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("pose file line " + std::to_string(line_no) + ": bad " +
                     what + " '" + tok + "'");
  }
}

}  // namespace detail

inline PoseFile parse_pose_file(const std::string& text,
                                double weight_r = 0.5) {
  PoseFile out;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  bool expecting_points = false;
  while (std::getline(stream, line)) {
    ++line_no;
    if (expecting_points) {  // 2D-points line, possibly empty; ignored
      expecting_points = false;
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() != 10)
      throw ParseError("pose file line " + std::to_string(line_no) +
                       ": expected 10 fields, got " +
                       std::to_string(tok.size()));
    PoseFileEntry e;
    e.image_id = detail::parse_integer(tok[0], line_no, "image id");
    for (int i = 0; i < 4; ++i)
      e.quat[i] = detail::parse_real(tok[1 + i], line_no, "quaternion");
    e.translation.x = detail::parse_real(tok[5], line_no, "translation");
    e.translation.y = detail::parse_real(tok[6], line_no, "translation");
    e.translation.z = detail::parse_real(tok[7], line_no, "translation");
    e.camera_id = detail::parse_integer(tok[8], line_no, "camera id");
    e.name = tok[9];

    const double qn = std::sqrt(e.quat[0] * e.quat[0] + e.quat[1] * e.quat[1] +
                                e.quat[2] * e.quat[2] + e.quat[3] * e.quat[3]);
    if (std::abs(qn - 1.0) > 1e-3)
      throw ValidationError("pose file line " + std::to_string(line_no) +
                            ": quaternion is not near-unit (norm " +
                            std::to_string(qn) + ")");
    if (out.name_to_index.count(e.name))
      throw ValidationError("duplicate image name '" + e.name + "'");

    const Mat3 cam_from_world =
        quat_to_rotation(e.quat[0], e.quat[1], e.quat[2], e.quat[3]);
    Pose pose;
    pose.rotation = transpose(cam_from_world);
    pose.translation = -1.0 * (pose.rotation * e.translation);  // center
    pose.index = out.entries.size();

    out.name_to_index[e.name] = out.entries.size();
    out.names.push_back(e.name);
    out.entries.push_back(e);
    out.set.poses.push_back(pose);
    expecting_points = true;
  }
  if (out.set.poses.empty())
    throw ValidationError("pose file contains no image entries");
  out.set.weight_r = weight_r;
  if (out.set.poses.size() >= 2) {
    const auto [sr, st] = compute_scales(out.set.poses);
    out.set.scale_r = sr;
    out.set.scale_t = st;
  }
  validate_pose_set(out.set);
  return out;
}

// Serializes poses back to the same convention; inverse of parse_pose_file
// up to floating-point round-trip (%.17g keeps doubles exact).
inline std::string write_pose_file(const PoseSet& set,
                                   const std::vector<std::string>& names,
                                   long camera_id = 1) {
  if (names.size() != set.poses.size())
    throw ValidationError("write_pose_file: name list does not match poses");
  std::string out = "# Image list, one entry per two lines:\n";
  out += "#   IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n";
  out += "#   POINTS2D[] (empty)\n";
  char buf[512];
  for (std::size_t i = 0; i < set.poses.size(); ++i) {
    const Pose& p = set.poses[i];
    const Mat3 cam_from_world = transpose(p.rotation);
    const auto q = rotation_to_quat(cam_from_world);
    const Vec3 t = -1.0 * (cam_from_world * p.translation);
    std::snprintf(buf, sizeof(buf),
                  "%zu %.17g %.17g %.17g %.17g %.17g %.17g %.17g %ld %s\n",
                  i + 1, q[0], q[1], q[2], q[3], t.x, t.y, t.z, camera_id,
                  names[i].c_str());
    out += buf;
    out += "\n";  // empty 2D-points line
  }
  return out;
}

inline PoseFile load_pose_file(const std::string& path, double weight_r = 0.5) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pose_file(buf.str(), weight_r);
}

inline void save_pose_file(const std::string& path, const PoseSet& set,
                           const std::vector<std::string>& names,
                           long camera_id = 1) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << write_pose_file(set, names, camera_id);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace viewloom
