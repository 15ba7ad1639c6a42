#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "viewloom/error.hpp"

namespace viewloom {

inline constexpr int kManifestVersion = 1;

enum class SlotKind { image, zero };

// One video slot as serialized: an input image (with its source index) or a
// zero placeholder. Paths are relative to the manifest's directory.
struct SlotRecord {
  SlotKind kind = SlotKind::zero;
  std::optional<std::size_t> source_index;  // image slots only
  std::string frame_path;
  std::string inpaint_mask_path;
  std::string style_mask_path;

  friend bool operator==(const SlotRecord& a, const SlotRecord& b) {
    return a.kind == b.kind && a.source_index == b.source_index &&
           a.frame_path == b.frame_path &&
           a.inpaint_mask_path == b.inpaint_mask_path &&
           a.style_mask_path == b.style_mask_path;
  }
};

// The restorer's operand package: slot layout, style designation, and file
// references for one batch.
struct BatchManifest {
  int version = kManifestVersion;
  int frame_capacity = 0;  // f
  int image_count = 0;     // N
  std::size_t style_slot = 0;
  int height = 0;
  int width = 0;
  std::vector<SlotRecord> slots;

  friend bool operator==(const BatchManifest& a, const BatchManifest& b) {
    return a.version == b.version && a.frame_capacity == b.frame_capacity &&
           a.image_count == b.image_count && a.style_slot == b.style_slot &&
           a.height == b.height && a.width == b.width && a.slots == b.slots;
  }
};

inline void validate_manifest(const BatchManifest& m) {
  if (m.version != kManifestVersion)
    throw ValidationError("manifest version " + std::to_string(m.version) +
                          " not supported (expected " +
                          std::to_string(kManifestVersion) + ")");
  if (m.frame_capacity <= 0 || m.height <= 0 || m.width <= 0)
    throw ValidationError("manifest dimensions must be positive");
  if (m.slots.size() != static_cast<std::size_t>(m.frame_capacity))
    throw ValidationError("manifest slot count does not match frame capacity");
  int images = 0;
  for (std::size_t i = 0; i < m.slots.size(); ++i) {
    const SlotRecord& s = m.slots[i];
    if (s.kind == SlotKind::image) {
      ++images;
      if (!s.source_index)
        throw ValidationError("image slot " + std::to_string(i) +
                              " is missing its source index");
    } else if (s.source_index) {
      throw ValidationError("zero slot " + std::to_string(i) +
                            " must not carry a source index");
    }
    if (s.frame_path.empty() || s.inpaint_mask_path.empty() ||
        s.style_mask_path.empty())
      throw ValidationError("slot " + std::to_string(i) +
                            " has an empty file reference");
  }
  if (images != m.image_count)
    throw ValidationError("manifest image count " +
                          std::to_string(m.image_count) + " but " +
                          std::to_string(images) + " image slots present");
  if (m.image_count < 1)
    throw ValidationError("manifest needs at least one image slot");
  if (m.style_slot >= m.slots.size() ||
      m.slots[m.style_slot].kind != SlotKind::image)
    throw ValidationError("style slot must reference an image slot");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> allowed,
                                const char* where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ParseError(std::string("manifest: unknown key '") + item.key() +
                       "' in " + where);
  }
}

inline int require_int(const nlohmann::json& j, const char* key,
                       const char* where) {
  if (!j.contains(key))
    throw ParseError(std::string("manifest: missing '") + key + "' in " +
                     where);
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    throw ParseError(std::string("manifest: '") + key + "' in " + where +
                     " must be an integer");
  return v.get<int>();
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const char* where) {
  if (!j.contains(key))
    throw ParseError(std::string("manifest: missing '") + key + "' in " +
                     where);
  const auto& v = j.at(key);
  if (!v.is_string())
    throw ParseError(std::string("manifest: '") + key + "' in " + where +
                     " must be a string");
  return v.get<std::string>();
}

inline std::string resolve_path(const std::string& base_dir,
                                const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace detail

inline nlohmann::ordered_json manifest_to_json(const BatchManifest& m) {
  nlohmann::ordered_json j;
  j["version"] = m.version;
  j["frame_capacity"] = m.frame_capacity;
  j["image_count"] = m.image_count;
  j["style_slot"] = m.style_slot;
  j["resolution"] = {{"height", m.height}, {"width", m.width}};
  j["slots"] = nlohmann::ordered_json::array();
  for (const SlotRecord& s : m.slots) {
    nlohmann::ordered_json js;
    js["kind"] = s.kind == SlotKind::image ? "image" : "zero";
    if (s.source_index) js["source_index"] = *s.source_index;
    js["frame_path"] = s.frame_path;
    js["inpaint_mask_path"] = s.inpaint_mask_path;
    js["style_mask_path"] = s.style_mask_path;
    j["slots"].push_back(js);
  }
  return j;
}

inline BatchManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("manifest: top level must be an object");
  detail::reject_unknown_keys(j,
                              {"version", "frame_capacity", "image_count",
                               "style_slot", "resolution", "slots"},
                              "top level");
  BatchManifest m;
  m.version = detail::require_int(j, "version", "top level");
  if (m.version != kManifestVersion)
    throw ParseError("manifest version " + std::to_string(m.version) +
                     " not supported (expected " +
                     std::to_string(kManifestVersion) + ")");
  m.frame_capacity = detail::require_int(j, "frame_capacity", "top level");
  m.image_count = detail::require_int(j, "image_count", "top level");
  const int style = detail::require_int(j, "style_slot", "top level");
  if (style < 0) throw ParseError("manifest: style_slot must be non-negative");
  m.style_slot = static_cast<std::size_t>(style);
  if (!j.contains("resolution") || !j.at("resolution").is_object())
    throw ParseError("manifest: missing resolution object");
  const auto& res = j.at("resolution");
  detail::reject_unknown_keys(res, {"height", "width"}, "resolution");
  m.height = detail::require_int(res, "height", "resolution");
  m.width = detail::require_int(res, "width", "resolution");
  if (!j.contains("slots") || !j.at("slots").is_array())
    throw ParseError("manifest: missing slots array");
  for (const auto& js : j.at("slots")) {
    if (!js.is_object()) throw ParseError("manifest: slot must be an object");
    detail::reject_unknown_keys(js,
                                {"kind", "source_index", "frame_path",
                                 "inpaint_mask_path", "style_mask_path"},
                                "slot");
    SlotRecord s;
    const std::string kind = detail::require_string(js, "kind", "slot");
    if (kind == "image")
      s.kind = SlotKind::image;
    else if (kind == "zero")
      s.kind = SlotKind::zero;
    else
      throw ParseError("manifest: slot kind '" + kind + "' unknown");
    if (js.contains("source_index")) {
      if (!js.at("source_index").is_number_integer() ||
          js.at("source_index").get<long long>() < 0)
        throw ParseError("manifest: source_index must be a non-negative integer");
      s.source_index = js.at("source_index").get<std::size_t>();
    }
    s.frame_path = detail::require_string(js, "frame_path", "slot");
    s.inpaint_mask_path = detail::require_string(js, "inpaint_mask_path", "slot");
    s.style_mask_path = detail::require_string(js, "style_mask_path", "slot");
    m.slots.push_back(std::move(s));
  }
  validate_manifest(m);
  return m;
}

inline void require_referenced_files(const BatchManifest& m,
                                     const std::string& base_dir) {
  for (const SlotRecord& s : m.slots)
    for (const std::string* p :
         {&s.frame_path, &s.inpaint_mask_path, &s.style_mask_path}) {
      const std::string full = detail::resolve_path(base_dir, *p);
      if (!std::filesystem::exists(full))
        throw IoError("manifest references missing file '" + full + "'");
    }
}

// Writes dir/manifest.json. The referenced frames and masks must already be
// on disk; the manifest is the last artifact of a batch directory.
inline std::string write_manifest(const BatchManifest& m,
                                  const std::string& dir) {
  validate_manifest(m);
  require_referenced_files(m, dir);
  const std::string path =
      (std::filesystem::path(dir) / "manifest.json").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << manifest_to_json(m).dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
  return path;
}

inline BatchManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest '" + path + "': " + e.what());
  }
  BatchManifest m = manifest_from_json(j);
  require_referenced_files(
      m, std::filesystem::path(path).parent_path().string());
  return m;
}

}  // namespace viewloom
