#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "viewloom/manifest.hpp"
#include "viewloom/masks.hpp"
#include "viewloom/png_io.hpp"
#include "viewloom/pose_io.hpp"
#include "viewloom/random.hpp"

using namespace viewloom;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path = fs::temp_directory_path() /
           ("viewloom_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

PoseSet random_set(Rng& rng, std::size_t k) {
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < k; ++i) {
    Pose p;
    const Vec3 axis{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (axis.norm() > 1e-3)
      p.rotation = axis_angle_rotation(axis, rng.uniform(0.0, kPi));
    p.translation = {rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9)};
    p.index = i;
    poses.push_back(p);
  }
  return make_pose_set(std::move(poses));
}

Image random_image(Rng& rng, int h, int w, int c) {
  Image img(h, w, c);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

// write_png stays 1/3-channel on purpose; RGBA fixtures go through libpng.
void write_rgba_fixture(const std::string& path, const Image& img) {
  REQUIRE(img.channels == 4);
  FILE* fp = std::fopen(path.c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGBA,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(
                           &img.data[static_cast<std::size_t>(y) * img.width *
                                     4]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// materializes a full batch directory and returns its manifest
BatchManifest write_batch_fixture(const TempDir& dir, int f, int n_images,
                                  int h, int w) {
  Rng rng(4242);
  const FramePlan plan =
      build_frame_plan(n_images, allocate_zero_frames(
                                     std::vector<double>(n_images - 1, 1.0),
                                     n_images, f));
  BatchManifest m;
  m.frame_capacity = f;
  m.image_count = n_images;
  m.style_slot = 0;
  m.height = h;
  m.width = w;
  const auto inpaint = make_inpaint_masks(plan, h, w);
  const auto style = make_style_masks(plan, 0, h, w);
  char name[64];
  for (int i = 0; i < f; ++i) {
    SlotRecord s;
    if (plan.slots[i].is_image) {
      s.kind = SlotKind::image;
      s.source_index = plan.slots[i].image_pos;
    }
    std::snprintf(name, sizeof(name), "frame_%03d.png", i);
    s.frame_path = name;
    write_png(dir.file(name),
              plan.slots[i].is_image ? random_image(rng, h, w, 3)
                                     : Image(h, w, 3, 0));
    std::snprintf(name, sizeof(name), "inpaint_%03d.png", i);
    s.inpaint_mask_path = name;
    write_mask_png(dir.file(name), inpaint[i]);
    std::snprintf(name, sizeof(name), "style_%03d.png", i);
    s.style_mask_path = name;
    write_mask_png(dir.file(name), style[i]);
    m.slots.push_back(s);
  }
  return m;
}

}  // namespace

TEST_CASE("pose file parsing basics") {
  SECTION("identity entry maps to the origin") {
    const std::string text =
        "1 1 0 0 0 0 0 0 1 a.png\n"
        "\n";
    const PoseFile pf = parse_pose_file(text);
    REQUIRE(pf.set.poses.size() == 1);
    CHECK(pf.set.poses[0].rotation == Mat3::identity());
    CHECK(pf.set.poses[0].translation.norm() == 0.0);
    CHECK(pf.names == std::vector<std::string>{"a.png"});
    CHECK(pf.name_to_index.at("a.png") == 0);
    CHECK(pf.entries[0].camera_id == 1);
  }
  SECTION("camera center is -R^T t") {
    // quaternion (0,1,0,0): 180 degrees about x, self-inverse
    const std::string text =
        "7 0 1 0 0 1 2 3 4 b.png\n"
        "\n";
    const PoseFile pf = parse_pose_file(text);
    const Pose& p = pf.set.poses[0];
    CHECK_THAT(p.translation.x, Catch::Matchers::WithinAbs(-1.0, 1e-12));
    CHECK_THAT(p.translation.y, Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(p.translation.z, Catch::Matchers::WithinAbs(3.0, 1e-12));
    CHECK(pf.entries[0].image_id == 7);
    CHECK(pf.entries[0].camera_id == 4);
  }
  SECTION("comments and blank points lines") {
    const std::string text =
        "# Image list\n"
        "# more commentary\n"
        "1 1 0 0 0 0 0 0 1 a.png\n"
        "10 20.5 30.5 1 1 0 0 0 0 1\n"  // points line: ignored, any shape
        "2 1 0 0 0 5 0 0 1 b.png\n"
        "\n";
    const PoseFile pf = parse_pose_file(text);
    CHECK(pf.set.poses.size() == 2);
    CHECK(pf.names[1] == "b.png");
  }
  SECTION("comment-only file is an empty set") {
    CHECK_THROWS_AS(parse_pose_file("# nothing\n# here\n"), ValidationError);
    CHECK_THROWS_AS(parse_pose_file(""), ValidationError);
  }
}

TEST_CASE("pose file rejects malformed input") {
  SECTION("wrong field count names the line") {
    try {
      parse_pose_file("1 1 0 0 0 0 0 0 1 a.png\n\n1 2 3\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SECTION("non-numeric quaternion") {
    CHECK_THROWS_AS(parse_pose_file("1 one 0 0 0 0 0 0 1 a.png\n\n"),
                    ParseError);
  }
  SECTION("trailing junk in a number") {
    CHECK_THROWS_AS(parse_pose_file("1 1.0x 0 0 0 0 0 0 1 a.png\n\n"),
                    ParseError);
  }
  SECTION("far-from-unit quaternion") {
    CHECK_THROWS_AS(parse_pose_file("1 2 0 0 0 0 0 0 1 a.png\n\n"),
                    ValidationError);
  }
  SECTION("duplicate image name") {
    const std::string text =
        "1 1 0 0 0 0 0 0 1 a.png\n"
        "\n"
        "2 1 0 0 0 1 0 0 1 a.png\n"
        "\n";
    CHECK_THROWS_AS(parse_pose_file(text), ValidationError);
  }
}

TEST_CASE("pose file round trip") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 9));
    const PoseSet set = random_set(rng, k);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i)
      names.push_back("img_" + std::to_string(i) + ".png");

    const PoseFile back = parse_pose_file(write_pose_file(set, names));
    REQUIRE(back.set.poses.size() == k);
    CHECK(back.names == names);
    for (std::size_t i = 0; i < k; ++i) {
      for (int e = 0; e < 9; ++e)
        CHECK_THAT(back.set.poses[i].rotation.m[e],
                   Catch::Matchers::WithinAbs(set.poses[i].rotation.m[e], 1e-9));
      CHECK_THAT(back.set.poses[i].translation.x,
                 Catch::Matchers::WithinAbs(set.poses[i].translation.x, 1e-9));
      CHECK_THAT(back.set.poses[i].translation.y,
                 Catch::Matchers::WithinAbs(set.poses[i].translation.y, 1e-9));
      CHECK_THAT(back.set.poses[i].translation.z,
                 Catch::Matchers::WithinAbs(set.poses[i].translation.z, 1e-9));
    }
  }
}

TEST_CASE("pose file disk round trip") {
  TempDir dir("poses");
  Rng rng(101);
  const PoseSet set = random_set(rng, 5);
  const std::vector<std::string> names{"a.png", "b.png", "c.png", "d.png",
                                       "e.png"};
  save_pose_file(dir.file("images.txt"), set, names, 3);
  const PoseFile back = load_pose_file(dir.file("images.txt"));
  CHECK(back.names == names);
  CHECK(back.entries[0].camera_id == 3);
  CHECK_THROWS_AS(load_pose_file(dir.file("missing.txt")), IoError);
}

TEST_CASE("image png round trip") {
  TempDir dir("png");
  Rng rng(9);

  SECTION("color") {
    const Image img = random_image(rng, 13, 17, 3);
    write_png(dir.file("c.png"), img);
    CHECK(read_png(dir.file("c.png")) == img);
  }
  SECTION("grayscale") {
    const Image img = random_image(rng, 9, 4, 1);
    write_png(dir.file("g.png"), img);
    CHECK(read_png(dir.file("g.png")) == img);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_png(dir.file("nope.png")), IoError);
  }
  SECTION("unsupported channel count") {
    CHECK_THROWS_AS(write_png(dir.file("x.png"), Image(4, 4, 4)),
                    ValidationError);
  }
  SECTION("alpha survives decoding") {
    const Image img = random_image(rng, 11, 6, 4);
    write_rgba_fixture(dir.file("a.png"), img);
    const Image back = read_png(dir.file("a.png"));
    CHECK(back == img);

    const Image rgb = convert_to_rgb(back);
    REQUIRE(rgb.channels == 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < 3; ++c) CHECK(rgb.at(y, x, c) == img.at(y, x, c));

    CHECK_THROWS_AS(read_mask_png(dir.file("a.png")), ParseError);
  }
}

TEST_CASE("mask png round trip") {
  TempDir dir("mask");
  Rng rng(12);

  BinaryMask mask(21, 34, 0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      mask.at(y, x) = rng.uniform() < 0.3 ? 1 : 0;

  write_mask_png(dir.file("m.png"), mask);
  CHECK(read_mask_png(dir.file("m.png")) == mask);

  SECTION("all-ones and all-zeros") {
    write_mask_png(dir.file("ones.png"), BinaryMask(5, 5, 1));
    CHECK(read_mask_png(dir.file("ones.png")).all_of(1));
    write_mask_png(dir.file("zeros.png"), BinaryMask(5, 5, 0));
    CHECK(read_mask_png(dir.file("zeros.png")).all_of(0));
  }
  SECTION("non-binary pixel values are rejected with the value named") {
    Image gray(3, 3, 1, 0);
    gray.at(1, 1, 0) = 7;
    write_png(dir.file("bad.png"), gray);
    try {
      read_mask_png(dir.file("bad.png"));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find('7') != std::string::npos);
    }
  }
  SECTION("color images are not masks") {
    write_png(dir.file("rgb.png"), Image(4, 4, 3, 255));
    CHECK_THROWS_AS(read_mask_png(dir.file("rgb.png")), ParseError);
  }
}

TEST_CASE("manifest round trips") {
  SECTION("minimal two-slot manifest") {
    TempDir dir("mini");
    const BatchManifest m = write_batch_fixture(dir, 2, 2, 6, 8);
    const std::string path = write_manifest(m, dir.str());
    CHECK(read_manifest(path) == m);
  }
  SECTION("full 25-slot manifest from a real plan") {
    TempDir dir("full");
    const BatchManifest m = write_batch_fixture(dir, 25, 5, 6, 8);
    const std::string path = write_manifest(m, dir.str());
    const BatchManifest back = read_manifest(path);
    CHECK(back == m);

    // byte-stable re-serialization: capture, rewrite from the parsed copy,
    // compare
    std::string t1, t2;
    {
      std::ifstream f(path);
      t1.assign(std::istreambuf_iterator<char>(f),
                std::istreambuf_iterator<char>());
    }
    write_manifest(back, dir.str());
    {
      std::ifstream f(path);
      t2.assign(std::istreambuf_iterator<char>(f),
                std::istreambuf_iterator<char>());
    }
    CHECK(t1 == t2);
  }
}

TEST_CASE("manifest integrity checks") {
  TempDir dir("integrity");
  BatchManifest m = write_batch_fixture(dir, 5, 2, 4, 4);
  const std::string path = write_manifest(m, dir.str());

  SECTION("deleted mask file is reported by name") {
    fs::remove(dir.file("inpaint_002.png"));
    try {
      read_manifest(path);
      FAIL("expected an io error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("inpaint_002.png") != std::string::npos);
    }
  }
  SECTION("write refuses dangling references") {
    BatchManifest bad = m;
    bad.slots[0].frame_path = "absent.png";
    CHECK_THROWS_AS(write_manifest(bad, dir.str()), IoError);
  }
  SECTION("validation rejects structural corruption") {
    BatchManifest v = m;
    v.version = 2;
    CHECK_THROWS_AS(validate_manifest(v), ValidationError);

    BatchManifest style_on_zero = m;
    style_on_zero.style_slot = 2;  // a zero slot in this fixture
    CHECK_THROWS_AS(validate_manifest(style_on_zero), ValidationError);

    BatchManifest wrong_count = m;
    wrong_count.image_count = 3;
    CHECK_THROWS_AS(validate_manifest(wrong_count), ValidationError);

    BatchManifest zero_with_source = m;
    zero_with_source.slots[2].source_index = 0;
    CHECK_THROWS_AS(validate_manifest(zero_with_source), ValidationError);

    BatchManifest empty_path = m;
    empty_path.slots[1].style_mask_path.clear();
    CHECK_THROWS_AS(validate_manifest(empty_path), ValidationError);

    BatchManifest missing_source = m;
    missing_source.slots[0].source_index.reset();
    CHECK_THROWS_AS(validate_manifest(missing_source), ValidationError);
  }
}

TEST_CASE("mutated manifests are rejected or parse to valid state") {
  TempDir dir("fuzz");
  const BatchManifest m = write_batch_fixture(dir, 25, 5, 4, 4);
  const std::string path = write_manifest(m, dir.str());
  std::ifstream in(path);
  const std::string base((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  REQUIRE(base.size() > 100);

  Rng rng(20250817);
  const std::string scratch = dir.file("mutated.json");
  int parsed_ok = 0, rejected = 0;

  for (int trial = 0; trial < 1000; ++trial) {
    std::string text = base;
    const int edits = static_cast<int>(rng.uniform_int(1, 4));
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(text.size()) - 1));
      switch (rng.uniform_int(0, 3)) {
        case 0:  // overwrite with a random printable byte
          text[pos] = static_cast<char>(rng.uniform_int(32, 126));
          break;
        case 1:  // delete
          text.erase(pos, 1);
          break;
        case 2:  // insert
          text.insert(pos, 1, static_cast<char>(rng.uniform_int(32, 126)));
          break;
        case 3:  // truncate
          text.resize(pos + 1);
          break;
      }
      if (text.empty()) text = "x";
    }

    {
      std::ofstream out(scratch, std::ios::binary | std::ios::trunc);
      out << text;
    }
    try {
      const BatchManifest back = read_manifest(scratch);
      validate_manifest(back);  // anything accepted must be structurally sound
      ++parsed_ok;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed_ok + rejected == 1000);
  CHECK(rejected > 500);  // random edits overwhelmingly break something
}
