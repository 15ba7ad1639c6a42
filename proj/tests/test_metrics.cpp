#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "viewloom/metrics.hpp"
#include "viewloom/random.hpp"

using namespace viewloom;

namespace {

// deterministic integer-arithmetic fixtures; the frozen SSIM constants below
// were produced by an independent reference implementation on exactly these
// arrays
Image fixture_a() {
  Image img(48, 64, 3);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) =
            static_cast<std::uint8_t>((31 * y + 17 * x + 11 * c + (x * y) % 7) % 256);
  return img;
}

Image fixture_b() {
  Image img(48, 64, 3);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<std::uint8_t>(
            (7 * y + 31 * x + 23 * c + (x * x + y * y) % 13) % 256);
  return img;
}

Image fixture_g1() {
  Image img(48, 64, 1);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      img.at(y, x, 0) =
          static_cast<std::uint8_t>((13 * y + 5 * x + (x * y) % 5) % 256);
  return img;
}

Image fixture_g2() {
  Image img(48, 64, 1);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x)
      img.at(y, x, 0) =
          static_cast<std::uint8_t>((11 * y + 19 * x + (x + y) % 9) % 256);
  return img;
}

Image negate(const Image& src) {
  Image out = src;
  for (auto& v : out.data) v = static_cast<std::uint8_t>(255 - v);
  return out;
}

double aligned_mse(const Image& pred, const Image& gt, double da, double db) {
  // recompute the alignment error with perturbed coefficients, float space
  const AlignResult base = affine_align(pred, gt);
  double sum = 0.0;
  for (int c = 0; c < pred.channels; ++c) {
    const double a = base.fit.gain[c] + da;
    const double b = base.fit.offset[c] + db;
    for (int y = 0; y < pred.height; ++y)
      for (int x = 0; x < pred.width; ++x) {
        const double e = a * pred.at(y, x, c) + b - gt.at(y, x, c);
        sum += e * e;
      }
  }
  return sum / (pred.pixel_count() * pred.channels);
}

}  // namespace

TEST_CASE("affine_align recovers a planted affine map") {
  // gt channel values are even, so pred = 0.5*gt + 20 is integral and
  // in-range; the inverse map gt = 2*pred - 40 must be recovered exactly
  Image gt(20, 30, 3);
  Image pred(20, 30, 3);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x)
      for (int c = 0; c < 3; ++c) {
        const int g = 60 + 2 * ((y + 3 * x + 7 * c) % 80);
        gt.at(y, x, c) = static_cast<std::uint8_t>(g);
        pred.at(y, x, c) = static_cast<std::uint8_t>(g / 2 + 20);
      }

  const AlignResult res = affine_align(pred, gt);
  for (int c = 0; c < 3; ++c) {
    CHECK_THAT(res.fit.gain[c], Catch::Matchers::WithinAbs(2.0, 1e-6));
    CHECK_THAT(res.fit.offset[c], Catch::Matchers::WithinAbs(-40.0, 1e-6));
  }
  CHECK(res.fit.residual < 1e-12);
  CHECK(res.aligned == gt);
}

TEST_CASE("affine_align self and degenerate cases") {
  const Image a = fixture_a();

  SECTION("self-alignment is the identity map") {
    const AlignResult res = affine_align(a, a);
    for (int c = 0; c < 3; ++c) {
      CHECK_THAT(res.fit.gain[c], Catch::Matchers::WithinAbs(1.0, 1e-9));
      CHECK_THAT(res.fit.offset[c], Catch::Matchers::WithinAbs(0.0, 1e-6));
    }
    CHECK(res.fit.residual < 1e-12);
  }
  SECTION("constant prediction falls back to the gt mean") {
    const Image flat(48, 64, 3, 77);
    const AlignResult res = affine_align(flat, a);
    for (int c = 0; c < 3; ++c) {
      CHECK(res.fit.gain[c] == 0.0);
      double mean = 0.0;
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) mean += a.at(y, x, c);
      mean /= 48.0 * 64.0;
      CHECK_THAT(res.fit.offset[c], Catch::Matchers::WithinAbs(mean, 1e-9));
    }
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(affine_align(a, Image(48, 63, 3)), ValidationError);
  }
}

TEST_CASE("affine fit is a least-squares optimum") {
  const Image pred = fixture_a();
  const Image gt = fixture_b();
  const AlignResult res = affine_align(pred, gt);

  const double at_fit = aligned_mse(pred, gt, 0, 0);
  CHECK_THAT(at_fit, Catch::Matchers::WithinRel(res.fit.residual, 1e-12));

  for (const double da : {-1e-3, 0.0, 1e-3})
    for (const double db : {-1e-3, 0.0, 1e-3}) {
      if (da == 0.0 && db == 0.0) continue;
      CHECK(aligned_mse(pred, gt, da, db) >= at_fit);
    }

  // identity coefficients are feasible, so aligning never hurts
  CHECK(res.fit.residual <= mse(pred, gt) + 1e-9);
}

TEST_CASE("psnr reference points") {
  const Image a = fixture_a();

  CHECK(psnr(a, a) == kPsnrCap);

  Image off_by_one = a;
  for (auto& v : off_by_one.data)
    v = static_cast<std::uint8_t>(v < 255 ? v + 1 : v - 1);
  CHECK_THAT(psnr(a, off_by_one),
             Catch::Matchers::WithinAbs(48.130803608679, 1e-9));

  CHECK_THAT(psnr_from_mse(100.0),
             Catch::Matchers::WithinAbs(28.130803608679, 1e-9));
  CHECK(psnr_from_mse(0.0) == kPsnrCap);

  // monotone decreasing in the error
  double prev = psnr_from_mse(0.5);
  for (double m : {1.0, 2.0, 10.0, 100.0, 5000.0}) {
    const double cur = psnr_from_mse(m);
    CHECK(cur < prev);
    prev = cur;
  }

  CHECK_THROWS_AS(psnr(a, Image(10, 10, 3)), ValidationError);
}

TEST_CASE("ssim reference values") {
  const Image a = fixture_a();
  const Image b = fixture_b();

  CHECK_THAT(ssim(a, a), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(ssim(a, b),
             Catch::Matchers::WithinAbs(0.034316936858334, 1e-9));
  CHECK_THAT(ssim(a, negate(a)),
             Catch::Matchers::WithinAbs(-0.914684231641090, 1e-9));
  CHECK_THAT(ssim(fixture_g1(), fixture_g2()),
             Catch::Matchers::WithinAbs(0.145003122491712, 1e-9));
}

TEST_CASE("ssim properties") {
  const Image a = fixture_a();
  const Image b = fixture_b();

  CHECK_THAT(ssim(a, b), Catch::Matchers::WithinAbs(ssim(b, a), 1e-12));
  CHECK(ssim(a, b) >= -1.0);
  CHECK(ssim(a, b) <= 1.0);
  CHECK(ssim(a, negate(a)) < 0.0);

  CHECK_THROWS_AS(ssim(Image(10, 40, 3), Image(10, 40, 3)), ValidationError);
  CHECK_THROWS_AS(ssim(a, Image(48, 63, 3)), ValidationError);

  // the 11x11 minimum is accepted
  CHECK_NOTHROW(ssim(Image(11, 11, 3, 128), Image(11, 11, 3, 128)));
}

TEST_CASE("evaluate") {
  const Image a = fixture_a();
  const Image b = fixture_b();

  SECTION("perfect predictions hit the cap") {
    const EvalReport r = evaluate({a, b}, {a, b});
    REQUIRE(r.per_image.size() == 2);
    for (const auto& e : r.per_image) {
      CHECK(e.psnr_raw == kPsnrCap);
      REQUIRE(e.psnr_aligned.has_value());
      CHECK(*e.psnr_aligned == kPsnrCap);
      CHECK_THAT(e.ssim_raw, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    CHECK(r.mean.psnr_raw == kPsnrCap);
  }
  SECTION("global tint: aligned psnr at least raw psnr") {
    std::vector<Image> pred, gt;
    Rng rng(42);
    for (int i = 0; i < 4; ++i) {
      Image g(32, 32, 3);
      for (auto& v : g.data)
        v = static_cast<std::uint8_t>(rng.uniform_int(40, 215));
      Image p = g;
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
          p.at(y, x, 0) = clamp_to_u8(0.9 * p.at(y, x, 0) + 12.0);
          p.at(y, x, 1) = clamp_to_u8(1.05 * p.at(y, x, 1) - 6.0);
          p.at(y, x, 2) = clamp_to_u8(0.8 * p.at(y, x, 2) + 25.0);
        }
      gt.push_back(g);
      pred.push_back(p);
    }
    const EvalReport r = evaluate(pred, gt);
    for (const auto& e : r.per_image) {
      REQUIRE(e.psnr_aligned.has_value());
      CHECK(*e.psnr_aligned >= e.psnr_raw);
      CHECK(*e.psnr_aligned > 40.0);  // tint nearly removed
    }
    CHECK(*r.mean.psnr_aligned >= r.mean.psnr_raw);
  }
  SECTION("single pair reduces to the scalar ops") {
    const EvalReport r = evaluate({a}, {b});
    REQUIRE(r.per_image.size() == 1);
    CHECK(r.per_image[0].psnr_raw == psnr(a, b));
    CHECK(r.per_image[0].ssim_raw == ssim(a, b));
    CHECK(r.mean.psnr_raw == r.per_image[0].psnr_raw);
  }
  SECTION("aligned metrics can be switched off") {
    const EvalReport r = evaluate({a}, {b}, false);
    CHECK_FALSE(r.per_image[0].psnr_aligned.has_value());
    CHECK_FALSE(r.mean.psnr_aligned.has_value());
  }
  SECTION("unpaired sets rejected") {
    CHECK_THROWS_AS(evaluate({a, b}, {a}), ValidationError);
    CHECK_THROWS_AS(evaluate({}, {}), ValidationError);
  }
}
