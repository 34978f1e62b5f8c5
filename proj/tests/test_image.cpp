#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "patchfill/image.hpp"

using namespace pf;
using namespace testutil;

TEST_CASE("pyramid level count follows the halving rule") {
    SUBCASE("4096x3072 min 64 gives 7 levels") {
        PlaneImage img(4096, 3072, 3, 0.5f);
        HoleMask mask = rect_mask(4096, 3072, 100, 100, 50, 50);
        ImagePyramid p = build_pyramid(img, mask, 64);
        REQUIRE(p.depth() == 7);
        int expected[] = {4096, 2048, 1024, 512, 256, 128, 64};
        for (int l = 0; l < 7; ++l) CHECK(p.images[l].long_edge() == expected[l]);
        // level dims are ceil(level0 / 2^L)
        for (int l = 0; l < 7; ++l) {
            CHECK(p.images[l].width == (4096 + (1 << l) - 1) / (1 << l));
            CHECK(p.images[l].height == (3072 + (1 << l) - 1) / (1 << l));
            CHECK(p.masks[l].width == p.images[l].width);
            CHECK(p.masks[l].height == p.images[l].height);
        }
    }
    SUBCASE("64x64 min 64 gives 1 level") {
        PlaneImage img(64, 64, 3, 0.5f);
        HoleMask mask = rect_mask(64, 64, 10, 10, 5, 5);
        CHECK(build_pyramid(img, mask, 64).depth() == 1);
    }
    SUBCASE("100x60 min 32 gives 2 levels") {
        PlaneImage img(100, 60, 3, 0.5f);
        HoleMask mask = rect_mask(100, 60, 10, 10, 5, 5);
        ImagePyramid p = build_pyramid(img, mask, 32);
        REQUIRE(p.depth() == 2);
        CHECK(p.images[0].long_edge() == 100);
        CHECK(p.images[1].long_edge() == 50);
    }
    SUBCASE("level 0 is the input unmodified") {
        PlaneImage img = make_texture(80, 60, 3);
        HoleMask mask = rect_mask(80, 60, 20, 20, 10, 10);
        ImagePyramid p = build_pyramid(img, mask, 32);
        CHECK(same_pixels(p.images[0], img));
        CHECK(p.masks[0].data == mask.data);
    }
}

TEST_CASE("mask downsampling uses the any-rule") {
    SUBCASE("2x2 with one hole pixel becomes a 1x1 hole") {
        HoleMask m(2, 2, 0);
        m.at(1, 0) = 1;
        HoleMask d = downsample_mask_any2(m);
        REQUIRE(d.width == 1);
        REQUIRE(d.height == 1);
        CHECK(d.at(0, 0) == 1);
    }
    SUBCASE("all-false 4x4 stays all-false") {
        HoleMask m(4, 4, 0);
        HoleMask d = downsample_mask_any2(m);
        CHECK(d.hole_count() == 0);
    }
    SUBCASE("checkerboard 4x4 becomes all-true 2x2") {
        HoleMask m(4, 4, 0);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) m.at(x, y) = (x + y) % 2;
        HoleMask d = downsample_mask_any2(m);
        REQUIRE(d.width == 2);
        CHECK(d.hole_count() == 4);
    }
    SUBCASE("hole fraction is non-decreasing down the pyramid") {
        PlaneImage img = make_texture(128, 96, 9);
        HoleMask mask = rect_mask(128, 96, 30, 20, 27, 19);
        ImagePyramid p = build_pyramid(img, mask, 16);
        double prev = static_cast<double>(p.masks[0].hole_count()) / p.masks[0].data.size();
        for (int l = 1; l < p.depth(); ++l) {
            double frac = static_cast<double>(p.masks[l].hole_count()) / p.masks[l].data.size();
            CHECK(frac >= prev - 1e-12);
            prev = frac;
        }
    }
}

TEST_CASE("composite selects per pixel") {
    PlaneImage base = make_texture(32, 24, 1);
    PlaneImage synth = make_texture(32, 24, 2);
    SUBCASE("empty mask returns base") {
        HoleMask m(32, 24, 0);
        CHECK(same_pixels(composite(base, synth, m), base));
    }
    SUBCASE("full mask except one pixel keeps exactly that base pixel") {
        HoleMask m(32, 24, 1);
        m.at(5, 7) = 0;
        PlaneImage out = composite(base, synth, m);
        size_t from_base = 0;
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 32; ++x) {
                bool eq = true;
                for (int c = 0; c < 3; ++c) eq &= out.at(x, y, c) == base.at(x, y, c);
                bool eq_s = true;
                for (int c = 0; c < 3; ++c) eq_s &= out.at(x, y, c) == synth.at(x, y, c);
                if (eq && !eq_s) ++from_base;
            }
        CHECK(from_base == 1);
        CHECK(out.at(5, 7, 0) == base.at(5, 7, 0));
    }
    SUBCASE("random mask matches the per-pixel oracle") {
        Rng rng(77);
        HoleMask m(32, 24, 0);
        for (auto& v : m.data) v = static_cast<uint8_t>(rng.below(2));
        PlaneImage out = composite(base, synth, m);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 32; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(out.at(x, y, c) == (m.at(x, y) ? synth.at(x, y, c) : base.at(x, y, c)));
    }
    SUBCASE("composite(base, base, mask) == base") {
        Rng rng(78);
        HoleMask m(32, 24, 0);
        for (auto& v : m.data) v = static_cast<uint8_t>(rng.below(2));
        CHECK(same_pixels(composite(base, base, m), base));
    }
}

TEST_CASE("resampling pair round-trip is a fixed point") {
    // downsample, nearest-upsample back, downsample again: the second
    // downsample must reproduce the first exactly.
    for (uint64_t seed : {11u, 12u, 13u}) {
        PlaneImage img = make_texture(37, 29, seed);  // odd dims stress ceil halving
        PlaneImage down = downsample_box2(img);
        PlaneImage up = upsample_nearest2(down, img.width, img.height);
        PlaneImage down2 = downsample_box2(up);
        CHECK(same_pixels(down, down2));
    }
}

TEST_CASE("bilinear resize matches a hand oracle on a 2x2 image") {
    PlaneImage img(2, 2, 1);
    img.at(0, 0) = 0.f;
    img.at(1, 0) = 1.f;
    img.at(0, 1) = 0.f;
    img.at(1, 1) = 1.f;
    PlaneImage out = resize_bilinear(img, 4, 4);
    REQUIRE(out.width == 4);
    // center-aligned: sample x maps to (x+0.5)*sw/dw - 0.5
    for (int x = 0; x < 4; ++x) {
        double sx = (x + 0.5) * 2.0 / 4.0 - 0.5;
        double clamped = std::clamp(sx, 0.0, 1.0);
        double expect = clamped;  // linear ramp between the two columns
        CHECK(out.at(x, 1) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("area resize preserves the global mean on exact factors") {
    PlaneImage img = make_texture(64, 48, 5);
    PlaneImage small = resize_area(img, 16, 12);
    double m0 = 0, m1 = 0;
    for (float v : img.data) m0 += v;
    for (float v : small.data) m1 += v;
    m0 /= img.data.size();
    m1 /= small.data.size();
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-5));
}

TEST_CASE("mask any-rule resize marks exactly the covered holes") {
    HoleMask m = rect_mask(64, 64, 10, 10, 3, 3);
    HoleMask small = resize_mask_any(m, 16, 16);
    // source pixels 10..12 map to target bins floor(10/4)..floor(12/4) = 2..3
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            CHECK((small.at(x, y) != 0) == (x >= 2 && x <= 3 && y >= 2 && y <= 3));
}

TEST_CASE("dilate_mask grows by the Chebyshev radius") {
    HoleMask m = rect_mask(20, 20, 8, 8, 2, 2);
    HoleMask d = dilate_mask(m, 3);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) {
            bool inside = x >= 5 && x <= 12 && y >= 5 && y <= 12;
            CHECK((d.at(x, y) != 0) == inside);
        }
    CHECK(dilate_mask(m, 0).data == m.data);
}

TEST_CASE("mask_bbox finds the tight box") {
    HoleMask m = rect_mask(40, 30, 12, 7, 5, 9);
    CropRect r;
    REQUIRE(mask_bbox(m, &r));
    CHECK(r.x == 12);
    CHECK(r.y == 7);
    CHECK(r.width == 5);
    CHECK(r.height == 9);
    HoleMask empty(40, 30, 0);
    CHECK_FALSE(mask_bbox(empty, &r));
}

TEST_CASE("extract_crop round-trips and bounds-checks") {
    PlaneImage img = make_texture(40, 30, 21);
    CropRect r{5, 8, 16, 12};
    PlaneImage crop = extract_crop(img, r);
    REQUIRE(crop.width == 16);
    REQUIRE(crop.height == 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < 3; ++c) CHECK(crop.at(x, y, c) == img.at(x + 5, y + 8, c));
    CHECK_THROWS_AS(extract_crop(img, CropRect{30, 0, 16, 12}), InputError);
}

TEST_CASE("gaussian blur preserves constants and mass") {
    PlaneImage img(31, 23, 3, 0.37f);
    PlaneImage out = gaussian_blur(img, 2.0);
    for (float v : out.data) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
}

TEST_CASE("luminance uses Rec.601 weights") {
    CHECK(luminance(1.f, 0.f, 0.f) == doctest::Approx(0.299).epsilon(1e-6));
    CHECK(luminance(0.f, 1.f, 0.f) == doctest::Approx(0.587).epsilon(1e-6));
    CHECK(luminance(0.f, 0.f, 1.f) == doctest::Approx(0.114).epsilon(1e-6));
    CHECK(luminance(1.f, 1.f, 1.f) == doctest::Approx(1.0).epsilon(1e-6));
}
