#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "patchfill/curation.hpp"

using namespace pf;
using namespace testutil;

namespace {

// Independent re-implementation of the documented crop rule.
CropRect crop_oracle(const HoleMask& mask, const AutoCropParams& p) {
    CropRect bbox;
    REQUIRE(mask_bbox(mask, &bbox));
    const double holes = static_cast<double>(mask.hole_count());
    double side = std::max({static_cast<double>(p.base), static_cast<double>(bbox.width),
                            static_cast<double>(bbox.height)});
    while (side < mask.width && side < mask.height && holes >= p.tau * side * side)
        side *= p.gamma;
    const int s = static_cast<int>(std::ceil(side));
    auto axis = [&](double center, int extent, int* pos, int* len) {
        if (s >= extent) {
            *pos = 0;
            *len = extent;
        } else {
            *pos = std::clamp(static_cast<int>(std::lround(center - s / 2.0)), 0,
                              extent - s);
            *len = s;
        }
    };
    CropRect out;
    axis(bbox.x + bbox.width / 2.0, mask.width, &out.x, &out.width);
    axis(bbox.y + bbox.height / 2.0, mask.height, &out.y, &out.height);
    return out;
}

struct FixedScorer : Scorer {
    PairwiseVerdict v;
    std::atomic<int> calls{0};
    explicit FixedScorer(PairwiseVerdict verdict) : v(verdict) {}
    PairwiseVerdict judge(const PlaneImage&, const PlaneImage&, const HoleMask&) override {
        ++calls;
        return v;
    }
    std::string identity() const override { return "fixed"; }
};

// Content-keyed scorer that is antisymmetric by construction: softmax over the
// difference of per-image means.
struct MeanScorer : Scorer {
    PairwiseVerdict judge(const PlaneImage& left, const PlaneImage& right,
                          const HoleMask&) override {
        auto mean = [](const PlaneImage& im) {
            double s = 0;
            for (float f : im.data) s += f;
            return s / static_cast<double>(im.data.size());
        };
        const double d = (mean(right) - mean(left)) / 0.05;
        const double el = std::exp(d), er = std::exp(-d);
        const double sum = el + 1.0 + er;
        return {el / sum, 1.0 / sum, er / sum};
    }
    std::string identity() const override { return "mean"; }
};

std::vector<PlaneImage> constant_crops(int n, int size) {
    std::vector<PlaneImage> out;
    for (int i = 0; i < n; ++i)
        out.emplace_back(size, size, 3, static_cast<float>(i + 1) / (n + 1));
    return out;
}

}  // namespace

TEST_CASE("auto_crop pinned cases") {
    SUBCASE("small hole keeps the base square") {
        HoleMask mask(4000, 3000, 0);
        for (int y = 1400; y < 1600; ++y)
            for (int x = 1900; x < 2100; ++x) mask.at(x, y) = 1;
        CropRect r = auto_crop(mask);
        CHECK(r == CropRect{1744, 1244, 512, 512});
    }
    SUBCASE("solid 600px hole grows to 1248") {
        HoleMask mask(3000, 3000, 0);
        for (int y = 1200; y < 1800; ++y)
            for (int x = 1200; x < 1800; ++x) mask.at(x, y) = 1;
        CropRect r = auto_crop(mask);
        CHECK(r == CropRect{876, 876, 1248, 1248});
    }
    SUBCASE("base larger than the image covers both axes") {
        HoleMask mask(300, 400, 0);
        for (int y = 150; y < 250; ++y)
            for (int x = 100; x < 200; ++x) mask.at(x, y) = 1;
        CropRect r = auto_crop(mask);
        CHECK(r == CropRect{0, 0, 300, 400});
    }
    SUBCASE("growth clipped by the short axis goes non-square") {
        HoleMask mask(900, 600, 0);
        for (int y = 150; y < 450; ++y)
            for (int x = 300; x < 600; ++x) mask.at(x, y) = 1;
        CropRect r = auto_crop(mask);
        CHECK(r == CropRect{139, 0, 623, 600});
    }
    SUBCASE("clamped toward a corner") {
        HoleMask mask(2000, 2000, 0);
        for (int y = 0; y < 80; ++y)
            for (int x = 0; x < 80; ++x) mask.at(x, y) = 1;
        CropRect r = auto_crop(mask);
        CHECK(r == CropRect{0, 0, 512, 512});
    }
    SUBCASE("empty mask is rejected") {
        HoleMask mask(100, 100, 0);
        CHECK_THROWS_AS(auto_crop(mask), InputError);
    }
}

TEST_CASE("auto_crop random masks match the rule oracle") {
    Rng rng(0xcafe);
    for (int trial = 0; trial < 300; ++trial) {
        const int w = 64 + static_cast<int>(rng.below(1200));
        const int h = 64 + static_cast<int>(rng.below(1200));
        HoleMask mask(w, h, 0);
        const int nrect = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < nrect; ++k) {
            int rw = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(w)));
            int rh = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(h)));
            int x0 = static_cast<int>(rng.below(static_cast<uint64_t>(w - rw + 1)));
            int y0 = static_cast<int>(rng.below(static_cast<uint64_t>(h - rh + 1)));
            for (int y = y0; y < y0 + rh; ++y)
                for (int x = x0; x < x0 + rw; ++x) mask.at(x, y) = 1;
        }
        AutoCropParams params;
        if (trial % 3 == 1) params.base = 64;
        if (trial % 5 == 2) params.tau = 0.4;
        CropRect got = auto_crop(mask, params);
        CropRect want = crop_oracle(mask, params);
        REQUIRE(got == want);
        // the crop always stays inside the image and contains the bbox center
        REQUIRE(got.x >= 0);
        REQUIRE(got.y >= 0);
        REQUIRE(got.x + got.width <= w);
        REQUIRE(got.y + got.height <= h);
    }
}

TEST_CASE("build_matrix") {
    HoleMask mask(16, 16, 0);
    for (int y = 6; y < 10; ++y)
        for (int x = 6; x < 10; ++x) mask.at(x, y) = 1;

    SUBCASE("pinned verdict lands as o1 - o3") {
        std::vector<PlaneImage> crops = constant_crops(2, 16);
        FixedScorer scorer({0.2, 0.3, 0.5});
        PreferenceMatrix M = build_matrix(crops, mask, scorer);
        CHECK(M.n == 2);
        CHECK(M.at(0, 1) == doctest::Approx(-0.3).epsilon(1e-12));
        CHECK(M.at(1, 0) == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(M.at(0, 0) == 0.0);
        CHECK(M.at(1, 1) == 0.0);
        CHECK(scorer.calls == 1);
        std::vector<double> p = preference_vector(M);
        CHECK(p[0] == doctest::Approx(-0.15).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.15).epsilon(1e-12));
        // an n=2 duel is decided by the sign of o1 - o3 alone
        CHECK(p[1] > p[0]);
    }

    SUBCASE("uninformative scorer yields the zero matrix") {
        std::vector<PlaneImage> crops = constant_crops(8, 16);
        FixedScorer scorer({1.0 / 3, 1.0 / 3, 1.0 / 3});
        PreferenceMatrix M = build_matrix(crops, mask, scorer);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) CHECK(M.at(i, j) == 0.0);
    }

    SUBCASE("eight candidates: 28 calls, exact antisymmetry, zero-sum preference") {
        std::vector<PlaneImage> crops = constant_crops(8, 16);
        MeanScorer scorer;
        FixedScorer counter({0.5, 0.25, 0.25});
        PreferenceMatrix M = build_matrix(crops, mask, scorer, 2);
        PreferenceMatrix C = build_matrix(crops, mask, counter, 2);
        CHECK(counter.calls == 28);
        for (int i = 0; i < 8; ++i) {
            CHECK(M.at(i, i) == 0.0);
            for (int j = 0; j < 8; ++j) CHECK(M.at(i, j) == -M.at(j, i));
        }
        std::vector<double> p = preference_vector(M);
        double sum = 0;
        for (double x : p) sum += x;
        CHECK(std::abs(sum) <= 1e-12);
        // MeanScorer prefers the darker (lower-mean) image => candidate 0 wins
        int best = 0;
        for (int i = 1; i < 8; ++i)
            if (p[static_cast<size_t>(i)] > p[static_cast<size_t>(best)]) best = i;
        CHECK(best == 0);
    }

    SUBCASE("relabeling candidates permutes the matrix") {
        std::vector<PlaneImage> crops = constant_crops(5, 16);
        MeanScorer scorer;
        PreferenceMatrix M = build_matrix(crops, mask, scorer);
        const int perm[5] = {3, 0, 4, 2, 1};
        std::vector<PlaneImage> shuffled(5);
        for (int i = 0; i < 5; ++i)
            shuffled[static_cast<size_t>(i)] = crops[static_cast<size_t>(perm[i])];
        PreferenceMatrix S = build_matrix(shuffled, mask, scorer);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(S.at(i, j) == doctest::Approx(M.at(perm[i], perm[j])).epsilon(1e-12));
    }

    SUBCASE("invalid verdicts are rejected") {
        std::vector<PlaneImage> crops = constant_crops(2, 16);
        FixedScorer bad_sum({0.5, 0.5, 0.5});
        CHECK_THROWS_AS(build_matrix(crops, mask, bad_sum), ScorerError);
        FixedScorer negative({-0.1, 0.6, 0.5});
        CHECK_THROWS_AS(build_matrix(crops, mask, negative), ScorerError);
    }

    SUBCASE("scorer failures carry the pair identity") {
        struct Bomb : Scorer {
            PairwiseVerdict judge(const PlaneImage& left, const PlaneImage& right,
                                  const HoleMask&) override {
                if (std::abs(left.at(0, 0, 0) - 3.f / 9) < 1e-6 &&
                    std::abs(right.at(0, 0, 0) - 5.f / 9) < 1e-6)
                    throw ScorerError("boom");
                return {0.4, 0.2, 0.4};
            }
            std::string identity() const override { return "bomb"; }
        } bomb;
        std::vector<PlaneImage> crops = constant_crops(8, 16);
        bool threw = false;
        try {
            build_matrix(crops, mask, bomb);
        } catch (const ScorerError& e) {
            threw = true;
            const std::string msg = e.what();
            CHECK(msg.find("pair (2,4)") != std::string::npos);
            CHECK(msg.find("boom") != std::string::npos);
        }
        CHECK(threw);
    }

    SUBCASE("fewer than two candidates is an input error") {
        std::vector<PlaneImage> one = constant_crops(1, 16);
        FixedScorer scorer({1.0 / 3, 1.0 / 3, 1.0 / 3});
        CHECK_THROWS_AS(build_matrix(one, mask, scorer), InputError);
    }
}

TEST_CASE("select") {
    // 8 candidates over a 64x64 scene with a centered hole
    PlaneImage base = make_texture(64, 64, 17);
    HoleMask mask = rect_mask(64, 64, 22, 22, 20, 20);
    CandidateSet cands;
    for (int i = 0; i < 8; ++i) {
        PlaneImage img = base;
        for (int y = 22; y < 42; ++y)
            for (int x = 22; x < 42; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = static_cast<float>(i + 1) / 9.f;
        cands.images[static_cast<size_t>(i)] = img;
    }
    SelectionParams params;
    params.scorer_size = 64;

    SUBCASE("a scorer that always prefers the left picks combo 0") {
        FixedScorer scorer({1.0, 0.0, 0.0});
        SelectionResult res = select(cands, mask, scorer, params);
        CHECK(res.combo.index() == 0);
        CHECK(res.report.winner == 0);
        CHECK(res.report.scorer_identity == "fixed");
        CHECK(res.report.crop == auto_crop(mask));
        CHECK(same_pixels(res.winner, cands.images[0]));
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j) CHECK(res.report.matrix.at(i, j) == 1.0);
        // preference must decrease with the index under always-left
        for (int i = 1; i < 8; ++i)
            CHECK(res.report.preference[static_cast<size_t>(i)] <
                  res.report.preference[static_cast<size_t>(i - 1)]);
    }
    SUBCASE("a scorer that always prefers the right picks combo 7") {
        FixedScorer scorer({0.0, 0.0, 1.0});
        SelectionResult res = select(cands, mask, scorer, params);
        CHECK(res.combo.index() == 7);
        CHECK(same_pixels(res.winner, cands.images[7]));
    }
    SUBCASE("ties resolve to the lowest index") {
        FixedScorer scorer({0.25, 0.5, 0.25});
        SelectionResult res = select(cands, mask, scorer, params);
        CHECK(res.combo.index() == 0);
    }
    SUBCASE("thread count does not change the outcome") {
        MeanScorer scorer;
        SelectionParams two = params;
        two.threads = 2;
        SelectionResult a = select(cands, mask, scorer, params);
        SelectionResult b = select(cands, mask, scorer, two);
        CHECK(a.combo.index() == b.combo.index());
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                CHECK(a.report.matrix.at(i, j) == b.report.matrix.at(i, j));
    }
}

TEST_CASE("heuristic scorer") {
    PlaneImage clean = make_periodic(96, 96, 8, 5);
    HoleMask mask = rect_mask(96, 96, 30, 30, 36, 36);
    PlaneImage blurred_hole = clean;
    PlaneImage blur = gaussian_blur(clean, 2.5);
    for (int y = 30; y < 66; ++y)
        for (int x = 30; x < 66; ++x)
            for (int c = 0; c < 3; ++c) blurred_hole.at(x, y, c) = blur.at(x, y, c);

    SUBCASE("identical inputs split the verdict evenly") {
        HeuristicScorer scorer;
        PairwiseVerdict v = scorer.judge(clean, clean, mask);
        CHECK(v.o1 == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(v.o2 == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(v.o3 == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    SUBCASE("swapping the arguments mirrors the verdict bitwise") {
        HeuristicScorer scorer;
        PairwiseVerdict ab = scorer.judge(clean, blurred_hole, mask);
        PairwiseVerdict ba = scorer.judge(blurred_hole, clean, mask);
        CHECK(ab.o1 == ba.o3);
        CHECK(ab.o3 == ba.o1);
        CHECK(ab.o2 == ba.o2);
        CHECK(ab.o1 + ab.o2 + ab.o3 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("a blurred fill is penalized more than the real content") {
        HeuristicScorer scorer;
        CHECK(scorer.penalty(blurred_hole, mask) > scorer.penalty(clean, mask));
        PairwiseVerdict v = scorer.judge(clean, blurred_hole, mask);
        CHECK(v.o1 > v.o3);
    }
    SUBCASE("repeat calls are deterministic") {
        HeuristicScorer scorer;
        PairwiseVerdict a = scorer.judge(clean, blurred_hole, mask);
        PairwiseVerdict b = scorer.judge(clean, blurred_hole, mask);
        CHECK(a.o1 == b.o1);
        CHECK(a.o2 == b.o2);
        CHECK(a.o3 == b.o3);
        HeuristicScorer fresh;
        PairwiseVerdict c = fresh.judge(clean, blurred_hole, mask);
        CHECK(a.o1 == c.o1);
        CHECK(a.o3 == c.o3);
        CHECK(scorer.identity() == "heuristic");
    }
}
