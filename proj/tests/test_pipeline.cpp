#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "helpers.hpp"
#include "patchfill/pipeline.hpp"

using namespace pf;
using namespace testutil;

namespace {

PipelineInputs make_inputs(int w, int h, uint64_t seed) {
    PipelineInputs in;
    in.image = make_texture(w, h, seed);
    in.mask = rect_mask(w, h, w / 3, h / 3, w / 6, h / 6);
    in.guides = make_guides(in.image);
    in.coarse = make_coarse(in.image);
    return in;
}

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.threads = 1;
    // keep unit runs quick; acceptance exercises the full schedule
    cfg.em_coarsest = 4;
    cfg.em_finest = 2;
    cfg.pm_iterations = 3;
    return cfg;
}

std::set<std::string> stage_names(const PipelineResult& res) {
    std::set<std::string> names;
    for (const StageTiming& t : res.timings) names.insert(t.stage);
    return names;
}

}  // namespace

TEST_CASE("run_naive") {
    PipelineInputs in = make_inputs(192, 144, 3);
    PipelineConfig cfg = small_config();
    cfg.mode = "naive";
    HeuristicScorer scorer(cfg.heuristic_params());

    PipelineResult res = run_naive(in, cfg, scorer);

    SUBCASE("output shape and provenance") {
        CHECK(res.final_image.width == 192);
        CHECK(res.final_image.height == 144);
        CHECK(res.candidate_long_edge == 192);
        CHECK(res.combo.index() == res.curation.winner);
        CHECK(same_pixels(res.final_image,
                          res.candidates.images[static_cast<size_t>(res.combo.index())]));
        CHECK(stage_names(res) == std::set<std::string>{"candidates", "curation"});
        // image untouched outside the hole
        for (int y = 0; y < 144; ++y)
            for (int x = 0; x < 192; ++x)
                if (!in.mask.at(x, y))
                    for (int c = 0; c < 3; ++c)
                        REQUIRE(res.final_image.at(x, y, c) == in.image.at(x, y, c));
    }
    SUBCASE("deterministic across reruns and thread counts") {
        HeuristicScorer s2(cfg.heuristic_params());
        PipelineResult again = run_naive(in, cfg, s2);
        CHECK(same_pixels(res.final_image, again.final_image));
        CHECK(res.combo.index() == again.combo.index());

        PipelineConfig threaded = cfg;
        threaded.threads = 4;
        HeuristicScorer s3(cfg.heuristic_params());
        PipelineResult t4 = run_naive(in, threaded, s3);
        CHECK(same_pixels(res.final_image, t4.final_image));
        CHECK(res.combo.index() == t4.combo.index());
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                CHECK(res.curation.matrix.at(i, j) == t4.curation.matrix.at(i, j));
    }
    SUBCASE("seed changes the output") {
        PipelineConfig other = cfg;
        other.seed = 6;
        HeuristicScorer s2(cfg.heuristic_params());
        PipelineResult alt = run_naive(in, other, s2);
        CHECK_FALSE(same_pixels(res.final_image, alt.final_image));
    }
}

TEST_CASE("run_optimized at or below the working resolution equals naive") {
    PipelineInputs in = make_inputs(200, 150, 9);
    PipelineConfig cfg = small_config();
    HeuristicScorer s1(cfg.heuristic_params());
    HeuristicScorer s2(cfg.heuristic_params());
    cfg.mode = "naive";
    PipelineResult naive = run_naive(in, cfg, s1);
    cfg.mode = "optimized";
    PipelineResult opt = run_optimized(in, cfg, s2);
    CHECK(same_pixels(naive.final_image, opt.final_image));
    CHECK(naive.combo.index() == opt.combo.index());
    CHECK(opt.candidate_long_edge == 200);
    CHECK(stage_names(opt) == std::set<std::string>{"candidates", "curation"});
}

TEST_CASE("run_optimized above the working resolution") {
    // 1536x1152 keeps the full-res pass around a minute on one core
    PipelineInputs in = make_inputs(1536, 1152, 21);
    in.mask = rect_mask(1536, 1152, 700, 500, 120, 120);
    PipelineConfig cfg = small_config();
    cfg.mode = "optimized";
    HeuristicScorer scorer(cfg.heuristic_params());

    PipelineResult res = run_pipeline(in, cfg, scorer);

    CHECK(res.final_image.width == 1536);
    CHECK(res.final_image.height == 1152);
    CHECK(res.candidate_long_edge == 1024);
    CHECK(res.candidates.images[0].width == 1024);
    CHECK(res.candidates.images[0].height == 768);
    CHECK(stage_names(res) ==
          std::set<std::string>{"downscale", "candidates", "curation", "full_resolution"});
    size_t outside_mismatches = 0;
    for (int y = 0; y < 1152; ++y)
        for (int x = 0; x < 1536; ++x)
            if (!in.mask.at(x, y))
                for (int c = 0; c < 3; ++c)
                    outside_mismatches += res.final_image.at(x, y, c) != in.image.at(x, y, c);
    CHECK(outside_mismatches == 0);

    SUBCASE("deterministic rerun") {
        HeuristicScorer s2(cfg.heuristic_params());
        PipelineResult again = run_pipeline(in, cfg, s2);
        CHECK(same_pixels(res.final_image, again.final_image));
        CHECK(res.combo.index() == again.combo.index());
    }
}

TEST_CASE("run_pipeline dispatches on cfg.mode") {
    PipelineInputs in = make_inputs(160, 120, 8);
    PipelineConfig cfg = small_config();
    cfg.mode = "naive";
    HeuristicScorer s1(cfg.heuristic_params());
    PipelineResult a = run_pipeline(in, cfg, s1);
    HeuristicScorer s2(cfg.heuristic_params());
    PipelineResult b = run_naive(in, cfg, s2);
    CHECK(same_pixels(a.final_image, b.final_image));

    cfg.mode = "broken";
    HeuristicScorer s3(cfg.heuristic_params());
    CHECK_THROWS_AS(run_pipeline(in, cfg, s3), InputError);
}

TEST_CASE("pipeline rejects inconsistent inputs") {
    PipelineInputs in = make_inputs(128, 96, 4);
    PipelineConfig cfg = small_config();
    cfg.mode = "naive";
    HeuristicScorer scorer(cfg.heuristic_params());

    SUBCASE("mask dims differ") {
        in.mask = rect_mask(100, 96, 10, 10, 20, 20);
        CHECK_THROWS_AS(run_pipeline(in, cfg, scorer), InputError);
    }
    SUBCASE("empty mask") {
        in.mask = HoleMask(128, 96, 0);
        CHECK_THROWS_AS(run_pipeline(in, cfg, scorer), InputError);
    }
    SUBCASE("coarse fill with the wrong long edge") {
        in.coarse.image = PlaneImage(400, 300, 3, 0.5f);
        CHECK_THROWS_AS(run_pipeline(in, cfg, scorer), InputError);
    }
}
