#include "patchfill/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "patchfill/parallel.hpp"

namespace pf {

namespace {

constexpr int kWorkingLongEdge = 1024;

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_inputs(const PipelineInputs& in) {
    PF_CHECK(!in.image.empty() && in.image.channels == 3, "image must be RGB");
    PF_CHECK(in.mask.width == in.image.width && in.mask.height == in.image.height,
             "mask dimensions differ from the image");
    PF_CHECK(in.mask.hole_count() > 0, "mask has no hole pixels");
    validate_coarse_fill(in.coarse, in.image.width, in.image.height);
    for (int k = 0; k < kGuideKinds; ++k) {
        const GuideChannel& g = in.guides.channels[static_cast<size_t>(k)];
        PF_CHECK(!g.data.empty(), "all three guides are required");
        PF_CHECK(g.data.width == in.image.width && g.data.height == in.image.height,
                 "guide dimensions differ from the image");
    }
}

int effective_threads(const PipelineConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : hardware_threads();
}

}  // namespace

PipelineResult run_naive(const PipelineInputs& in, const PipelineConfig& cfg,
                         Scorer& scorer) {
    validate_inputs(in);
    cfg.validate();
    const int threads = effective_threads(cfg);

    PipelineResult res;
    auto t0 = Clock::now();
    res.candidates =
        generate_candidates(in.image, in.mask, in.coarse, in.guides, cfg.weight_params(),
                            cfg.synthesis_params(), cfg.seed, threads, cfg.memory_budget_mb);
    res.timings.push_back({"candidates", secs_since(t0)});

    auto t1 = Clock::now();
    SelectionParams sel = cfg.selection_params();
    sel.threads = threads;
    SelectionResult s = select(res.candidates, in.mask, scorer, sel);
    res.timings.push_back({"curation", secs_since(t1)});

    res.final_image = std::move(s.winner);
    res.combo = s.combo;
    res.curation = std::move(s.report);
    res.candidate_long_edge = in.image.long_edge();
    return res;
}

PipelineResult run_optimized(const PipelineInputs& in, const PipelineConfig& cfg,
                             Scorer& scorer) {
    validate_inputs(in);
    cfg.validate();
    if (in.image.long_edge() <= kWorkingLongEdge) return run_naive(in, cfg, scorer);

    const int threads = effective_threads(cfg);
    const WeightParams wp = cfg.weight_params();
    const SynthesisParams sp = cfg.synthesis_params();
    PipelineResult res;

    // working copy at the candidate resolution
    auto t0 = Clock::now();
    int ww, wh;
    if (in.image.width >= in.image.height) {
        ww = kWorkingLongEdge;
        wh = std::max<int>(1, static_cast<int>(std::lround(
                                  static_cast<double>(in.image.height) * ww / in.image.width)));
    } else {
        wh = kWorkingLongEdge;
        ww = std::max<int>(1, static_cast<int>(std::lround(
                                  static_cast<double>(in.image.width) * wh / in.image.height)));
    }
    const PlaneImage down = resize_area(in.image, ww, wh);
    const HoleMask dmask = resize_mask_any(in.mask, ww, wh);
    GuideSet dguides;
    for (int k = 0; k < kGuideKinds; ++k) {
        const GuideChannel& g = in.guides.channels[static_cast<size_t>(k)];
        GuideChannel& d = dguides.channels[static_cast<size_t>(k)];
        d.kind = g.kind;
        d.comparison = g.comparison;
        d.data = g.comparison == GuideComparison::LabelMismatch
                     ? resize_nearest(g.data, ww, wh)
                     : resize_area(g.data, ww, wh);
    }
    res.timings.push_back({"downscale", secs_since(t0)});

    auto t1 = Clock::now();
    res.candidates = generate_candidates(down, dmask, in.coarse, dguides, wp, sp, cfg.seed,
                                         threads, cfg.memory_budget_mb);
    res.timings.push_back({"candidates", secs_since(t1)});

    auto t2 = Clock::now();
    SelectionParams sel = cfg.selection_params();
    sel.threads = threads;
    SelectionResult s = select(res.candidates, dmask, scorer, sel);
    res.timings.push_back({"curation", secs_since(t2)});

    // one full-resolution synthesis with the winning combo, warm-started at
    // the pyramid level closest to the working resolution
    auto t3 = Clock::now();
    const ImagePyramid pyramid = build_pyramid(in.image, in.mask, sp.min_level_edge);
    PF_CHECK(std::min(pyramid.images.back().width, pyramid.images.back().height) >=
                 sp.patch.patch_size,
             "image aspect too extreme: coarsest level narrower than a patch");
    const GuidePyramid gp = build_guide_pyramid(in.guides, pyramid);
    int start = pyramid.depth() - 1;
    for (int level = 0; level < pyramid.depth(); ++level)
        if (pyramid.images[static_cast<size_t>(level)].long_edge() <= kWorkingLongEdge) {
            start = level;
            break;
        }

    PlaneImage init = pyramid.images[static_cast<size_t>(start)];
    const HoleMask& init_mask = pyramid.masks[static_cast<size_t>(start)];
    const PlaneImage up = resize_bilinear(s.winner, init.width, init.height);
    for (int y = 0; y < init.height; ++y)
        for (int x = 0; x < init.width; ++x)
            if (init_mask.at(x, y))
                for (int c = 0; c < 3; ++c) init.at(x, y, c) = up.at(x, y, c);

    SynthesisParams fine = sp;
    fine.tiled = true;
    fine.threads = threads;
    const uint64_t candidate_seed =
        mix_seed(cfg.seed, static_cast<uint64_t>(s.combo.index()));
    res.final_image = synthesize_from_level(pyramid, gp, std::move(init), start, s.combo, wp,
                                            fine, candidate_seed);
    res.timings.push_back({"full_resolution", secs_since(t3)});

    res.combo = s.combo;
    res.curation = std::move(s.report);
    res.candidate_long_edge = kWorkingLongEdge;
    return res;
}

PipelineResult run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg,
                            Scorer& scorer) {
    return cfg.mode == "naive" ? run_naive(in, cfg, scorer) : run_optimized(in, cfg, scorer);
}

}  // namespace pf
