#include "patchfill/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patchfill/parallel.hpp"

namespace pf {

void validate_coarse_fill(const CoarseFill& coarse, int native_w, int native_h) {
    PF_CHECK(!coarse.image.empty() && coarse.image.channels == 3,
             "coarse fill must be an RGB image");
    PF_CHECK(coarse.image.long_edge() == 512, "coarse fill must be 512 px on the long edge");
    const long expected_h =
        std::lround(static_cast<double>(coarse.image.width) * native_h / native_w);
    PF_CHECK(std::labs(expected_h - coarse.image.height) <= 1,
             "coarse fill aspect ratio does not match the image");
}

PlaneImage initialize(const ImagePyramid& pyramid, const CoarseFill& coarse) {
    PF_ASSERT(pyramid.depth() >= 1, "empty pyramid");
    const PlaneImage& level = pyramid.images.back();
    const HoleMask& mask = pyramid.masks.back();
    PF_CHECK(coarse.image.channels == level.channels, "coarse fill channel mismatch");
    PF_CHECK(coarse.image.width >= level.width && coarse.image.height >= level.height,
             "coarse fill smaller than the coarsest pyramid level");
    const long expected_h =
        std::lround(static_cast<double>(coarse.image.width) * level.height / level.width);
    PF_CHECK(std::labs(expected_h - coarse.image.height) <= 1,
             "coarse fill aspect ratio mismatch");
    const PlaneImage resampled = resize_bilinear(coarse.image, level.width, level.height);
    return composite(level, resampled, mask);
}

PlaneImage vote(const NNField& f, const StackView& v, const HoleMask& mask,
                const SynthesisParams& sp) {
    const PlaneImage& img = *v.rgb;
    PF_ASSERT(f.width == img.width && f.height == img.height, "vote: field dims differ");
    PF_CHECK(mask.width == img.width && mask.height == img.height, "vote: mask dims differ");
    PlaneImage out = img;
    const int w = img.width, h = img.height, r = sp.patch.radius();

    // distance weighting uses sigma = 75th percentile of current distances
    bool weighted = sp.vote_mode == VoteMode::DistanceWeighted;
    double two_sigma2 = 0;
    if (weighted) {
        std::vector<float> ds;
        ds.reserve(1024);
        for (size_t i = 0; i < f.dist.size(); ++i)
            if (f.target[i]) ds.push_back(f.dist[i]);
        if (ds.empty()) return out;
        const size_t k = (ds.size() * 3) / 4;
        std::nth_element(ds.begin(), ds.begin() + static_cast<long>(k), ds.end());
        const double sigma = ds[k];
        if (sigma > 0)
            two_sigma2 = 2 * sigma * sigma;
        else
            weighted = false;
    }

    const int band_rows = std::max(sp.band_rows, sp.patch.patch_size);
    const int bands = (h + band_rows - 1) / band_rows;
    parallel_for(bands, sp.threads, [&](int b) {
        const int y0 = b * band_rows, y1 = std::min((b + 1) * band_rows, h);
        // accumulators owned by this band; centers are visited in a fixed
        // row-major order so per-pixel sums do not depend on the banding
        std::vector<double> acc(static_cast<size_t>(y1 - y0) * w * 3, 0.0);
        std::vector<double> wsum(static_cast<size_t>(y1 - y0) * w, 0.0);
        const int cy0 = std::max(y0 - r, r), cy1 = std::min(y1 + r, h - r);
        for (int cy = cy0; cy < cy1; ++cy)
            for (int cx = r; cx < w - r; ++cx) {
                const size_t ci = f.idx(cx, cy);
                if (!f.target[ci]) continue;
                const int sx = cx + f.dx[ci], sy = cy + f.dy[ci];
                GainBias gb;
                if (sp.gainbias) gb = fit_patch_gain_bias(img, cx, cy, sx, sy, sp.patch);
                const double pw =
                    weighted ? std::exp(-static_cast<double>(f.dist[ci]) / two_sigma2) : 1.0;
                const int py_lo = std::max(cy - r, y0), py_hi = std::min(cy + r, y1 - 1);
                for (int py = py_lo; py <= py_hi; ++py)
                    for (int px = cx - r; px <= cx + r; ++px) {
                        if (!mask.at(px, py)) continue;
                        const size_t o = (static_cast<size_t>(py - y0) * w + px);
                        const float* s = &img.data[(static_cast<size_t>(py + f.dy[ci]) * w +
                                                    (px + f.dx[ci])) *
                                                   3];
                        acc[o * 3 + 0] += pw * (gb.gain[0] * s[0] + gb.bias[0]);
                        acc[o * 3 + 1] += pw * (gb.gain[1] * s[1] + gb.bias[1]);
                        acc[o * 3 + 2] += pw * (gb.gain[2] * s[2] + gb.bias[2]);
                        wsum[o] += pw;
                    }
            }
        for (int py = y0; py < y1; ++py)
            for (int px = 0; px < w; ++px) {
                if (!mask.at(px, py)) continue;
                const size_t o = static_cast<size_t>(py - y0) * w + px;
                PF_ASSERT(wsum[o] > 0, "hole pixel covered by no target patch");
                const double inv = 1.0 / wsum[o];
                out.at(px, py, 0) = static_cast<float>(acc[o * 3 + 0] * inv);
                out.at(px, py, 1) = static_cast<float>(acc[o * 3 + 1] * inv);
                out.at(px, py, 2) = static_cast<float>(acc[o * 3 + 2] * inv);
            }
    });
    return out;
}

NNField run_level(PlaneImage& working, const HoleMask& mask, const GuideSet& guides,
                  const GuideCombo& combo, const WeightParams& wp,
                  const SynthesisParams& sp, int em_phases, uint64_t level_seed, bool cold,
                  const NNField* prior, std::vector<double>* phase_totals) {
    sp.validate();
    PF_CHECK(working.channels == 3, "synthesis works on RGB images");
    const StackView view = make_view(working, guides, combo, wp);

    Rng rng(level_seed);
    NNField field = init_nnf(view, mask, sp.patch, sp.gainbias, rng, prior);
    if (field.target_count() == 0) return field;

    for (int phase = 0; phase < em_phases; ++phase) {
        const int iters = (phase == 0)
                              ? (cold ? sp.patch.pm_iterations : sp.level_entry_iterations)
                              : sp.refine_iterations;
        for (int k = 0; k < iters; ++k) {
            if (sp.tiled)
                pm_iterate_tiled(field, view, sp.patch, sp.gainbias,
                                 mix_seed(level_seed, 0x7117 + field.iterations_done),
                                 sp.band_rows, sp.threads);
            else
                pm_iterate(field, view, sp.patch, sp.gainbias, rng);
        }
        if (phase_totals) phase_totals->push_back(field.total_distance());
        working = vote(field, view, mask, sp);
        refresh_distances(field, view, sp.patch, sp.gainbias, sp.threads);
    }
    return field;
}

PlaneImage synthesize_level(const PlaneImage& image, const HoleMask& mask,
                            const GuideSet& guides, const GuideCombo& combo,
                            const WeightParams& wp, const SynthesisParams& sp,
                            uint64_t seed, std::vector<double>* phase_totals) {
    if (mask.hole_count() == 0) return image;
    PlaneImage working = image;
    run_level(working, mask, guides, combo, wp, sp, sp.em_budget(0, 1), seed,
              /*cold=*/true, nullptr, phase_totals);
    return working;
}

namespace {

// hole-only bilinear hand-off from the coarser working image
void upsample_hole_content(const PlaneImage& coarse_working, PlaneImage& fine,
                           const HoleMask& fine_mask) {
    const PlaneImage up = resize_bilinear(coarse_working, fine.width, fine.height);
    for (int y = 0; y < fine.height; ++y)
        for (int x = 0; x < fine.width; ++x)
            if (fine_mask.at(x, y))
                for (int c = 0; c < 3; ++c) fine.at(x, y, c) = up.at(x, y, c);
}

}  // namespace

PlaneImage synthesize_from_level(const ImagePyramid& pyramid, const GuidePyramid& guides,
                                 PlaneImage init, int start_level, const GuideCombo& combo,
                                 const WeightParams& wp, const SynthesisParams& sp,
                                 uint64_t candidate_seed) {
    const int depth = pyramid.depth();
    PF_ASSERT(depth >= 1 && static_cast<int>(guides.levels.size()) == depth,
              "guide pyramid depth mismatch");
    PF_ASSERT(start_level >= 0 && start_level < depth, "start level out of range");
    PF_ASSERT(init.width == pyramid.images[static_cast<size_t>(start_level)].width &&
                  init.height == pyramid.images[static_cast<size_t>(start_level)].height,
              "init content does not match the start level");
    PlaneImage working = std::move(init);
    NNField field;
    for (int level = start_level; level >= 0; --level) {
        if (level < start_level) {
            PlaneImage finer = pyramid.images[static_cast<size_t>(level)];
            upsample_hole_content(working, finer, pyramid.masks[static_cast<size_t>(level)]);
            working = std::move(finer);
        }
        const bool cold = level == start_level;
        field = run_level(working, pyramid.masks[static_cast<size_t>(level)],
                          guides.levels[static_cast<size_t>(level)], combo, wp, sp,
                          sp.em_budget(level, depth), mix_seed(candidate_seed, level), cold,
                          cold ? nullptr : &field);
    }
    return composite(pyramid.images[0], working, pyramid.masks[0]);
}

PlaneImage synthesize_candidate(const ImagePyramid& pyramid, const GuidePyramid& guides,
                                const PlaneImage& coarsest_init, const GuideCombo& combo,
                                const WeightParams& wp, const SynthesisParams& sp,
                                uint64_t candidate_seed) {
    return synthesize_from_level(pyramid, guides, coarsest_init, pyramid.depth() - 1, combo,
                                 wp, sp, candidate_seed);
}

CandidateSet generate_candidates(const PlaneImage& image, const HoleMask& mask,
                                 const CoarseFill& coarse, const GuideSet& guides,
                                 const WeightParams& wp, const SynthesisParams& sp,
                                 uint64_t seed, int workers, int memory_budget_mb) {
    sp.validate();
    PF_CHECK(image.channels == 3, "candidate generation expects an RGB image");
    PF_CHECK(mask.width == image.width && mask.height == image.height,
             "mask dims differ from image");
    for (int k = 0; k < kGuideKinds; ++k)
        PF_CHECK(!guides.channels[static_cast<size_t>(k)].data.empty(),
                 "all three guides are required (all combos are generated)");

    const ImagePyramid pyramid = build_pyramid(image, mask, sp.min_level_edge);
    PF_CHECK(std::min(pyramid.images.back().width, pyramid.images.back().height) >=
                 sp.patch.patch_size,
             "image aspect too extreme: coarsest level narrower than a patch");
    const GuidePyramid guide_pyr = build_guide_pyramid(guides, pyramid);
    const PlaneImage coarsest_init = initialize(pyramid, coarse);

    // Cap concurrent candidates by the memory budget: roughly one RGB level
    // copy, one dense field, and one hand-off image per candidate in flight.
    const double per_candidate_mb =
        static_cast<double>(image.pixel_count()) * (3 * 4 + 12 + 2 + 3 * 4) / 1.0e6;
    int in_flight = workers;
    if (per_candidate_mb > 0)
        in_flight = std::min<int>(
            workers, std::max(1, static_cast<int>(memory_budget_mb / per_candidate_mb)));

    CandidateSet out;
    parallel_for(8, in_flight, [&](int c) {
        SynthesisParams local = sp;
        local.tiled = false;  // candidates run in reference mode
        local.threads = 1;
        out.images[static_cast<size_t>(c)] =
            synthesize_candidate(pyramid, guide_pyr, coarsest_init,
                                 GuideCombo::from_index(c), wp, local,
                                 mix_seed(seed, static_cast<uint64_t>(c)));
    });
    return out;
}

}  // namespace pf
