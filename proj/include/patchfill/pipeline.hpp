#pragma once

#include <string>
#include <vector>

#include "patchfill/config.hpp"

namespace pf {

struct PipelineInputs {
    PlaneImage image;  // native RGB
    HoleMask mask;     // native hole mask
    CoarseFill coarse;
    GuideSet guides;   // structure, depth, segmentation at native resolution
};

struct StageTiming {
    std::string stage;
    double seconds = 0;
};

struct PipelineResult {
    PlaneImage final_image;
    GuideCombo combo;
    CurationReport curation;
    CandidateSet candidates;      // at the candidate resolution
    int candidate_long_edge = 0;  // native (naive) or the working resolution
    std::vector<StageTiming> timings;
};

// 8 native-resolution candidates, then curation picks the winner.
PipelineResult run_naive(const PipelineInputs& in, const PipelineConfig& cfg, Scorer& scorer);

// Candidates and curation at a 1024-px long edge, then one full-resolution
// synthesis with the winning combo, warm-started from the winning low-res
// result. Collapses to the naive path when the image is already at or below
// the working resolution.
PipelineResult run_optimized(const PipelineInputs& in, const PipelineConfig& cfg,
                             Scorer& scorer);

// Dispatch on cfg.mode.
PipelineResult run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg,
                            Scorer& scorer);

}  // namespace pf
