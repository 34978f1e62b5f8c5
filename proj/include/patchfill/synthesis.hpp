#pragma once

#include <array>

#include "patchfill/patchmatch.hpp"

namespace pf {

enum class VoteMode { Uniform, DistanceWeighted };

struct SynthesisParams {
    PatchParams patch;
    int em_coarsest = 12;  // EM iterations at the coarsest level ...
    int em_finest = 4;     // ... decreasing linearly to this at the finest
    int level_entry_iterations = 2;  // search iterations entering a warm level
    int refine_iterations = 1;       // search iterations per later EM phase
    VoteMode vote_mode = VoteMode::Uniform;
    bool gainbias = true;
    int min_level_edge = 64;  // pyramid stops when the long edge would drop below
    bool tiled = false;       // banded parallel propagation (non-reference)
    int threads = 1;          // workers inside one synthesis (votes, bands)
    int band_rows = 64;

    int em_budget(int level, int depth) const {
        PF_ASSERT(level >= 0 && level < depth, "em_budget level out of range");
        if (depth == 1) return em_coarsest;
        const double t = static_cast<double>(level) / (depth - 1);
        return static_cast<int>(std::lround(em_finest + (em_coarsest - em_finest) * t));
    }

    void validate() const {
        patch.validate();
        PF_CHECK(em_coarsest >= 1 && em_finest >= 1, "EM schedule counts must be >= 1");
        PF_CHECK(level_entry_iterations >= 1 && refine_iterations >= 1,
                 "search iteration counts must be >= 1");
        PF_CHECK(min_level_edge >= patch.patch_size, "min_level_edge below patch size");
        PF_CHECK(threads >= 1 && band_rows >= patch.patch_size, "bad execution params");
    }
};

// Externally produced low-resolution fill of the hole (e.g. a deep model's
// output at 512 px on the long edge).
struct CoarseFill {
    PlaneImage image;
    std::string provenance;
};

// Full CLI contract for a coarse fill: 512 on the long edge, aspect matching
// the native image within a pixel of rounding.
void validate_coarse_fill(const CoarseFill& coarse, int native_w, int native_h);

// One inpainted image per guide combination, indexed by combo index.
struct CandidateSet {
    std::array<PlaneImage, 8> images;
};

// Coarsest-level image with hole pixels replaced by the resampled coarse fill.
PlaneImage initialize(const ImagePyramid& pyramid, const CoarseFill& coarse);

// One vote pass: every hole pixel becomes the (uniform or distance-weighted)
// average of the gain/bias-adjusted source pixels mapped onto it by all
// covering target patches. Non-hole pixels and guides are untouched.
PlaneImage vote(const NNField& f, const StackView& v, const HoleMask& mask,
                const SynthesisParams& sp);

// EM loop for one level, mutating `working` in place; returns the final field
// for use as the next-finer level's prior. `phase_totals`, when given,
// receives the total field distance after each search phase.
NNField run_level(PlaneImage& working, const HoleMask& mask, const GuideSet& guides,
                  const GuideCombo& combo, const WeightParams& wp,
                  const SynthesisParams& sp, int em_phases, uint64_t level_seed, bool cold,
                  const NNField* prior, std::vector<double>* phase_totals = nullptr);

// Single-level convenience wrapper (cold start, full EM budget at this level).
PlaneImage synthesize_level(const PlaneImage& image, const HoleMask& mask,
                            const GuideSet& guides, const GuideCombo& combo,
                            const WeightParams& wp, const SynthesisParams& sp,
                            uint64_t seed, std::vector<double>* phase_totals = nullptr);

// Coarse-to-fine synthesis beginning at `start_level` with `init` as that
// level's hole content (cold PatchMatch there, warm below). Level seeds are
// mix_seed(candidate_seed, level).
PlaneImage synthesize_from_level(const ImagePyramid& pyramid, const GuidePyramid& guides,
                                 PlaneImage init, int start_level, const GuideCombo& combo,
                                 const WeightParams& wp, const SynthesisParams& sp,
                                 uint64_t candidate_seed);

// Full coarse-to-fine synthesis of one candidate at native resolution.
PlaneImage synthesize_candidate(const ImagePyramid& pyramid, const GuidePyramid& guides,
                                const PlaneImage& coarsest_init, const GuideCombo& combo,
                                const WeightParams& wp, const SynthesisParams& sp,
                                uint64_t candidate_seed);

// All 8 combos; candidate i is seeded with mix_seed(seed, i) and synthesized
// in reference (serial) mode. Workers bound the candidate-level parallelism;
// memory_budget_mb caps how many candidates are in flight at once.
CandidateSet generate_candidates(const PlaneImage& image, const HoleMask& mask,
                                 const CoarseFill& coarse, const GuideSet& guides,
                                 const WeightParams& wp, const SynthesisParams& sp,
                                 uint64_t seed, int workers, int memory_budget_mb = 2500);

}  // namespace pf
