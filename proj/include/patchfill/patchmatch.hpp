#pragma once

#include <optional>
#include <string>
#include <vector>

#include "patchfill/guides.hpp"

namespace pf {

struct PatchParams {
    int patch_size = 7;
    int pm_iterations = 5;
    double alpha = 0.5;  // random-search radius decay
    uint64_t rng_seed = 0;
    double gain_min = 0.9;
    double gain_max = 1.1;
    double bias_min = -0.05;
    double bias_max = 0.05;

    int radius() const { return patch_size / 2; }
    void validate() const {
        PF_CHECK(patch_size >= 3 && patch_size % 2 == 1 && patch_size <= 31,
                 "patch_size must be odd, in [3, 31]");
        PF_CHECK(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
        PF_CHECK(pm_iterations >= 1, "pm_iterations must be >= 1");
        PF_CHECK(gain_min <= 1.0 && gain_max >= 1.0 && gain_min <= gain_max,
                 "gain bounds must bracket 1");
        PF_CHECK(bias_min <= 0.0 && bias_max >= 0.0 && bias_min <= bias_max,
                 "bias bounds must bracket 0");
    }
};

// Per-patch photometric adjustment of the source: adj(s) = gain*s + bias,
// fitted per RGB channel and clamped.
struct GainBias {
    float gain[3] = {1.f, 1.f, 1.f};
    float bias[3] = {0.f, 0.f, 0.f};
};

struct PatchCost {
    float distance = 0.f;
    GainBias gb;
};

// Dense nearest-neighbor field. Entries are meaningful where target != 0;
// everything else stays zeroed (and is dumped as zeros).
struct NNField {
    int width = 0;
    int height = 0;
    std::vector<int32_t> dx, dy;
    std::vector<float> dist;
    std::vector<uint8_t> target;     // centers to synthesize (hole dilated by radius)
    std::vector<uint8_t> source_ok;  // centers whose patch is in-bounds and hole-free
    int iterations_done = 0;

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }

    double total_distance() const {
        double s = 0;
        for (size_t i = 0; i < dist.size(); ++i)
            if (target[i]) s += dist[i];
        return s;
    }

    size_t target_count() const {
        size_t n = 0;
        for (uint8_t v : target) n += v != 0;
        return n;
    }
};

// Reference patch distance over a materialized guide stack. Returns the
// weighted SSD and the gain/bias it used (identity when disabled).
PatchCost weighted_patch_distance(const GuideStack& gs, int tx, int ty, int sx, int sy,
                                  const PatchParams& params, bool gainbias);

// Hot-path distance over a StackView. Bounds are the caller's responsibility.
// Values above `cutoff` may be returned early and are only guaranteed to
// exceed `cutoff`. When `gb` is non-null the fitted gain/bias is written.
float view_patch_distance(const StackView& v, int tx, int ty, int sx, int sy,
                          const PatchParams& params, bool gainbias, float cutoff,
                          GainBias* gb = nullptr);

// Just the clamped per-channel least-squares fit (RGB only). Equals the
// gain/bias produced by the distance functions for the same pair.
GainBias fit_patch_gain_bias(const PlaneImage& rgb, int tx, int ty, int sx, int sy,
                             const PatchParams& params);

// Random (or prior-upscaled) initialization. `prior` is the field from the
// next-coarser level (ceil-halved dims); its offsets are doubled and kept
// when still valid. Draws come from `rng` in scan order.
NNField init_nnf(const StackView& v, const HoleMask& mask, const PatchParams& params,
                 bool gainbias, Rng& rng, const NNField* prior = nullptr);

// One serial PatchMatch iteration: scanline propagation (reversed on odd
// iterations) plus exponential random search. Per-pixel distance never
// increases. This is the reference mode.
void pm_iterate(NNField& f, const StackView& v, const PatchParams& params, bool gainbias,
                Rng& rng);

// Banded variant: rows are split into fixed-height bands processed in
// parallel; propagation does not cross band edges within one iteration.
// Deterministic for a fixed seed regardless of thread count, but not
// bit-identical to the serial reference.
void pm_iterate_tiled(NNField& f, const StackView& v, const PatchParams& params,
                      bool gainbias, uint64_t iter_seed, int band_rows, int threads);

// Recompute all stored distances against the current image content.
void refresh_distances(NNField& f, const StackView& v, const PatchParams& params,
                       bool gainbias, int threads = 1);

// Number of entries whose source patch is out of bounds, overlaps the hole,
// or whose cached distance disagrees with a recompute (tests/debug).
size_t nnf_validity_violations(const NNField& f, const StackView& v, const HoleMask& mask,
                               const PatchParams& params, bool gainbias,
                               float dist_tol = 1e-4f);

void write_nnf_dump(const std::string& path, const NNField& f);

}  // namespace pf
