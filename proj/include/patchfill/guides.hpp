#pragma once

#include <array>
#include <string>
#include <vector>

#include "patchfill/image.hpp"

namespace pf {

enum class GuideKind { Structure = 0, Depth = 1, Segmentation = 2 };

enum class GuideComparison { Euclidean, LabelMismatch };

constexpr int kGuideKinds = 3;

// One auxiliary channel at some resolution. Structure and depth hold values
// in [0,1] and compare with squared differences; segmentation holds integer
// label ids and compares with a 0/1 mismatch indicator.
struct GuideChannel {
    GuideKind kind = GuideKind::Structure;
    GuideComparison comparison = GuideComparison::Euclidean;
    PlaneImage data;  // 1 channel
};

// Subset of the three guides: bit0 structure, bit1 depth, bit2 segmentation.
struct GuideCombo {
    uint8_t bits = 0;

    static GuideCombo from_index(int i) {
        PF_ASSERT(i >= 0 && i < 8, "combo index out of range");
        return GuideCombo{static_cast<uint8_t>(i)};
    }
    int index() const { return bits; }
    bool has(GuideKind k) const { return (bits >> static_cast<int>(k)) & 1; }
    int guide_count() const {
        return ((bits >> 0) & 1) + ((bits >> 1) & 1) + ((bits >> 2) & 1);
    }
    // "none" or a subset of "sdg" in stack order
    std::string letters() const;

    bool operator==(const GuideCombo&) const = default;
};

// Per-channel distance weights for a (3 + m)-channel stack: the three RGB
// entries first, then one entry per active guide in stack order. RGB shares
// w_c equally; the guides share 1 - w_c equally. With no guides w_c is 1.
struct GuideWeights {
    double w_c = 1.0;
    std::vector<double> per_channel;
};

struct WeightParams {
    double wc_with_structure = 0.3;
    double wc_without_structure = 0.6;
    // squared per-pixel penalty charged when segmentation labels disagree
    double mismatch_cost = 1.0;
};

GuideWeights compute_weights(const GuideCombo& combo, const WeightParams& params = {});

// Relative-total-variation smoothing (structure/texture separation). Returns
// a 3-channel structure image clamped to [0,1].
PlaneImage rtv_smooth(const PlaneImage& rgb, double lambda = 0.01, double sigma = 3.0,
                      int iterations = 4);

struct RtvParams {
    double lambda = 0.01;
    double sigma = 3.0;
    int iterations = 4;
};

// Structure guide: luminance of the RTV-smoothed image.
GuideChannel structure_from_image(const PlaneImage& rgb, const RtvParams& params = {});
// Structure guide from a precomputed structure image (no smoothing applied).
GuideChannel structure_from_channel(const PlaneImage& img);

// Depth must be strictly positive; stored as min-max normalized log depth.
// A constant map normalizes to 0.5 everywhere.
GuideChannel ingest_depth(const PlaneImage& depth);

// Labels must be integer-valued; stored as exact label ids.
GuideChannel ingest_segmentation(const PlaneImage& labels);

// All three guides at a common resolution, indexed by kind.
struct GuideSet {
    std::array<GuideChannel, kGuideKinds> channels;

    const GuideChannel& get(GuideKind k) const {
        return channels[static_cast<size_t>(k)];
    }
    GuideChannel& get(GuideKind k) { return channels[static_cast<size_t>(k)]; }
};

// Guides resampled to every pyramid level (bilinear; segmentation nearest).
struct GuidePyramid {
    std::vector<GuideSet> levels;  // index 0 = finest
};

GuidePyramid build_guide_pyramid(const GuideSet& guides, const ImagePyramid& pyramid);

// Materialized (3 + m)-channel stack for one combo, with matching weights.
struct GuideStack {
    PlaneImage stack;
    GuideWeights weights;
    GuideCombo combo;
    std::vector<GuideComparison> comparisons;  // one per stack channel
    double mismatch_cost = 1.0;
};

GuideStack assemble(const PlaneImage& rgb, const GuideSet& guides, const GuideCombo& combo,
                    const WeightParams& params = {});

// Zero-copy equivalent of GuideStack used by the synthesis hot path: the RGB
// image stays mutable and the guide planes are shared read-only.
struct StackView {
    const PlaneImage* rgb = nullptr;
    int n_guides = 0;
    const PlaneImage* guide[kGuideKinds] = {nullptr, nullptr, nullptr};
    bool guide_is_label[kGuideKinds] = {false, false, false};
    float guide_weight[kGuideKinds] = {0.f, 0.f, 0.f};
    float rgb_weight = 1.f / 3.f;  // per RGB channel
    float mismatch_cost = 1.f;

    int width() const { return rgb->width; }
    int height() const { return rgb->height; }
};

StackView make_view(const PlaneImage& rgb, const GuideSet& guides, const GuideCombo& combo,
                    const WeightParams& params = {});

}  // namespace pf
