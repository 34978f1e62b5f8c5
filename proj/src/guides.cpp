#include "patchfill/guides.hpp"

#include <cmath>
#include <limits>

namespace pf {

std::string GuideCombo::letters() const {
    if (bits == 0) return "none";
    std::string s;
    if (has(GuideKind::Structure)) s += 's';
    if (has(GuideKind::Depth)) s += 'd';
    if (has(GuideKind::Segmentation)) s += 'g';
    return s;
}

GuideWeights compute_weights(const GuideCombo& combo, const WeightParams& params) {
    GuideWeights w;
    const int m = combo.guide_count();
    if (m == 0) {
        w.w_c = 1.0;
        w.per_channel.assign(3, 1.0 / 3.0);
        return w;
    }
    w.w_c = combo.has(GuideKind::Structure) ? params.wc_with_structure
                                            : params.wc_without_structure;
    w.per_channel.assign(static_cast<size_t>(3 + m), w.w_c / 3.0);
    const double guide_w = (1.0 - w.w_c) / m;
    for (int i = 0; i < m; ++i) w.per_channel[static_cast<size_t>(3 + i)] = guide_w;
    return w;
}

GuideChannel structure_from_image(const PlaneImage& rgb, const RtvParams& params) {
    PF_CHECK(rgb.channels == 3, "structure guide needs an RGB image");
    GuideChannel ch;
    ch.kind = GuideKind::Structure;
    ch.comparison = GuideComparison::Euclidean;
    ch.data = to_luminance(rtv_smooth(rgb, params.lambda, params.sigma, params.iterations));
    return ch;
}

GuideChannel structure_from_channel(const PlaneImage& img) {
    PF_CHECK(img.channels == 1 || img.channels == 3, "structure image must be gray or RGB");
    GuideChannel ch;
    ch.kind = GuideKind::Structure;
    ch.comparison = GuideComparison::Euclidean;
    ch.data = to_luminance(img);
    for (float& v : ch.data.data) v = std::clamp(v, 0.f, 1.f);
    return ch;
}

GuideChannel ingest_depth(const PlaneImage& depth) {
    PF_CHECK(depth.channels == 1, "depth map must have one channel");
    GuideChannel ch;
    ch.kind = GuideKind::Depth;
    ch.comparison = GuideComparison::Euclidean;
    ch.data = PlaneImage(depth.width, depth.height, 1);

    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (size_t i = 0; i < depth.data.size(); ++i) {
        const float v = depth.data[i];
        PF_CHECK(v > 0.f && std::isfinite(v), "depth values must be positive and finite");
        const float l = std::log(v);
        ch.data.data[i] = l;
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    const float span = hi - lo;
    if (span < 1e-12f) {
        for (float& v : ch.data.data) v = 0.5f;
    } else {
        for (float& v : ch.data.data) v = (v - lo) / span;
    }
    return ch;
}

GuideChannel ingest_segmentation(const PlaneImage& labels) {
    PF_CHECK(labels.channels == 1, "segmentation map must have one channel");
    GuideChannel ch;
    ch.kind = GuideKind::Segmentation;
    ch.comparison = GuideComparison::LabelMismatch;
    ch.data = PlaneImage(labels.width, labels.height, 1);
    for (size_t i = 0; i < labels.data.size(); ++i) {
        const float v = labels.data[i];
        const float r = std::nearbyint(v);
        PF_CHECK(std::isfinite(v) && std::fabs(v - r) <= 1e-4f,
                 "segmentation labels must be integer-valued");
        ch.data.data[i] = r;
    }
    return ch;
}

GuidePyramid build_guide_pyramid(const GuideSet& guides, const ImagePyramid& pyramid) {
    GuidePyramid out;
    out.levels.resize(static_cast<size_t>(pyramid.depth()));
    for (int l = 0; l < pyramid.depth(); ++l) {
        const int w = pyramid.images[static_cast<size_t>(l)].width;
        const int h = pyramid.images[static_cast<size_t>(l)].height;
        for (int k = 0; k < kGuideKinds; ++k) {
            const GuideChannel& src = guides.channels[static_cast<size_t>(k)];
            GuideChannel& dst = out.levels[static_cast<size_t>(l)].channels[static_cast<size_t>(k)];
            dst.kind = src.kind;
            dst.comparison = src.comparison;
            if (src.data.empty()) continue;
            dst.data = (src.comparison == GuideComparison::LabelMismatch)
                           ? resize_nearest(src.data, w, h)
                           : resize_bilinear(src.data, w, h);
        }
    }
    return out;
}

GuideStack assemble(const PlaneImage& rgb, const GuideSet& guides, const GuideCombo& combo,
                    const WeightParams& params) {
    PF_CHECK(rgb.channels == 3, "assemble expects an RGB image");
    GuideStack out;
    out.combo = combo;
    out.weights = compute_weights(combo, params);
    out.mismatch_cost = params.mismatch_cost;
    const int m = combo.guide_count();
    out.stack.reset(rgb.width, rgb.height, 3 + m);
    out.comparisons.assign(static_cast<size_t>(3 + m), GuideComparison::Euclidean);

    const PlaneImage* planes[kGuideKinds];
    int mi = 0;
    for (int k = 0; k < kGuideKinds; ++k) {
        const auto kind = static_cast<GuideKind>(k);
        if (!combo.has(kind)) continue;
        const GuideChannel& ch = guides.channels[static_cast<size_t>(k)];
        PF_CHECK(!ch.data.empty(), "combo requires a guide that was not provided");
        PF_CHECK(ch.data.width == rgb.width && ch.data.height == rgb.height,
                 "guide resolution differs from image");
        PF_ASSERT(ch.kind == kind, "guide stored under wrong kind");
        planes[mi] = &ch.data;
        out.comparisons[static_cast<size_t>(3 + mi)] = ch.comparison;
        ++mi;
    }
    PF_ASSERT(mi == m, "assembled guide count mismatch");

    const size_t n = rgb.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        float* dst = &out.stack.data[i * static_cast<size_t>(3 + m)];
        dst[0] = rgb.data[i * 3 + 0];
        dst[1] = rgb.data[i * 3 + 1];
        dst[2] = rgb.data[i * 3 + 2];
        for (int g = 0; g < m; ++g) dst[3 + g] = planes[g]->data[i];
    }
    return out;
}

StackView make_view(const PlaneImage& rgb, const GuideSet& guides, const GuideCombo& combo,
                    const WeightParams& params) {
    PF_CHECK(rgb.channels == 3, "make_view expects an RGB image");
    StackView v;
    v.rgb = &rgb;
    v.mismatch_cost = static_cast<float>(params.mismatch_cost);
    const GuideWeights w = compute_weights(combo, params);
    v.rgb_weight = static_cast<float>(w.w_c / 3.0);
    int mi = 0;
    for (int k = 0; k < kGuideKinds; ++k) {
        const auto kind = static_cast<GuideKind>(k);
        if (!combo.has(kind)) continue;
        const GuideChannel& ch = guides.channels[static_cast<size_t>(k)];
        PF_CHECK(!ch.data.empty(), "combo requires a guide that was not provided");
        PF_CHECK(ch.data.width == rgb.width && ch.data.height == rgb.height,
                 "guide resolution differs from image");
        v.guide[mi] = &ch.data;
        v.guide_is_label[mi] = ch.comparison == GuideComparison::LabelMismatch;
        v.guide_weight[mi] = static_cast<float>(w.per_channel[static_cast<size_t>(3 + mi)]);
        ++mi;
    }
    v.n_guides = mi;
    return v;
}

}  // namespace pf
